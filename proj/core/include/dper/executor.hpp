#pragma once

#include <cstddef>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "dper/formula.hpp"
#include "dper/pbf.hpp"
#include "dper/planner.hpp"

namespace dper {

/// Derivative signs in push order; the maximizer pops from the back.
using DsgnStack = std::vector<DsgnFunc>;

struct SolveStats {
  int width = 0;
  std::size_t tree_nodes = 0;
  /// Nodes allocated in the diagram store over the whole solve.
  std::size_t store_nodes = 0;
  /// Largest single intermediate diagram, in nodes.
  std::size_t peak_diagram_nodes = 0;
  /// Largest support of any intermediate diagram.
  std::size_t max_support = 0;
  std::size_t dsgn_entries = 0;
  double plan_seconds = 0;
  double exec_seconds = 0;
};

struct SolveResult {
  double maximum = 0;
  /// Total over X.
  Assignment maximizer;
  SolveStats stats;
};

struct SolveOptions {
  /// Run check_tree and check_graded before valuating. Ignored in debug mode,
  /// where the annotated assertions take over.
  bool validate_tree = true;
  bool debug_assert = false;
  /// Debug mode materializes the full formula, so it refuses larger problems.
  std::size_t debug_var_cap = 16;
  double debug_tolerance = 1e-9;
  /// Diagram node cap; 0 means unlimited.
  std::size_t node_limit = 0;
  std::stop_token stop;
};

/// The solve ran out of time or diagram nodes; carries the stats gathered so far.
class SolveInterrupted : public std::runtime_error {
 public:
  enum class Kind { Deadline, Resource };

  SolveInterrupted(Kind kind, const std::string& message, SolveStats stats)
      : std::runtime_error(message), kind_(kind), stats_(stats) {}

  Kind kind() const { return kind_; }
  const SolveStats& stats() const { return stats_; }

 private:
  Kind kind_;
  SolveStats stats_;
};

/// A debug-mode assertion failed. `point` names the program point:
/// pre-condition, join-condition, project-condition, post-condition,
/// maximizer-push, maximizer-const, maximizer-pop, active-set, grade,
/// structure, terminal-range, support-width.
class DebugAssertionError : public std::logic_error {
 public:
  DebugAssertionError(std::string point, int node, int var, const std::string& detail);

  const std::string& point() const { return point_; }
  int node() const { return node_; }
  int var() const { return var_; }

 private:
  std::string point_;
  int node_;
  int var_;
};

/// Diagram order for valuating t: variables in projection order, then the
/// remaining problem variables ascending.
VarOrder diagram_order(const Problem& p, const PjTree& t);

/// Valuation of node v. Pushes one derivative sign per X variable projected
/// in v's subtree, each computed right before that variable is projected.
PbFunc valuate(const Problem& p, const PjTree& t, int v, DiagramStore& store, DsgnStack& stack,
               SolveStats* stats = nullptr);

/// Pops the stack into a total X-assignment; X variables with no entry get 0.
Assignment extract_maximizer(const Problem& p, DsgnStack& stack);

SolveResult solve(const Problem& p, const PjTree& t, const SolveOptions& options = {});

/// Joins every clause into one diagram, projects Y, then maximizes over X
/// variable by variable. Throws std::length_error when |X| + |Y| > var_cap.
SolveResult solve_monolithic(const Problem& p, std::size_t var_cap = 25, const SolveOptions& options = {});

/// solve with every annotated assertion checked at its program point.
SolveResult debug_assert_mode(const Problem& p, const PjTree& t, SolveOptions options = {});

}  // namespace dper
