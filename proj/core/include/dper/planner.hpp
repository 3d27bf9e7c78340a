#pragma once

// Graded project-join trees and how to build them.
//
// A project-join tree has one leaf per clause; each internal node joins its
// children and then projects the variables in its `projected` set. A tree is
// (X,Y)-graded when every internal node projects only X or only Y variables
// and no X-grade node sits below a Y-grade node, which is what makes early
// projection sound for the exist-random quantifier prefix.

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "dper/formula.hpp"

namespace dper {

enum class Heuristic { MinFill, MinDegree, Lexicographic };

/// Accepts "min-fill", "min-degree", "lex" (or "lexicographic").
Heuristic parse_heuristic(std::string_view name);
std::string_view heuristic_name(Heuristic h);

enum class Grade { X, Y };

struct PjNode {
  int id = 0;
  bool leaf = false;
  int clause = -1;            // leaves only; index into Problem::clauses
  std::vector<int> children;  // internal only
  std::vector<Variable> projected;
  Grade grade = Grade::X;  // internal only

  friend bool operator==(const PjNode&, const PjNode&) = default;
};

/// Nodes are indexed by id.
struct PjTree {
  std::vector<PjNode> nodes;
  int root = -1;

  const PjNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return nodes.size(); }

  friend bool operator==(const PjTree&, const PjTree&) = default;
};

/// criterion 0 is structural (ids, parent links, leaf/clause bijection);
/// 1 and 2 are the project-join tree criteria; 11..14 are gradedness
/// properties 1..4.
struct TreeViolation {
  int criterion = 0;
  std::vector<int> nodes;
  std::string message;
};

class TreeError : public std::runtime_error {
 public:
  explicit TreeError(std::vector<TreeViolation> violations);

  const std::vector<TreeViolation>& violations() const { return violations_; }

 private:
  std::vector<TreeViolation> violations_;
};

/// Every Y variable precedes every X variable; within a block the heuristic
/// picks the next vertex of the shrinking elimination graph. Ties go to the
/// lowest id unless randomize_ties, in which case `seed` drives the choice.
std::vector<Variable> elimination_order(const Graph& g, const std::set<Variable>& exist,
                                        const std::set<Variable>& random, Heuristic h, std::uint64_t seed = 0,
                                        bool randomize_ties = false, std::stop_token stop = {});

/// Bucket elimination along `order`. Throws std::invalid_argument when the
/// order breaks the Y-before-X block constraint or misses a clause variable.
PjTree build_graded_tree(const Problem& p, std::span<const Variable> order);

struct PlanOptions {
  Heuristic heuristic = Heuristic::MinFill;
  std::uint64_t seed = 0;
  bool randomize_ties = false;
};

PjTree plan(const Problem& p, const PlanOptions& options = {}, std::stop_token stop = {});

std::vector<TreeViolation> tree_violations(const PjTree& t, const Problem& p);
void check_tree(const PjTree& t, const Problem& p);
std::vector<TreeViolation> graded_violations(const PjTree& t, const std::set<Variable>& exist,
                                             const std::set<Variable>& random);
void check_graded(const PjTree& t, const std::set<Variable>& exist, const std::set<Variable>& random);

/// vars(v) for every node: clause variables at leaves, and at internal nodes
/// the union over children minus the node's own projected set.
std::vector<std::set<Variable>> node_vars(const PjTree& t, const Problem& p);
int width(const PjTree& t, const Problem& p);

/// Projected variables in valuation order (post-order, children left to
/// right, each projected set ascending).
std::vector<Variable> projection_order(const PjTree& t);

/// Children-first node order.
std::vector<int> post_order(const PjTree& t);

std::string write_tree(const PjTree& t, const Problem& p);
/// Parses and validates (check_tree + check_graded) against p.
PjTree read_tree(std::string_view text, const Problem& p);

}  // namespace dper
