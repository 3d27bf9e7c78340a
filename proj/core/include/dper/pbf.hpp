#pragma once

// Pseudo-Boolean functions as reduced ordered decision diagrams with real
// terminals. All diagrams of one solve live in one DiagramStore; nodes are
// hash-consed, so two handles from the same store are equal iff the functions
// they denote are pointwise equal.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dper/formula.hpp"

namespace dper {

/* errors =================================================================== */

/// Node cap exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stop was requested on the store's stop token.
class Cancelled : public std::runtime_error {
 public:
  Cancelled() : std::runtime_error("cancelled") {}
};

/// Operands come from different stores (and hence possibly different orders).
class OrderMismatch : public std::invalid_argument {
 public:
  OrderMismatch() : std::invalid_argument("operands belong to different diagram stores") {}
};

/* class VarOrder =========================================================== */

/// Bijection between variables and diagram levels; level 0 is the root side.
class VarOrder {
 public:
  VarOrder() = default;
  explicit VarOrder(std::vector<Variable> top_to_bottom);

  /// Ascending ids.
  static VarOrder natural(int num_vars);

  std::uint32_t level(Variable v) const;
  bool contains(Variable v) const { return v.id >= 0 && static_cast<std::size_t>(v.id) < levels_.size() && levels_[v.id] != kAbsent; }
  Variable at(std::uint32_t level) const { return vars_.at(level); }
  std::size_t size() const { return vars_.size(); }
  const std::vector<Variable>& vars() const { return vars_; }

 private:
  static constexpr std::uint32_t kAbsent = UINT32_MAX;

  std::vector<Variable> vars_;
  std::vector<std::uint32_t> levels_;  // indexed by variable id
};

/* class Assignment ========================================================= */

/// Partial map from variables to Booleans.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<Variable, bool>> entries);

  void set(Variable v, bool value);
  void erase(Variable v);
  bool contains(Variable v) const { return lookup(v) >= 0; }
  std::optional<bool> get(Variable v) const;
  /// Throws std::out_of_range when v is unassigned.
  bool at(Variable v) const;

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Assigned variables in ascending order.
  std::vector<std::pair<Variable, bool>> entries() const;
  /// Assigned variables as signed DIMACS literals, ascending by variable.
  std::vector<int> literals() const;

  friend bool operator==(const Assignment& a, const Assignment& b) { return a.entries() == b.entries(); }

 private:
  int lookup(Variable v) const {
    return v.id >= 0 && static_cast<std::size_t>(v.id) < values_.size() ? values_[v.id] : -1;
  }

  std::vector<std::int8_t> values_;  // -1 unassigned, 0, 1; indexed by id
  std::size_t count_ = 0;
};

/* diagrams ================================================================= */

using NodeId = std::uint32_t;

class DiagramStore;

/// Handle to a diagram in a DiagramStore. Cheap to copy; the store must outlive it.
class PbFunc {
 public:
  PbFunc() = default;
  PbFunc(DiagramStore* store, NodeId id) : store_(store), id_(id) {}

  DiagramStore* store() const { return store_; }
  NodeId id() const { return id_; }
  bool valid() const { return store_ != nullptr; }

  friend bool operator==(const PbFunc&, const PbFunc&) = default;

 private:
  DiagramStore* store_ = nullptr;
  NodeId id_ = 0;
};

/// Derivative sign of f w.r.t. var: chooser(tau) = 1 iff f(tau, var=1) >= f(tau, var=0).
struct DsgnFunc {
  Variable var;
  PbFunc chooser;
};

enum class BinaryOp : std::uint8_t { Mul, Add, Sub, Max, Min, Ge, AbsDiff };

class DiagramStore {
 public:
  explicit DiagramStore(VarOrder order);
  DiagramStore(const DiagramStore&) = delete;
  DiagramStore& operator=(const DiagramStore&) = delete;

  const VarOrder& order() const { return order_; }

  /// 0 means unlimited.
  void set_node_limit(std::size_t limit) { node_limit_ = limit; }
  void set_stop_token(std::stop_token token) { stop_ = std::move(token); }

  bool stop_requested() const { return stop_.stop_requested(); }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t cache_size() const { return cache_.size(); }
  void clear_cache() { cache_.clear(); }

  struct Node {
    std::uint32_t level;  // kTerminal for terminals
    NodeId lo;
    NodeId hi;
    double value;
  };
  static constexpr std::uint32_t kTerminal = UINT32_MAX;

  const Node& node(NodeId id) const { return nodes_[id]; }
  bool is_terminal(NodeId id) const { return nodes_[id].level == kTerminal; }

  NodeId terminal(double value);
  /// Reduced: returns lo when lo == hi.
  NodeId make(std::uint32_t level, NodeId lo, NodeId hi);

  NodeId apply(BinaryOp op, NodeId a, NodeId b);
  NodeId exists(NodeId f, std::uint32_t level);
  NodeId random(NodeId f, std::uint32_t level, double p);
  NodeId sign(NodeId f, std::uint32_t level);
  NodeId restrict(NodeId f, std::uint32_t level, bool value);

 private:
  enum class OpCode : std::uint8_t { Apply, Exists, Random, Sign, Restrict };

  struct NodeKey {
    std::uint32_t level;
    NodeId lo, hi;
    bool operator==(const NodeKey&) const = default;
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const noexcept;
  };
  struct CacheKey {
    OpCode code;
    std::uint8_t sub;
    NodeId a, b;
    std::uint64_t extra;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const noexcept;
  };

  void tick();
  NodeId project(OpCode code, NodeId f, std::uint32_t level, double p);
  NodeId combine_random(NodeId lo, NodeId hi, double p);

  VarOrder order_;
  std::vector<Node> nodes_;
  std::unordered_map<NodeKey, NodeId, NodeKeyHash> unique_;
  std::unordered_map<std::uint64_t, NodeId> terminals_;
  std::unordered_map<CacheKey, NodeId, CacheKeyHash> cache_;
  std::size_t node_limit_ = 0;
  std::stop_token stop_;
  std::uint32_t ticks_ = 0;
};

/* the algebra ============================================================== */

/// Throws std::invalid_argument for non-finite c.
PbFunc constant(DiagramStore& store, double c);
/// 1 where the clause is satisfied, 0 elsewhere. The empty clause gives constant(0).
PbFunc clause_func(DiagramStore& store, const Clause& clause);
PbFunc join(PbFunc f, PbFunc g);
PbFunc exists_project(PbFunc f, Variable x);
/// Throws std::invalid_argument unless 0 <= p <= 1.
PbFunc rand_project(PbFunc f, Variable x, double p);
DsgnFunc dsgn(PbFunc f, Variable x);
/// Throws std::invalid_argument when tau misses a support variable.
double evaluate(PbFunc f, const Assignment& tau);
/// Ascending by id.
std::vector<Variable> support(PbFunc f);

/* utilities ================================================================ */

PbFunc apply(BinaryOp op, PbFunc f, PbFunc g);
PbFunc cofactor(PbFunc f, Variable x, bool value);
/// cond must be 0/1-valued; returns cond ? a : b pointwise.
PbFunc ite(PbFunc cond, PbFunc a, PbFunc b);
/// values[mask] is the value where vars[i] = (mask >> i) & 1.
PbFunc from_table(DiagramStore& store, std::span<const Variable> vars, std::span<const double> values);

bool is_constant(PbFunc f);
double constant_value(PbFunc f);
double max_value(PbFunc f);
double min_value(PbFunc f);
/// max over all points of |f - g|.
double max_abs_diff(PbFunc f, PbFunc g);
/// Reachable nodes, terminals included.
std::size_t dag_size(PbFunc f);

struct DiagramProfile {
  std::size_t nodes = 0;
  std::size_t support = 0;
};
/// dag_size and support size in one traversal.
DiagramProfile profile(PbFunc f);
/// Distinct reachable terminal values, ascending.
std::vector<double> terminal_values(PbFunc f);

/// Graphviz rendering; solid edges assign 1, dashed edges assign 0.
std::string to_dot(PbFunc f, const std::string& name = "f");

}  // namespace dper
