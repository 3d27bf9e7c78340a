#include "dper/pbf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace dper {

/* class VarOrder =========================================================== */

VarOrder::VarOrder(std::vector<Variable> top_to_bottom) : vars_(std::move(top_to_bottom)) {
  int max_id = 0;
  for (Variable v : vars_) {
    if (v.id <= 0) {
      throw std::invalid_argument("variable order contains non-positive id " + std::to_string(v.id));
    }
    max_id = std::max(max_id, v.id);
  }
  levels_.assign(static_cast<std::size_t>(max_id) + 1, kAbsent);
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    std::uint32_t& slot = levels_[vars_[i].id];
    if (slot != kAbsent) {
      throw std::invalid_argument("variable " + std::to_string(vars_[i].id) + " appears twice in the order");
    }
    slot = static_cast<std::uint32_t>(i);
  }
}

VarOrder VarOrder::natural(int num_vars) {
  std::vector<Variable> vars;
  for (int id = 1; id <= num_vars; ++id) {
    vars.emplace_back(id);
  }
  return VarOrder(std::move(vars));
}

std::uint32_t VarOrder::level(Variable v) const {
  if (!contains(v)) {
    throw std::out_of_range("variable " + std::to_string(v.id) + " is not in the diagram order");
  }
  return levels_[v.id];
}

/* class Assignment ========================================================= */

Assignment::Assignment(std::initializer_list<std::pair<Variable, bool>> entries) {
  for (const auto& [v, b] : entries) {
    set(v, b);
  }
}

void Assignment::set(Variable v, bool value) {
  if (v.id < 0) {
    throw std::invalid_argument("negative variable id");
  }
  if (static_cast<std::size_t>(v.id) >= values_.size()) {
    values_.resize(static_cast<std::size_t>(v.id) + 1, -1);
  }
  if (values_[v.id] < 0) {
    ++count_;
  }
  values_[v.id] = value ? 1 : 0;
}

void Assignment::erase(Variable v) {
  if (contains(v)) {
    values_[v.id] = -1;
    --count_;
  }
}

std::optional<bool> Assignment::get(Variable v) const {
  int value = lookup(v);
  if (value < 0) {
    return std::nullopt;
  }
  return value == 1;
}

bool Assignment::at(Variable v) const {
  int value = lookup(v);
  if (value < 0) {
    throw std::out_of_range("variable " + std::to_string(v.id) + " is unassigned");
  }
  return value == 1;
}

std::vector<std::pair<Variable, bool>> Assignment::entries() const {
  std::vector<std::pair<Variable, bool>> out;
  for (std::size_t id = 0; id < values_.size(); ++id) {
    if (values_[id] >= 0) {
      out.emplace_back(Variable(static_cast<int>(id)), values_[id] == 1);
    }
  }
  return out;
}

std::vector<int> Assignment::literals() const {
  std::vector<int> out;
  for (const auto& [v, b] : entries()) {
    out.push_back(b ? v.id : -v.id);
  }
  return out;
}

/* class DiagramStore ======================================================= */

namespace {

std::size_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<std::size_t>(x ^ (x >> 31));
}

bool commutative(BinaryOp op) {
  return op == BinaryOp::Mul || op == BinaryOp::Add || op == BinaryOp::Max || op == BinaryOp::Min ||
         op == BinaryOp::AbsDiff;
}

double eval_op(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Max: return std::max(a, b);
    case BinaryOp::Min: return std::min(a, b);
    case BinaryOp::Ge: return a >= b ? 1.0 : 0.0;
    case BinaryOp::AbsDiff: return std::abs(a - b);
  }
  return 0;
}

}  // namespace

std::size_t DiagramStore::NodeKeyHash::operator()(const NodeKey& k) const noexcept {
  return mix((static_cast<std::uint64_t>(k.level) << 40) ^ (static_cast<std::uint64_t>(k.lo) << 20) ^ k.hi ^
             (static_cast<std::uint64_t>(k.hi) << 44));
}

std::size_t DiagramStore::CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  std::uint64_t h = (static_cast<std::uint64_t>(k.code) << 8) | k.sub;
  h = mix(h ^ (static_cast<std::uint64_t>(k.a) << 32 | k.b));
  return mix(h ^ k.extra);
}

DiagramStore::DiagramStore(VarOrder order) : order_(std::move(order)) {
  terminal(0.0);
  terminal(1.0);
}

void DiagramStore::tick() {
  if ((++ticks_ & 0xFFFu) == 0 && stop_.stop_requested()) {
    throw Cancelled();
  }
}

NodeId DiagramStore::terminal(double value) {
  if (!std::isfinite(value)) {
    throw std::overflow_error("non-finite diagram terminal");
  }
  if (value == 0) {
    value = 0.0;  // merge -0 into +0
  }
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  auto it = terminals_.find(bits);
  if (it != terminals_.end()) {
    return it->second;
  }
  if (node_limit_ != 0 && nodes_.size() >= node_limit_) {
    throw ResourceError("diagram node limit of " + std::to_string(node_limit_) + " exceeded");
  }
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({kTerminal, 0, 0, value});
  terminals_.emplace(bits, id);
  return id;
}

NodeId DiagramStore::make(std::uint32_t level, NodeId lo, NodeId hi) {
  if (lo == hi) {
    return lo;
  }
  NodeKey key{level, lo, hi};
  auto it = unique_.find(key);
  if (it != unique_.end()) {
    return it->second;
  }
  tick();
  if (node_limit_ != 0 && nodes_.size() >= node_limit_) {
    throw ResourceError("diagram node limit of " + std::to_string(node_limit_) + " exceeded");
  }
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({level, lo, hi, 0.0});
  unique_.emplace(key, id);
  return id;
}

NodeId DiagramStore::apply(BinaryOp op, NodeId a, NodeId b) {
  const Node na = nodes_[a];
  const Node nb = nodes_[b];
  if (na.level == kTerminal && nb.level == kTerminal) {
    return terminal(eval_op(op, na.value, nb.value));
  }
  switch (op) {
    case BinaryOp::Mul:
      if ((na.level == kTerminal && na.value == 0) || (nb.level == kTerminal && nb.value == 0)) {
        return terminal(0.0);
      }
      if (na.level == kTerminal && na.value == 1) {
        return b;
      }
      if (nb.level == kTerminal && nb.value == 1) {
        return a;
      }
      break;
    case BinaryOp::Max:
    case BinaryOp::Min:
      if (a == b) {
        return a;
      }
      break;
    case BinaryOp::Ge:
      if (a == b) {
        return terminal(1.0);
      }
      break;
    case BinaryOp::Sub:
    case BinaryOp::AbsDiff:
      if (a == b) {
        return terminal(0.0);
      }
      break;
    default:
      break;
  }
  if (commutative(op) && b < a) {
    std::swap(a, b);
  }
  CacheKey key{OpCode::Apply, static_cast<std::uint8_t>(op), a, b, 0};
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  tick();
  const Node& fa = nodes_[a];
  const Node& fb = nodes_[b];
  std::uint32_t level = std::min(fa.level, fb.level);
  NodeId a0 = fa.level == level ? fa.lo : a;
  NodeId a1 = fa.level == level ? fa.hi : a;
  NodeId b0 = fb.level == level ? fb.lo : b;
  NodeId b1 = fb.level == level ? fb.hi : b;
  NodeId lo = apply(op, a0, b0);
  NodeId hi = apply(op, a1, b1);
  NodeId result = make(level, lo, hi);
  cache_.emplace(key, result);
  return result;
}

NodeId DiagramStore::combine_random(NodeId lo, NodeId hi, double p) {
  if (lo == hi) {
    return lo;
  }
  const Node n0 = nodes_[lo];
  const Node n1 = nodes_[hi];
  if (n0.level == kTerminal && n1.level == kTerminal) {
    return terminal(p * n1.value + (1 - p) * n0.value);
  }
  CacheKey key{OpCode::Random, 1, lo, hi, std::bit_cast<std::uint64_t>(p)};
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  tick();
  std::uint32_t level = std::min(n0.level, n1.level);
  NodeId lo0 = n0.level == level ? n0.lo : lo;
  NodeId lo1 = n0.level == level ? n0.hi : lo;
  NodeId hi0 = n1.level == level ? n1.lo : hi;
  NodeId hi1 = n1.level == level ? n1.hi : hi;
  NodeId r0 = combine_random(lo0, hi0, p);
  NodeId r1 = combine_random(lo1, hi1, p);
  NodeId result = make(level, r0, r1);
  cache_.emplace(key, result);
  return result;
}

NodeId DiagramStore::project(OpCode code, NodeId f, std::uint32_t level, double p) {
  const Node n = nodes_[f];
  if (n.level == kTerminal || n.level > level) {
    return f;  // variable absent below this point
  }
  if (n.level == level) {
    return code == OpCode::Exists ? apply(BinaryOp::Max, n.lo, n.hi) : combine_random(n.lo, n.hi, p);
  }
  CacheKey key{code, 0, f, level, code == OpCode::Random ? std::bit_cast<std::uint64_t>(p) : 0};
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  tick();
  NodeId lo = project(code, n.lo, level, p);
  NodeId hi = project(code, n.hi, level, p);
  NodeId result = make(n.level, lo, hi);
  cache_.emplace(key, result);
  return result;
}

NodeId DiagramStore::exists(NodeId f, std::uint32_t level) {
  return project(OpCode::Exists, f, level, 0);
}

NodeId DiagramStore::random(NodeId f, std::uint32_t level, double p) {
  return project(OpCode::Random, f, level, p);
}

NodeId DiagramStore::sign(NodeId f, std::uint32_t level) {
  const Node n = nodes_[f];
  if (n.level == kTerminal || n.level > level) {
    return terminal(1.0);  // equal cofactors: the tie goes to 1
  }
  if (n.level == level) {
    return apply(BinaryOp::Ge, n.hi, n.lo);
  }
  CacheKey key{OpCode::Sign, 0, f, level, 0};
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  tick();
  NodeId lo = sign(n.lo, level);
  NodeId hi = sign(n.hi, level);
  NodeId result = make(n.level, lo, hi);
  cache_.emplace(key, result);
  return result;
}

NodeId DiagramStore::restrict(NodeId f, std::uint32_t level, bool value) {
  const Node n = nodes_[f];
  if (n.level == kTerminal || n.level > level) {
    return f;
  }
  if (n.level == level) {
    return value ? n.hi : n.lo;
  }
  CacheKey key{OpCode::Restrict, static_cast<std::uint8_t>(value), f, level, 0};
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    return it->second;
  }
  NodeId lo = restrict(n.lo, level, value);
  NodeId hi = restrict(n.hi, level, value);
  NodeId result = make(n.level, lo, hi);
  cache_.emplace(key, result);
  return result;
}

/* the algebra ============================================================== */

namespace {

DiagramStore& same_store(PbFunc f, PbFunc g) {
  if (!f.valid() || f.store() != g.store()) {
    throw OrderMismatch();
  }
  return *f.store();
}

DiagramStore& store_of(PbFunc f) {
  if (!f.valid()) {
    throw std::invalid_argument("null diagram handle");
  }
  return *f.store();
}

template <typename Visit>
void for_each_node(PbFunc f, Visit&& visit) {
  const DiagramStore& store = store_of(f);
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> todo{f.id()};
  while (!todo.empty()) {
    NodeId id = todo.back();
    todo.pop_back();
    if (!seen.insert(id).second) {
      continue;
    }
    const DiagramStore::Node& n = store.node(id);
    visit(id, n);
    if (n.level != DiagramStore::kTerminal) {
      todo.push_back(n.lo);
      todo.push_back(n.hi);
    }
  }
}

}  // namespace

PbFunc constant(DiagramStore& store, double c) {
  if (!std::isfinite(c)) {
    throw std::invalid_argument("constant must be finite");
  }
  return {&store, store.terminal(c)};
}

PbFunc clause_func(DiagramStore& store, const Clause& clause) {
  std::vector<std::pair<std::uint32_t, bool>> lits;
  for (const Literal& lit : clause.literals) {
    lits.emplace_back(store.order().level(lit.var), lit.positive);
  }
  std::sort(lits.begin(), lits.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i].first == lits[i - 1].first) {
      throw std::invalid_argument("clause repeats a variable");
    }
  }
  NodeId one = store.terminal(1.0);
  NodeId result = store.terminal(0.0);
  for (const auto& [level, positive] : lits) {
    result = positive ? store.make(level, result, one) : store.make(level, one, result);
  }
  return {&store, result};
}

PbFunc join(PbFunc f, PbFunc g) {
  return apply(BinaryOp::Mul, f, g);
}

PbFunc exists_project(PbFunc f, Variable x) {
  DiagramStore& store = store_of(f);
  if (!store.order().contains(x)) {
    return f;
  }
  return {&store, store.exists(f.id(), store.order().level(x))};
}

PbFunc rand_project(PbFunc f, Variable x, double p) {
  if (!(p >= 0 && p <= 1)) {
    throw std::invalid_argument("probability outside [0,1]");
  }
  DiagramStore& store = store_of(f);
  if (!store.order().contains(x)) {
    return f;
  }
  return {&store, store.random(f.id(), store.order().level(x), p)};
}

DsgnFunc dsgn(PbFunc f, Variable x) {
  DiagramStore& store = store_of(f);
  if (!store.order().contains(x)) {
    return {x, constant(store, 1.0)};
  }
  return {x, {&store, store.sign(f.id(), store.order().level(x))}};
}

double evaluate(PbFunc f, const Assignment& tau) {
  const DiagramStore& store = store_of(f);
  NodeId id = f.id();
  while (!store.is_terminal(id)) {
    const DiagramStore::Node& n = store.node(id);
    Variable v = store.order().at(n.level);
    std::optional<bool> value = tau.get(v);
    if (!value) {
      throw std::invalid_argument("assignment misses support variable " + std::to_string(v.id));
    }
    id = *value ? n.hi : n.lo;
  }
  return store.node(id).value;
}

std::vector<Variable> support(PbFunc f) {
  const DiagramStore& store = store_of(f);
  std::vector<std::uint32_t> levels;
  for_each_node(f, [&](NodeId, const DiagramStore::Node& n) {
    if (n.level != DiagramStore::kTerminal) {
      levels.push_back(n.level);
    }
  });
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<Variable> vars;
  for (std::uint32_t level : levels) {
    vars.push_back(store.order().at(level));
  }
  std::sort(vars.begin(), vars.end());
  return vars;
}

/* utilities ================================================================ */

PbFunc apply(BinaryOp op, PbFunc f, PbFunc g) {
  DiagramStore& store = same_store(f, g);
  return {&store, store.apply(op, f.id(), g.id())};
}

PbFunc cofactor(PbFunc f, Variable x, bool value) {
  DiagramStore& store = store_of(f);
  if (!store.order().contains(x)) {
    return f;
  }
  return {&store, store.restrict(f.id(), store.order().level(x), value)};
}

PbFunc ite(PbFunc cond, PbFunc a, PbFunc b) {
  DiagramStore& store = same_store(cond, a);
  same_store(cond, b);
  PbFunc not_cond = apply(BinaryOp::Sub, constant(store, 1.0), cond);
  return apply(BinaryOp::Add, join(cond, a), join(not_cond, b));
}

PbFunc from_table(DiagramStore& store, std::span<const Variable> vars, std::span<const double> values) {
  if (vars.size() >= 31 || values.size() != (std::size_t{1} << vars.size())) {
    throw std::invalid_argument("truth table size must be 2^|vars|");
  }
  // positions of vars sorted top to bottom
  std::vector<std::size_t> by_level(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    by_level[i] = i;
  }
  std::sort(by_level.begin(), by_level.end(), [&](std::size_t a, std::size_t b) {
    return store.order().level(vars[a]) < store.order().level(vars[b]);
  });
  for (std::size_t i = 1; i < by_level.size(); ++i) {
    if (vars[by_level[i]] == vars[by_level[i - 1]]) {
      throw std::invalid_argument("truth table repeats a variable");
    }
  }
  auto build = [&](auto&& self, std::size_t depth, std::size_t mask) -> NodeId {
    if (depth == by_level.size()) {
      return store.terminal(values[mask]);
    }
    std::size_t bit = std::size_t{1} << by_level[depth];
    NodeId lo = self(self, depth + 1, mask);
    NodeId hi = self(self, depth + 1, mask | bit);
    return store.make(store.order().level(vars[by_level[depth]]), lo, hi);
  };
  return {&store, build(build, 0, 0)};
}

bool is_constant(PbFunc f) {
  return store_of(f).is_terminal(f.id());
}

double constant_value(PbFunc f) {
  if (!is_constant(f)) {
    throw std::invalid_argument("diagram is not constant");
  }
  return f.store()->node(f.id()).value;
}

std::vector<double> terminal_values(PbFunc f) {
  std::vector<double> out;
  for_each_node(f, [&](NodeId, const DiagramStore::Node& n) {
    if (n.level == DiagramStore::kTerminal) {
      out.push_back(n.value);
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

double max_value(PbFunc f) {
  return terminal_values(f).back();
}

double min_value(PbFunc f) {
  return terminal_values(f).front();
}

double max_abs_diff(PbFunc f, PbFunc g) {
  return max_value(apply(BinaryOp::AbsDiff, f, g));
}

std::size_t dag_size(PbFunc f) {
  std::size_t count = 0;
  for_each_node(f, [&](NodeId, const DiagramStore::Node&) { ++count; });
  return count;
}

DiagramProfile profile(PbFunc f) {
  DiagramProfile out;
  std::unordered_set<std::uint32_t> levels;
  for_each_node(f, [&](NodeId, const DiagramStore::Node& n) {
    ++out.nodes;
    if (n.level != DiagramStore::kTerminal) {
      levels.insert(n.level);
    }
  });
  out.support = levels.size();
  return out;
}

std::string to_dot(PbFunc f, const std::string& name) {
  const DiagramStore& store = store_of(f);
  std::ostringstream out;
  out << "digraph " << name << " {\n";
  for_each_node(f, [&](NodeId id, const DiagramStore::Node& n) {
    if (n.level == DiagramStore::kTerminal) {
      out << "  n" << id << " [shape=box,label=\"" << n.value << "\"];\n";
    }
    else {
      out << "  n" << id << " [shape=ellipse,label=\"x" << store.order().at(n.level).id << "\"];\n";
      out << "  n" << id << " -> n" << n.hi << ";\n";
      out << "  n" << id << " -> n" << n.lo << " [style=dashed];\n";
    }
  });
  out << "}\n";
  return out.str();
}

}  // namespace dper
