#include "dper/executor.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <set>

namespace dper {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::size_t kCacheClearThreshold = std::size_t{1} << 22;

void note(SolveStats* stats, PbFunc f) {
  if (stats == nullptr) {
    return;
  }
  DiagramProfile prof = profile(f);
  stats->peak_diagram_nodes = std::max(stats->peak_diagram_nodes, prof.nodes);
  stats->max_support = std::max(stats->max_support, prof.support);
}

std::vector<int> subtree_post_order(const PjTree& t, int v) {
  std::vector<int> out;
  std::vector<std::pair<int, std::size_t>> stack{{v, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const PjNode& node = t.node(id);
    if (next < node.children.size()) {
      int child = node.children[next++];
      stack.emplace_back(child, 0);
    }
    else {
      out.push_back(id);
      stack.pop_back();
    }
  }
  return out;
}

template <typename Body>
auto interruptible(SolveStats& stats, const DiagramStore* store, Body&& body) {
  try {
    return body();
  }
  catch (const ResourceError& e) {
    if (store != nullptr) {
      stats.store_nodes = store->num_nodes();
    }
    throw SolveInterrupted(SolveInterrupted::Kind::Resource, e.what(), stats);
  }
  catch (const Cancelled&) {
    if (store != nullptr) {
      stats.store_nodes = store->num_nodes();
    }
    throw SolveInterrupted(SolveInterrupted::Kind::Deadline, "deadline reached", stats);
  }
}

}  // namespace

DebugAssertionError::DebugAssertionError(std::string point, int node, int var, const std::string& detail)
    : std::logic_error("assertion failed at " + point + " (node " + std::to_string(node) + ", variable " +
                       std::to_string(var) + "): " + detail),
      point_(std::move(point)),
      node_(node),
      var_(var) {}

/* valuation ================================================================ */

VarOrder diagram_order(const Problem& p, const PjTree& t) {
  std::vector<Variable> vars;
  std::vector<bool> placed(static_cast<std::size_t>(p.num_vars) + 1, false);
  auto add = [&](Variable v) {
    if (v.id >= 1 && v.id <= p.num_vars && !placed[v.id]) {
      placed[v.id] = true;
      vars.push_back(v);
    }
  };
  try {
    for (Variable v : projection_order(t)) {
      add(v);
    }
  }
  catch (const std::exception&) {
    // malformed tree: fall back to the natural order below
  }
  for (int id = 1; id <= p.num_vars; ++id) {
    add(Variable(id));
  }
  return VarOrder(std::move(vars));
}

PbFunc valuate(const Problem& p, const PjTree& t, int v, DiagramStore& store, DsgnStack& stack, SolveStats* stats) {
  std::vector<PbFunc> values(t.nodes.size());
  for (int id : subtree_post_order(t, v)) {
    if (store.stop_requested()) {
      throw Cancelled();
    }
    const PjNode& node = t.node(id);
    if (node.leaf) {
      values[id] = clause_func(store, p.clauses.at(node.clause));
      note(stats, values[id]);
      continue;
    }
    PbFunc f = constant(store, 1.0);
    for (int child : node.children) {
      f = join(f, values[child]);
      values[child] = PbFunc();
    }
    note(stats, f);
    std::vector<Variable> projected = node.projected;
    std::sort(projected.begin(), projected.end());
    for (Variable x : projected) {
      if (p.is_exist(x)) {
        stack.push_back(dsgn(f, x));
        f = exists_project(f, x);
      }
      else {
        f = rand_project(f, x, p.probability(x));
      }
      note(stats, f);
    }
    values[id] = f;
    if (store.cache_size() > kCacheClearThreshold) {
      store.clear_cache();
    }
  }
  return values[v];
}

Assignment extract_maximizer(const Problem& p, DsgnStack& stack) {
  Assignment tau;
  while (!stack.empty()) {
    DsgnFunc entry = stack.back();
    stack.pop_back();
    if (tau.contains(entry.var)) {
      throw std::logic_error("variable " + std::to_string(entry.var.id) + " has two derivative signs");
    }
    tau.set(entry.var, evaluate(entry.chooser, tau) != 0);
  }
  for (Variable x : p.exist) {
    if (!tau.contains(x)) {
      tau.set(x, false);
    }
  }
  return tau;
}

/* annotated valuation ====================================================== */

namespace {

// Valuation with the invariant [A] = exists_{E∩X} random_{E∩Y} [phi] checked
// at every program point, where E is the set of projected variables and A
// the multiset of active functions.
class AnnotatedSolver {
 public:
  AnnotatedSolver(const Problem& p, const PjTree& t, DiagramStore& store, const SolveOptions& options,
                  SolveStats& stats)
      : p_(p), t_(t), store_(store), tol_(options.debug_tolerance), stats_(stats), visited_(t.nodes.size(), false) {
    try {
      width_ = static_cast<std::size_t>(width(t, p));
    }
    catch (const std::exception&) {
      width_ = SIZE_MAX;  // malformed tree; the structural assertions report it
    }
    phi_ = constant(store, 1.0);
    for (const Clause& clause : p.clauses) {
      PbFunc c = clause_func(store, clause);
      phi_ = join(phi_, c);
      active_.push_back(c);
    }
  }

  SolveResult run() {
    SolveResult result;
    if (t_.root < 0 || t_.root >= static_cast<int>(t_.nodes.size())) {
      fail("structure", t_.root, 0, "root id out of range");
    }
    PbFunc root = valuate(t_.root, 0);

    // all of vars(phi) eliminated; the root valuation is the only active function
    if (eliminated_ != p_.clause_vars()) {
      fail("maximizer-const", t_.root, 0, "some clause variable was never projected");
    }
    if (!is_constant(root)) {
      fail("maximizer-const", t_.root, 0, "root valuation is not constant");
    }
    if (active_.size() != 1 || active_.front() != root) {
      fail("maximizer-const", t_.root, 0, "active set holds functions besides the root valuation");
    }
    result.maximum = constant_value(root);
    stats_.dsgn_entries = stack_.size();

    Assignment tau;
    while (!stack_.empty()) {
      DsgnFunc entry = stack_.back();
      stack_.pop_back();
      Variable x = entry.var;
      if (!p_.is_exist(x) || !eliminated_.contains(x) || tau.contains(x)) {
        fail("maximizer-pop", -1, x.id, "popped variable is not an unassigned eliminated X variable");
      }
      for (Variable v : support(entry.chooser)) {
        if (!tau.contains(v)) {
          fail("maximizer-pop", -1, x.id, "derivative sign depends on unassigned variable " + std::to_string(v.id));
        }
      }
      tau.set(x, evaluate(entry.chooser, tau) != 0);
      eliminated_.erase(x);
      PbFunc g = target();
      double value = evaluate(g, tau);
      double best = max_value(g);
      if (value < best - tol_) {
        fail("maximizer-pop", -1, x.id,
             "partial assignment reaches " + std::to_string(value) + " of " + std::to_string(best));
      }
    }
    for (Variable x : p_.exist) {
      if (!tau.contains(x)) {
        tau.set(x, false);
      }
    }
    result.maximizer = std::move(tau);
    return result;
  }

 private:
  [[noreturn]] void fail(const std::string& point, int node, int var, const std::string& detail) const {
    throw DebugAssertionError(point, node, var, detail);
  }

  PbFunc target() const {
    PbFunc f = phi_;
    for (Variable v : eliminated_) {
      if (p_.is_random(v)) {
        f = rand_project(f, v, p_.probability(v));
      }
    }
    for (Variable v : eliminated_) {
      if (p_.is_exist(v)) {
        f = exists_project(f, v);
      }
    }
    return f;
  }

  void expect_invariant(const std::string& point, int node, int var) const {
    PbFunc product = constant(store_, 1.0);
    for (PbFunc a : active_) {
      product = join(product, a);
    }
    double diff = max_abs_diff(product, target());
    if (diff > tol_) {
      fail(point, node, var, "active product differs from the projected formula by " + std::to_string(diff));
    }
  }

  void remove_active(PbFunc f, int node) {
    auto it = std::find(active_.begin(), active_.end(), f);
    if (it == active_.end()) {
      fail("active-set", node, 0, "function to retire is not active");
    }
    active_.erase(it);
  }

  void check_intermediate(PbFunc f, int node, int var) {
    DiagramProfile prof = profile(f);
    stats_.peak_diagram_nodes = std::max(stats_.peak_diagram_nodes, prof.nodes);
    stats_.max_support = std::max(stats_.max_support, prof.support);
    if (prof.support > width_) {
      fail("support-width", node, var,
           "support " + std::to_string(prof.support) + " exceeds width " + std::to_string(width_));
    }
    std::vector<double> terminals = terminal_values(f);
    if (terminals.front() < 0 || terminals.back() > 1) {
      fail("terminal-range", node, var, "terminal outside [0,1]");
    }
  }

  PbFunc valuate(int v, std::size_t depth) {
    if (v < 0 || v >= static_cast<int>(t_.nodes.size())) {
      fail("structure", v, 0, "node id out of range");
    }
    if (visited_[v] || depth > t_.nodes.size()) {
      fail("structure", v, 0, "node reached twice");
    }
    visited_[v] = true;
    expect_invariant("pre-condition", v, 0);
    const PjNode& node = t_.nodes[v];
    PbFunc f;
    if (node.leaf) {
      if (node.clause < 0 || node.clause >= static_cast<int>(p_.clauses.size())) {
        fail("structure", v, 0, "leaf references a missing clause");
      }
      f = clause_func(store_, p_.clauses[node.clause]);
    }
    else {
      f = constant(store_, 1.0);
      active_.push_back(f);
      for (int child : node.children) {
        PbFunc h = valuate(child, depth + 1);
        PbFunc prev = f;
        f = join(prev, h);
        remove_active(h, v);
        remove_active(prev, v);
        active_.push_back(f);
      }
      check_intermediate(f, v, 0);
      expect_invariant("join-condition", v, 0);

      std::vector<Variable> projected = node.projected;
      std::sort(projected.begin(), projected.end());
      for (Variable x : projected) {
        bool in_x = p_.is_exist(x);
        if (!in_x && !p_.is_random(x)) {
          fail("project-condition", v, x.id, "variable is not quantified");
        }
        if (eliminated_.contains(x)) {
          fail("project-condition", v, x.id, "variable already projected");
        }
        if (in_x != (node.grade == Grade::X)) {
          fail("grade", v, x.id, "variable quantifier disagrees with the node's grade");
        }
        PbFunc prev = f;
        if (in_x) {
          DsgnFunc g = dsgn(prev, x);
          stack_.push_back(g);
          expect_push(g, v);
          f = exists_project(prev, x);
        }
        else {
          f = rand_project(prev, x, p_.probability(x));
        }
        eliminated_.insert(x);
        remove_active(prev, v);
        active_.push_back(f);
        check_intermediate(f, v, x.id);
        expect_invariant("project-condition", v, x.id);
      }
    }
    expect_invariant("post-condition", v, 0);
    return f;
  }

  // Whenever tau maximizes h' = exists_x h, tau extended by the chooser maximizes h,
  // where h = exists_{E∩X} random_{E∩Y} [phi] with x not yet in E.
  void expect_push(const DsgnFunc& g, int node) const {
    Variable x = g.var;
    for (Variable v : support(g.chooser)) {
      if (v == x) {
        fail("maximizer-push", node, x.id, "derivative sign depends on its own variable");
      }
    }
    std::vector<double> chooser_terminals = terminal_values(g.chooser);
    for (double c : chooser_terminals) {
      if (c != 0 && c != 1) {
        fail("maximizer-push", node, x.id, "derivative sign is not Boolean");
      }
    }
    PbFunc h = target();
    PbFunc projected = exists_project(h, x);
    double best = max_value(projected);
    PbFunc is_max = apply(BinaryOp::Ge, projected, constant(store_, best - tol_));
    PbFunc extended = ite(g.chooser, cofactor(h, x, true), cofactor(h, x, false));
    PbFunc shortfall = join(is_max, apply(BinaryOp::Sub, constant(store_, best), extended));
    if (max_value(shortfall) > tol_) {
      fail("maximizer-push", node, x.id, "derivative sign extends a maximizer to a non-maximizer");
    }
  }

  const Problem& p_;
  const PjTree& t_;
  DiagramStore& store_;
  double tol_;
  SolveStats& stats_;
  std::size_t width_ = SIZE_MAX;
  std::vector<bool> visited_;
  PbFunc phi_;
  std::vector<PbFunc> active_;
  std::set<Variable> eliminated_;
  DsgnStack stack_;
};

}  // namespace

/* solvers ================================================================== */

SolveResult solve(const Problem& p, const PjTree& t, const SolveOptions& options) {
  if (options.debug_assert) {
    return debug_assert_mode(p, t, options);
  }
  auto start = Clock::now();
  if (options.validate_tree) {
    check_tree(t, p);
    check_graded(t, p.exist, p.random);
  }
  SolveStats stats;
  stats.width = width(t, p);
  stats.tree_nodes = t.nodes.size();
  DiagramStore store(diagram_order(p, t));
  store.set_node_limit(options.node_limit);
  store.set_stop_token(options.stop);

  SolveResult result = interruptible(stats, &store, [&] {
    SolveResult r;
    DsgnStack stack;
    PbFunc root = valuate(p, t, t.root, store, stack, &stats);
    if (!is_constant(root)) {
      throw std::logic_error("root valuation is not constant");
    }
    r.maximum = constant_value(root);
    stats.dsgn_entries = stack.size();
    r.maximizer = extract_maximizer(p, stack);
    return r;
  });
  stats.store_nodes = store.num_nodes();
  stats.exec_seconds = seconds_since(start);
  result.stats = stats;
  return result;
}

SolveResult debug_assert_mode(const Problem& p, const PjTree& t, SolveOptions options) {
  if (p.exist.size() + p.random.size() > options.debug_var_cap) {
    throw std::length_error("debug assertion mode handles at most " + std::to_string(options.debug_var_cap) +
                            " variables");
  }
  auto start = Clock::now();
  validate(p);
  SolveStats stats;
  stats.tree_nodes = t.nodes.size();
  try {
    stats.width = width(t, p);
  }
  catch (const std::exception&) {
    stats.width = -1;
  }
  DiagramStore store(diagram_order(p, t));
  store.set_node_limit(options.node_limit);
  store.set_stop_token(options.stop);
  SolveResult result = interruptible(stats, &store, [&] { return AnnotatedSolver(p, t, store, options, stats).run(); });
  stats.store_nodes = store.num_nodes();
  stats.exec_seconds = seconds_since(start);
  result.stats = stats;
  return result;
}

SolveResult solve_monolithic(const Problem& p, std::size_t var_cap, const SolveOptions& options) {
  if (p.exist.size() + p.random.size() > var_cap) {
    throw std::length_error("monolithic solve handles at most " + std::to_string(var_cap) + " variables");
  }
  auto start = Clock::now();
  validate(p);
  SolveStats stats;
  DiagramStore store(VarOrder::natural(p.num_vars));
  store.set_node_limit(options.node_limit);
  store.set_stop_token(options.stop);

  SolveResult result = interruptible(stats, &store, [&] {
    PbFunc f = constant(store, 1.0);
    for (const Clause& clause : p.clauses) {
      f = join(f, clause_func(store, clause));
    }
    note(&stats, f);
    for (Variable y : p.random) {
      f = rand_project(f, y, p.probability(y));
      note(&stats, f);
    }
    // f is now a function of X; maximize it one variable at a time
    std::set<Variable> used = p.clause_vars();
    std::vector<Variable> xs;
    for (Variable x : p.exist) {
      if (used.contains(x)) {
        xs.push_back(x);
      }
    }
    std::vector<DsgnFunc> signs(xs.size());
    for (std::size_t i = xs.size(); i-- > 0;) {
      signs[i] = dsgn(f, xs[i]);
      f = exists_project(f, xs[i]);
      note(&stats, f);
    }
    SolveResult r;
    r.maximum = constant_value(f);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r.maximizer.set(xs[i], evaluate(signs[i].chooser, r.maximizer) != 0);
    }
    for (Variable x : p.exist) {
      if (!r.maximizer.contains(x)) {
        r.maximizer.set(x, false);
      }
    }
    stats.dsgn_entries = signs.size();
    return r;
  });
  stats.store_nodes = store.num_nodes();
  stats.exec_seconds = seconds_since(start);
  result.stats = stats;
  return result;
}

}  // namespace dper
