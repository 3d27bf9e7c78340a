#include "dper/planner.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "dper/pbf.hpp"

namespace dper {

namespace {

std::string describe(const std::vector<TreeViolation>& violations) {
  std::string out = "invalid project-join tree:";
  for (const TreeViolation& v : violations) {
    out += " [" + std::to_string(v.criterion) + "] " + v.message + ";";
  }
  return out;
}

std::string ids(const std::vector<int>& nodes) {
  std::string out;
  for (int id : nodes) {
    out += (out.empty() ? "" : ",") + std::to_string(id);
  }
  return out;
}

}  // namespace

TreeError::TreeError(std::vector<TreeViolation> violations)
    : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

Heuristic parse_heuristic(std::string_view name) {
  if (name == "min-fill") {
    return Heuristic::MinFill;
  }
  if (name == "min-degree") {
    return Heuristic::MinDegree;
  }
  if (name == "lex" || name == "lexicographic") {
    return Heuristic::Lexicographic;
  }
  throw std::invalid_argument("unknown heuristic '" + std::string(name) + "'");
}

std::string_view heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::MinFill: return "min-fill";
    case Heuristic::MinDegree: return "min-degree";
    case Heuristic::Lexicographic: return "lex";
  }
  return "?";
}

/* elimination orders ======================================================= */

namespace {

std::size_t fill_in(const Graph& g, Variable v) {
  const std::set<Variable>& nbrs = g.neighbors(v);
  std::size_t missing = 0;
  for (auto i = nbrs.begin(); i != nbrs.end(); ++i) {
    for (auto j = std::next(i); j != nbrs.end(); ++j) {
      if (!g.has_edge(*i, *j)) {
        ++missing;
      }
    }
  }
  return missing;
}

void eliminate(Graph& g, Variable v) {
  std::vector<Variable> nbrs(g.neighbors(v).begin(), g.neighbors(v).end());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
      g.add_edge(nbrs[i], nbrs[j]);
    }
  }
  g.remove_vertex(v);
}

}  // namespace

std::vector<Variable> elimination_order(const Graph& g, const std::set<Variable>& exist,
                                        const std::set<Variable>& random, Heuristic h, std::uint64_t seed,
                                        bool randomize_ties, std::stop_token stop) {
  Graph work = g;
  for (Variable v : exist) {
    work.add_vertex(v);
  }
  for (Variable v : random) {
    work.add_vertex(v);
  }
  std::mt19937_64 rng(seed);
  std::vector<Variable> order;
  order.reserve(exist.size() + random.size());

  for (const std::set<Variable>* block : {&random, &exist}) {
    std::set<Variable> remaining = *block;
    while (!remaining.empty()) {
      if (stop.stop_requested()) {
        throw Cancelled();
      }
      std::vector<Variable> best;
      std::size_t best_score = SIZE_MAX;
      for (Variable v : remaining) {
        std::size_t score = 0;
        if (h == Heuristic::MinFill) {
          score = fill_in(work, v);
        }
        else if (h == Heuristic::MinDegree) {
          score = work.neighbors(v).size();
        }
        if (score < best_score) {
          best_score = score;
          best.assign(1, v);
        }
        else if (score == best_score) {
          best.push_back(v);
        }
        if (h == Heuristic::Lexicographic) {
          break;  // set iteration is ascending
        }
      }
      Variable pick = best.front();
      if (randomize_ties && best.size() > 1) {
        pick = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
      }
      order.push_back(pick);
      eliminate(work, pick);
      remaining.erase(pick);
    }
  }
  return order;
}

/* bucket elimination ======================================================= */

PjTree build_graded_tree(const Problem& p, std::span<const Variable> order) {
  std::map<Variable, std::size_t> position;
  bool seen_exist = false;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Variable v = order[i];
    if (!position.emplace(v, i).second) {
      throw std::invalid_argument("elimination order repeats variable " + std::to_string(v.id));
    }
    if (p.is_exist(v)) {
      seen_exist = true;
    }
    else if (p.is_random(v)) {
      if (seen_exist) {
        throw std::invalid_argument("elimination order puts randomized variable " + std::to_string(v.id) +
                                    " after an existential variable");
      }
    }
    else {
      throw std::invalid_argument("elimination order contains unquantified variable " + std::to_string(v.id));
    }
  }

  struct Pending {
    int node;
    std::set<Variable> vars;
  };
  PjTree t;
  std::vector<std::vector<Pending>> buckets(order.size());
  std::vector<Pending> finished;

  auto place = [&](Pending item) {
    if (item.vars.empty()) {
      finished.push_back(std::move(item));
      return;
    }
    std::size_t earliest = SIZE_MAX;
    for (Variable v : item.vars) {
      auto it = position.find(v);
      if (it == position.end()) {
        throw std::invalid_argument("elimination order misses clause variable " + std::to_string(v.id));
      }
      earliest = std::min(earliest, it->second);
    }
    buckets[earliest].push_back(std::move(item));
  };

  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    PjNode leaf;
    leaf.id = static_cast<int>(t.nodes.size());
    leaf.leaf = true;
    leaf.clause = static_cast<int>(i);
    t.nodes.push_back(leaf);
    std::vector<Variable> vars = p.clauses[i].vars();
    place({leaf.id, std::set<Variable>(vars.begin(), vars.end())});
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    std::vector<Pending> bucket = std::move(buckets[i]);
    if (bucket.empty()) {
      continue;  // variable occurs in no clause
    }
    Variable x = order[i];
    Grade grade = p.is_exist(x) ? Grade::X : Grade::Y;
    PjNode* single = bucket.size() == 1 ? &t.nodes[bucket[0].node] : nullptr;
    if (single != nullptr && !single->leaf && single->grade == grade) {
      single->projected.push_back(x);
      bucket[0].vars.erase(x);
      place(std::move(bucket[0]));
      continue;
    }
    PjNode node;
    node.id = static_cast<int>(t.nodes.size());
    node.grade = grade;
    node.projected.push_back(x);
    std::set<Variable> vars;
    for (const Pending& child : bucket) {
      node.children.push_back(child.node);
      vars.insert(child.vars.begin(), child.vars.end());
    }
    vars.erase(x);
    t.nodes.push_back(node);
    place({node.id, std::move(vars)});
  }

  if (finished.size() == 1 && !t.nodes[finished[0].node].leaf) {
    t.root = finished[0].node;
  }
  else {
    PjNode root;
    root.id = static_cast<int>(t.nodes.size());
    root.grade = Grade::X;
    for (const Pending& item : finished) {
      root.children.push_back(item.node);
    }
    t.nodes.push_back(root);
    t.root = root.id;
  }
  for (PjNode& node : t.nodes) {
    std::sort(node.projected.begin(), node.projected.end());
  }
  return t;
}

PjTree plan(const Problem& p, const PlanOptions& options, std::stop_token stop) {
  std::vector<Variable> order = elimination_order(primal_graph(p), p.exist, p.random, options.heuristic, options.seed,
                                                  options.randomize_ties, stop);
  return build_graded_tree(p, order);
}

/* validation =============================================================== */

namespace {

/// Parent of each node, or -1. Empty when the structure is broken.
std::vector<int> parents_or_report(const PjTree& t, const Problem& p, std::vector<TreeViolation>& out) {
  const int n = static_cast<int>(t.nodes.size());
  std::size_t before = out.size();
  auto report = [&](std::vector<int> nodes, std::string message) {
    out.push_back({0, std::move(nodes), std::move(message)});
  };
  if (t.root < 0 || t.root >= n) {
    report({t.root}, "root id out of range");
    return {};
  }
  std::vector<int> parent(n, -1);
  std::vector<int> leaf_of(p.clauses.size(), -1);
  for (int id = 0; id < n; ++id) {
    const PjNode& node = t.nodes[id];
    if (node.id != id) {
      report({id}, "node stored at index " + std::to_string(id) + " has id " + std::to_string(node.id));
    }
    if (node.leaf) {
      if (!node.children.empty() || !node.projected.empty()) {
        report({id}, "leaf " + std::to_string(id) + " has children or projected variables");
      }
      if (node.clause < 0 || node.clause >= static_cast<int>(p.clauses.size())) {
        report({id}, "leaf " + std::to_string(id) + " references clause " + std::to_string(node.clause) +
                         " outside 0.." + std::to_string(static_cast<int>(p.clauses.size()) - 1));
      }
      else if (leaf_of[node.clause] >= 0) {
        report({leaf_of[node.clause], id}, "clause " + std::to_string(node.clause) + " has two leaves");
      }
      else {
        leaf_of[node.clause] = id;
      }
      continue;
    }
    if (node.children.empty() && !(id == t.root && p.clauses.empty())) {
      report({id}, "internal node " + std::to_string(id) + " has no children");
    }
    for (int child : node.children) {
      if (child < 0 || child >= n) {
        report({id}, "node " + std::to_string(id) + " has out-of-range child " + std::to_string(child));
      }
      else if (child == t.root) {
        report({id, child}, "root " + std::to_string(child) + " is a child of " + std::to_string(id));
      }
      else if (parent[child] >= 0) {
        report({parent[child], id, child}, "node " + std::to_string(child) + " has two parents");
      }
      else {
        parent[child] = id;
      }
    }
  }
  for (std::size_t c = 0; c < leaf_of.size(); ++c) {
    if (leaf_of[c] < 0) {
      report({}, "clause " + std::to_string(c) + " has no leaf");
    }
  }
  if (out.size() != before) {
    return {};
  }
  // with unique parents, every node reaches the root iff the graph is a tree
  for (int id = 0; id < n; ++id) {
    int cur = id;
    int steps = 0;
    while (cur != t.root && cur >= 0 && steps <= n) {
      cur = parent[cur];
      ++steps;
    }
    if (cur != t.root) {
      report({id}, "node " + std::to_string(id) + " is not connected to the root");
    }
  }
  if (out.size() != before) {
    return {};
  }
  return parent;
}

}  // namespace

std::vector<TreeViolation> tree_violations(const PjTree& t, const Problem& p) {
  std::vector<TreeViolation> out;
  std::vector<int> parent = parents_or_report(t, p, out);
  if (!out.empty()) {
    return out;
  }

  // criterion 1: the projected sets partition the clause variables
  std::set<Variable> clause_vars = p.clause_vars();
  std::map<Variable, int> projected_at;
  for (const PjNode& node : t.nodes) {
    for (Variable x : node.projected) {
      auto [it, fresh] = projected_at.emplace(x, node.id);
      if (!fresh) {
        out.push_back({1, {it->second, node.id}, "variable " + std::to_string(x.id) + " projected at nodes " +
                                                       ids({it->second, node.id})});
      }
      if (!clause_vars.contains(x)) {
        out.push_back({1, {node.id}, "node " + std::to_string(node.id) + " projects variable " +
                                         std::to_string(x.id) + " which occurs in no clause"});
      }
    }
  }
  for (Variable x : clause_vars) {
    if (!projected_at.contains(x)) {
      out.push_back({1, {}, "variable " + std::to_string(x.id) + " is never projected"});
    }
  }

  // criterion 2: the node projecting x is an ancestor of every leaf whose clause has x
  for (const PjNode& node : t.nodes) {
    if (!node.leaf) {
      continue;
    }
    std::set<int> ancestors;
    for (int cur = parent[node.id]; cur >= 0; cur = parent[cur]) {
      ancestors.insert(cur);
    }
    for (const Literal& lit : p.clauses[node.clause].literals) {
      auto it = projected_at.find(lit.var);
      if (it != projected_at.end() && !ancestors.contains(it->second)) {
        out.push_back({2, {it->second, node.id}, "variable " + std::to_string(lit.var.id) + " projected at node " +
                                                       std::to_string(it->second) + " but leaf " +
                                                       std::to_string(node.id) + " (clause " +
                                                       std::to_string(node.clause) + ") is not below it"});
      }
    }
  }
  return out;
}

void check_tree(const PjTree& t, const Problem& p) {
  std::vector<TreeViolation> violations = tree_violations(t, p);
  if (!violations.empty()) {
    throw TreeError(std::move(violations));
  }
}

std::vector<TreeViolation> graded_violations(const PjTree& t, const std::set<Variable>& exist,
                                             const std::set<Variable>& random) {
  std::vector<TreeViolation> out;
  // property 1 holds by representation: each internal node carries exactly one grade
  for (const PjNode& node : t.nodes) {
    if (node.leaf) {
      continue;
    }
    const std::set<Variable>& allowed = node.grade == Grade::X ? exist : random;
    for (Variable x : node.projected) {
      if (!allowed.contains(x)) {
        int property = node.grade == Grade::X ? 2 : 3;
        out.push_back({10 + property, {node.id}, "property " + std::to_string(property) + ": node " +
                                                     std::to_string(node.id) + " in I_" +
                                                     (node.grade == Grade::X ? "X" : "Y") + " projects variable " +
                                                     std::to_string(x.id)});
      }
    }
  }
  // property 4: nothing in I_X below a node in I_Y
  for (const PjNode& node : t.nodes) {
    if (node.leaf || node.grade != Grade::Y) {
      continue;
    }
    std::vector<int> todo(node.children.begin(), node.children.end());
    std::size_t guard = 0;
    while (!todo.empty() && guard++ <= t.nodes.size()) {
      int id = todo.back();
      todo.pop_back();
      if (id < 0 || id >= static_cast<int>(t.nodes.size())) {
        continue;
      }
      const PjNode& below = t.nodes[id];
      if (below.leaf) {
        continue;
      }
      if (below.grade == Grade::X) {
        out.push_back({14, {below.id, node.id}, "property 4: node " + std::to_string(below.id) +
                                                    " in I_X is below node " + std::to_string(node.id) + " in I_Y"});
      }
      todo.insert(todo.end(), below.children.begin(), below.children.end());
    }
  }
  return out;
}

void check_graded(const PjTree& t, const std::set<Variable>& exist, const std::set<Variable>& random) {
  std::vector<TreeViolation> violations = graded_violations(t, exist, random);
  if (!violations.empty()) {
    throw TreeError(std::move(violations));
  }
}

/* traversal, width ========================================================= */

std::vector<int> post_order(const PjTree& t) {
  std::vector<int> out;
  if (t.root < 0) {
    return out;
  }
  out.reserve(t.nodes.size());
  std::vector<std::pair<int, std::size_t>> stack{{t.root, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const PjNode& node = t.node(id);
    if (next < node.children.size()) {
      int child = node.children[next++];
      if (stack.size() > t.nodes.size()) {
        throw std::invalid_argument("project-join tree contains a cycle");
      }
      stack.emplace_back(child, 0);
    }
    else {
      out.push_back(id);
      stack.pop_back();
    }
  }
  return out;
}

std::vector<std::set<Variable>> node_vars(const PjTree& t, const Problem& p) {
  std::vector<std::set<Variable>> vars(t.nodes.size());
  for (int id : post_order(t)) {
    const PjNode& node = t.node(id);
    if (node.leaf) {
      for (const Literal& lit : p.clauses.at(node.clause).literals) {
        vars[id].insert(lit.var);
      }
      continue;
    }
    for (int child : node.children) {
      vars[id].insert(vars[child].begin(), vars[child].end());
    }
    for (Variable x : node.projected) {
      vars[id].erase(x);
    }
  }
  return vars;
}

int width(const PjTree& t, const Problem& p) {
  std::vector<std::set<Variable>> vars = node_vars(t, p);
  std::size_t best = 0;
  for (const PjNode& node : t.nodes) {
    std::set<Variable> involved = vars[node.id];
    involved.insert(node.projected.begin(), node.projected.end());
    best = std::max(best, involved.size());
  }
  return static_cast<int>(best);
}

std::vector<Variable> projection_order(const PjTree& t) {
  std::vector<Variable> out;
  for (int id : post_order(t)) {
    std::vector<Variable> projected = t.node(id).projected;
    std::sort(projected.begin(), projected.end());
    out.insert(out.end(), projected.begin(), projected.end());
  }
  return out;
}

/* tree files =============================================================== */

std::string write_tree(const PjTree& t, const Problem& p) {
  std::ostringstream out;
  out << "pjt " << t.nodes.size() << " " << p.clauses.size() << " " << p.num_vars << "\n";
  for (int id : post_order(t)) {
    const PjNode& node = t.node(id);
    if (node.leaf) {
      out << "l " << id + 1 << " " << node.clause + 1 << "\n";
      continue;
    }
    out << "i " << id + 1 << " " << (node.grade == Grade::X ? 'x' : 'y');
    for (int child : node.children) {
      out << " " << child + 1;
    }
    out << " |";
    for (Variable x : node.projected) {
      out << " " << x.id;
    }
    out << "\n";
  }
  out << "r " << t.root + 1 << "\n";
  return out.str();
}

PjTree read_tree(std::string_view text, const Problem& p) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  long declared_nodes = -1;
  PjTree t;
  std::vector<bool> defined;
  bool seen_root = false;

  auto fail = [&](const std::string& message) -> void { throw ParseError(line_no, 1, message); };
  auto read_id = [&](std::istringstream& fields, const char* what) {
    long id = 0;
    if (!(fields >> id)) {
      fail(std::string("expected ") + what);
    }
    if (id < 1 || id > declared_nodes) {
      fail(std::string(what) + " " + std::to_string(id) + " outside 1.." + std::to_string(declared_nodes));
    }
    return static_cast<int>(id - 1);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind) || kind == "c") {
      continue;
    }
    if (seen_root) {
      fail("content after root line");
    }
    if (kind == "pjt") {
      long clauses = 0;
      long vars = 0;
      if (declared_nodes >= 0 || !(fields >> declared_nodes >> clauses >> vars) || declared_nodes < 1) {
        fail("malformed header, expected 'pjt <num_pjnodes> <num_clauses> <num_vars>'");
      }
      if (clauses != static_cast<long>(p.clauses.size()) || vars != p.num_vars) {
        fail("header does not match the problem's clause or variable count");
      }
      t.nodes.resize(static_cast<std::size_t>(declared_nodes));
      defined.assign(static_cast<std::size_t>(declared_nodes), false);
      continue;
    }
    if (declared_nodes < 0) {
      fail("missing 'pjt' header");
    }
    if (kind == "r") {
      t.root = read_id(fields, "root id");
      if (!defined[t.root]) {
        fail("root node is not defined");
      }
      seen_root = true;
      continue;
    }
    if (kind != "l" && kind != "i") {
      fail("unknown line kind '" + kind + "'");
    }
    int id = read_id(fields, "node id");
    if (defined[id]) {
      fail("node " + std::to_string(id + 1) + " defined twice");
    }
    PjNode node;
    node.id = id;
    if (kind == "l") {
      long clause = 0;
      if (!(fields >> clause)) {
        fail("expected clause index");
      }
      if (clause < 1 || clause > static_cast<long>(p.clauses.size())) {
        fail("clause index " + std::to_string(clause) + " outside 1.." + std::to_string(p.clauses.size()));
      }
      node.leaf = true;
      node.clause = static_cast<int>(clause - 1);
    }
    else {
      std::string grade;
      fields >> grade;
      if (grade != "x" && grade != "y") {
        fail("expected grade x or y");
      }
      node.grade = grade == "x" ? Grade::X : Grade::Y;
      std::string token;
      bool bar = false;
      while (fields >> token) {
        if (token == "|") {
          bar = true;
          break;
        }
        std::istringstream one(token);
        int child = read_id(one, "child id");
        if (!defined[child]) {
          fail("child " + std::to_string(child + 1) + " is not defined before its parent");
        }
        node.children.push_back(child);
      }
      if (!bar) {
        fail("missing '|' between children and projected variables");
      }
      long var = 0;
      while (fields >> var) {
        if (var < 1 || var > p.num_vars) {
          fail("projected variable " + std::to_string(var) + " outside 1.." + std::to_string(p.num_vars));
        }
        node.projected.emplace_back(static_cast<int>(var));
      }
      if (!fields.eof()) {
        fail("malformed projected variable list");
      }
    }
    t.nodes[id] = node;
    defined[id] = true;
  }
  if (!seen_root) {
    throw ParseError(line_no, 1, "missing root line");
  }
  for (std::size_t id = 0; id < defined.size(); ++id) {
    if (!defined[id]) {
      throw ParseError(line_no, 1, "node " + std::to_string(id + 1) + " declared but not defined");
    }
  }
  check_tree(t, p);
  check_graded(t, p.exist, p.random);
  return t;
}

}  // namespace dper
