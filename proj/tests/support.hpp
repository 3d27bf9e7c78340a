#pragma once

// Fixtures and independent reference computations shared by the test binaries.

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "dper/formula.hpp"
#include "dper/generate.hpp"
#include "dper/pbf.hpp"
#include "dper/planner.hpp"

namespace dper::testing {

/// Five clauses over z1..z6; X = {1,3,5}, Y = {2,4,6}, every probability 0.5.
inline Problem worked_example() {
  return parse_problem_string(
      "p cnf 6 5\n"
      "e 1 3 5 0\n"
      "r 0.5 2 4 6 0\n"
      "2 -4 0\n"
      "1 6 0\n"
      "1 0\n"
      "3 5 0\n"
      "-3 -5 0\n");
}

inline PjNode leaf_node(int id, int clause) {
  PjNode n;
  n.id = id;
  n.leaf = true;
  n.clause = clause;
  return n;
}

inline PjNode internal_node(int id, Grade grade, std::vector<int> children, std::vector<int> projected) {
  PjNode n;
  n.id = id;
  n.grade = grade;
  n.children = std::move(children);
  for (int v : projected) {
    n.projected.push_back(Variable(v));
  }
  return n;
}

/// The width-2 graded tree for worked_example(): leaves 0..4 hold clauses
/// 0..4; node 5 projects {2,4}, 6 projects {6} (both Y grade); 7 projects
/// {1}, 8 projects {3,5} and the root 9 projects nothing (all X grade).
inline PjTree worked_example_tree() {
  PjTree t;
  for (int i = 0; i < 5; ++i) {
    t.nodes.push_back(leaf_node(i, i));
  }
  t.nodes.push_back(internal_node(5, Grade::Y, {0}, {2, 4}));
  t.nodes.push_back(internal_node(6, Grade::Y, {1}, {6}));
  t.nodes.push_back(internal_node(7, Grade::X, {5, 6, 2}, {1}));
  t.nodes.push_back(internal_node(8, Grade::X, {3, 4}, {3, 5}));
  t.nodes.push_back(internal_node(9, Grade::X, {7, 8}, {}));
  t.root = 9;
  return t;
}

/// The fuzz family: at most 12 variables and 20 clauses, probabilities from {0.4, 0.5, 0.6}.
inline Problem fuzz_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RandomProblemParams params;
  params.min_vars = 4;
  params.max_vars = 12;
  params.max_clauses = 20;
  params.min_clause_len = 2;
  params.max_clause_len = 4;
  params.exist_fraction = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
  params.probabilities = {0.4, 0.5, 0.6};
  return random_problem(params, rng);
}

/// A dense table over vars: values[mask], bit i of mask is vars[i].
struct Table {
  std::vector<Variable> vars;
  std::vector<double> values;

  double at(const Assignment& tau) const {
    std::size_t mask = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (tau.at(vars[i])) {
        mask |= std::size_t{1} << i;
      }
    }
    return values[mask];
  }
};

/// Random values k/8 for k in 0..8: products and maxima of these stay exact.
inline Table random_dyadic_table(const std::vector<Variable>& vars, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> k(0, 8);
  Table t{vars, std::vector<double>(std::size_t{1} << vars.size())};
  for (double& v : t.values) {
    v = k(rng) / 8.0;
  }
  return t;
}

/// Random subset of 1..n, each id kept with probability keep.
inline std::vector<Variable> random_vars(int n, double keep, std::mt19937_64& rng) {
  std::bernoulli_distribution b(keep);
  std::vector<Variable> out;
  for (int id = 1; id <= n; ++id) {
    if (b(rng)) {
      out.push_back(Variable(id));
    }
  }
  return out;
}

inline PbFunc to_func(DiagramStore& store, const Table& t) {
  return from_table(store, t.vars, t.values);
}

/// Every total assignment over 1..n.
template <typename Fn>
void for_each_assignment(int n, Fn&& fn) {
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Assignment tau;
    for (int i = 0; i < n; ++i) {
      tau.set(Variable(i + 1), ((mask >> i) & 1) != 0);
    }
    fn(tau);
  }
}

inline Assignment with(Assignment tau, Variable v, bool value) {
  tau.set(v, value);
  return tau;
}

/// Projected variables anywhere in the subtree of v.
inline std::set<Variable> subtree_projected(const PjTree& t, int v) {
  std::set<Variable> out;
  std::vector<int> stack{v};
  while (!stack.empty()) {
    const PjNode& n = t.node(stack.back());
    stack.pop_back();
    out.insert(n.projected.begin(), n.projected.end());
    stack.insert(stack.end(), n.children.begin(), n.children.end());
  }
  return out;
}

/// Variables of the clauses under v.
inline std::set<Variable> subtree_clause_vars(const PjTree& t, const Problem& p, int v) {
  std::set<Variable> out;
  std::vector<int> stack{v};
  while (!stack.empty()) {
    const PjNode& n = t.node(stack.back());
    stack.pop_back();
    if (n.leaf) {
      for (Variable x : p.clauses[n.clause].vars()) {
        out.insert(x);
      }
    }
    stack.insert(stack.end(), n.children.begin(), n.children.end());
  }
  return out;
}

/// For every pair of siblings, the projections under one avoid the clause
/// variables under the other.
inline bool siblings_disjoint(const PjTree& t, const Problem& p) {
  for (const PjNode& n : t.nodes) {
    for (int a : n.children) {
      std::set<Variable> projected = subtree_projected(t, a);
      for (int b : n.children) {
        if (a == b) {
          continue;
        }
        for (Variable x : subtree_clause_vars(t, p, b)) {
          if (projected.contains(x)) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace dper::testing
