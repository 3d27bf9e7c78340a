#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dper {

/* variables, literals, clauses ============================================= */

/// A propositional variable, 1-based as in DIMACS.
struct Variable {
  int id = 0;

  constexpr Variable() = default;
  constexpr explicit Variable(int id) : id(id) {}

  friend constexpr auto operator<=>(Variable, Variable) = default;
};

struct Literal {
  Variable var;
  bool positive = true;

  /// Signed DIMACS form, e.g. -3 for the negation of variable 3.
  int dimacs() const { return positive ? var.id : -var.id; }
  static Literal from_dimacs(int lit) { return {Variable(lit < 0 ? -lit : lit), lit > 0}; }

  friend constexpr bool operator==(const Literal&, const Literal&) = default;
};

/// A disjunction of literals over distinct variables.
struct Clause {
  std::vector<Literal> literals;

  std::vector<Variable> vars() const;
  bool contains(Variable v) const;
  bool satisfied_by(const std::function<bool(Variable)>& value) const;

  friend bool operator==(const Clause&, const Clause&) = default;
};

/* problems ================================================================= */

/// An exist-random problem: maximize over X the probability that a random
/// assignment of Y (independent, Pr(y = 1) = prob[y]) satisfies the clauses.
struct Problem {
  int num_vars = 0;
  std::vector<Clause> clauses;
  std::set<Variable> exist;
  std::set<Variable> random;
  std::map<Variable, double> prob;

  bool is_exist(Variable v) const { return exist.contains(v); }
  bool is_random(Variable v) const { return random.contains(v); }
  double probability(Variable v) const { return prob.at(v); }

  /// Variables occurring in at least one clause.
  std::set<Variable> clause_vars() const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

/* errors =================================================================== */

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/* parsing ================================================================== */

struct ParseOptions {
  /// Declared variables that are neither quantified nor used join X instead
  /// of being rejected.
  bool free_as_exist = false;
};

Problem parse_problem(std::istream& in, const ParseOptions& options = {});
Problem parse_problem_string(std::string_view text, const ParseOptions& options = {});
Problem parse_problem_file(const std::string& path, const ParseOptions& options = {});

/// Writes the problem in the same line-oriented format parse_problem reads.
std::string serialize_problem(const Problem& p);

/// Every violated invariant, one message each. Empty iff the problem is valid.
std::vector<std::string> problem_violations(const Problem& p);

/// Throws ValidationError listing every violated invariant.
void validate(const Problem& p);

/* primal graph ============================================================= */

/// Undirected graph on variables.
class Graph {
 public:
  void add_vertex(Variable v) { adjacency_[v]; }
  void add_edge(Variable u, Variable v);
  void remove_vertex(Variable v);

  bool has_vertex(Variable v) const { return adjacency_.contains(v); }
  bool has_edge(Variable u, Variable v) const;
  const std::set<Variable>& neighbors(Variable v) const { return adjacency_.at(v); }

  std::size_t num_vertices() const { return adjacency_.size(); }
  std::size_t num_edges() const;
  std::vector<Variable> vertices() const;
  std::vector<std::pair<Variable, Variable>> edges() const;

 private:
  std::map<Variable, std::set<Variable>> adjacency_;
};

/// Vertices are all quantified variables; u-v is an edge iff u != v share a clause.
Graph primal_graph(const Problem& p);

}  // namespace dper
