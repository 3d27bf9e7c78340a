#include "dper/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dper {

/* class Clause ============================================================= */

std::vector<Variable> Clause::vars() const {
  std::vector<Variable> result;
  result.reserve(literals.size());
  for (const Literal& lit : literals) {
    result.push_back(lit.var);
  }
  std::sort(result.begin(), result.end());
  return result;
}

bool Clause::contains(Variable v) const {
  return std::any_of(literals.begin(), literals.end(), [v](const Literal& lit) { return lit.var == v; });
}

bool Clause::satisfied_by(const std::function<bool(Variable)>& value) const {
  for (const Literal& lit : literals) {
    if (value(lit.var) == lit.positive) {
      return true;
    }
  }
  return false;
}

/* class Problem ============================================================ */

std::set<Variable> Problem::clause_vars() const {
  std::set<Variable> result;
  for (const Clause& clause : clauses) {
    for (const Literal& lit : clause.literals) {
      result.insert(lit.var);
    }
  }
  return result;
}

/* errors =================================================================== */

namespace {

std::string locate(int line, int column, const std::string& message) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    if (!out.empty()) {
      out += "; ";
    }
    out += line;
  }
  return out;
}

}  // namespace

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(locate(line, column, message)), line_(line), column_(column) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("invalid problem: " + join_lines(violations)), violations_(std::move(violations)) {}

/* parser =================================================================== */

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    if (i > start) {
      tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
  }
  return tokens;
}

class Parser {
 public:
  explicit Parser(const ParseOptions& options) : options_(options) {}

  Problem run(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      parse_line(line);
    }
    finish();
    return std::move(problem_);
  }

 private:
  [[noreturn]] void fail(int column, const std::string& message) const { throw ParseError(line_no_, column, message); }

  long parse_int(const Token& token) const {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.text.data(), token.text.data() + token.text.size(), value);
    if (ec != std::errc() || ptr != token.text.data() + token.text.size()) {
      fail(token.column, "expected integer, found '" + std::string(token.text) + "'");
    }
    return value;
  }

  Variable parse_var(const Token& token) const {
    long id = parse_int(token);
    if (id <= 0 || id > problem_.num_vars) {
      fail(token.column, "variable " + std::to_string(id) + " outside 1.." + std::to_string(problem_.num_vars));
    }
    return Variable(static_cast<int>(id));
  }

  void require_header(const Token& token) const {
    if (!seen_header_) {
      fail(token.column, "missing 'p cnf' header before '" + std::string(token.text) + "'");
    }
  }

  void parse_line(std::string_view line) {
    std::vector<Token> tokens = tokenize(line);
    if (tokens.empty() || tokens[0].text == "c") {
      return;
    }
    const Token& head = tokens[0];
    if (head.text == "p") {
      parse_header(tokens);
    }
    else if (head.text == "e" || head.text == "r") {
      parse_quantifier(tokens);
    }
    else if (head.text[0] == 'c') {
      return;  // tolerate "c..." comments without a space
    }
    else {
      parse_clauses(tokens);
    }
  }

  void parse_header(const std::vector<Token>& tokens) {
    if (seen_header_) {
      fail(tokens[0].column, "duplicate header");
    }
    if (tokens.size() != 4 || tokens[1].text != "cnf") {
      fail(tokens[0].column, "malformed header, expected 'p cnf <num_vars> <num_clauses>'");
    }
    long vars = parse_int(tokens[2]);
    long clauses = parse_int(tokens[3]);
    if (vars < 0) {
      fail(tokens[2].column, "negative variable count");
    }
    if (clauses < 0) {
      fail(tokens[3].column, "negative clause count");
    }
    problem_.num_vars = static_cast<int>(vars);
    declared_clauses_ = clauses;
    seen_header_ = true;
  }

  void parse_quantifier(const std::vector<Token>& tokens) {
    require_header(tokens[0]);
    if (parsed_clauses_ > 0) {
      fail(tokens[0].column, "quantifier line after clauses");
    }
    bool random = tokens[0].text == "r";
    std::size_t first = 1;
    double prob = 0;
    if (random) {
      if (tokens.size() < 2) {
        fail(tokens[0].column, "missing probability");
      }
      prob = parse_probability(tokens[1]);
      first = 2;
    }
    if (tokens.size() <= first || tokens.back().text != "0") {
      fail(tokens.back().column, "quantifier line not terminated by 0");
    }
    for (std::size_t i = first; i + 1 < tokens.size(); ++i) {
      Variable v = parse_var(tokens[i]);
      if (problem_.exist.contains(v) || problem_.random.contains(v)) {
        fail(tokens[i].column, "variable " + std::to_string(v.id) + " quantified twice");
      }
      if (random) {
        problem_.random.insert(v);
        problem_.prob[v] = prob;
      }
      else {
        problem_.exist.insert(v);
      }
    }
  }

  double parse_probability(const Token& token) const {
    double value = 0;
    auto [ptr, ec] = std::from_chars(token.text.data(), token.text.data() + token.text.size(), value);
    if (ec != std::errc() || ptr != token.text.data() + token.text.size() || !std::isfinite(value)) {
      fail(token.column, "expected probability, found '" + std::string(token.text) + "'");
    }
    if (value < 0 || value > 1) {
      fail(token.column, "probability " + std::string(token.text) + " outside [0,1]");
    }
    return value;
  }

  void parse_clauses(const std::vector<Token>& tokens) {
    require_header(tokens[0]);
    std::vector<int> lits;
    for (const Token& token : tokens) {
      long lit = parse_int(token);
      if (lit == 0) {
        add_clause(lits);
        lits.clear();
        continue;
      }
      Variable v = parse_var(Token{token.text.substr(lit < 0 ? 1 : 0), token.column});
      if (!problem_.exist.contains(v) && !problem_.random.contains(v)) {
        fail(token.column, "variable " + std::to_string(v.id) + " occurs in a clause but is not quantified");
      }
      lits.push_back(static_cast<int>(lit));
    }
    if (!lits.empty()) {
      fail(tokens.back().column + static_cast<int>(tokens.back().text.size()), "clause not terminated by 0");
    }
  }

  void add_clause(const std::vector<int>& lits) {
    ++parsed_clauses_;
    if (parsed_clauses_ > declared_clauses_) {
      fail(1, "more clauses than the " + std::to_string(declared_clauses_) + " declared in the header");
    }
    Clause clause;
    for (int lit : lits) {
      Literal literal = Literal::from_dimacs(lit);
      auto same_var = std::find_if(clause.literals.begin(), clause.literals.end(),
                                   [&](const Literal& l) { return l.var == literal.var; });
      if (same_var == clause.literals.end()) {
        clause.literals.push_back(literal);
      }
      else if (same_var->positive != literal.positive) {
        return;  // tautology
      }
    }
    problem_.clauses.push_back(std::move(clause));
  }

  void finish() {
    if (!seen_header_) {
      throw ParseError(line_no_, 1, "missing 'p cnf' header");
    }
    if (parsed_clauses_ != declared_clauses_) {
      throw ParseError(line_no_, 1, "header declares " + std::to_string(declared_clauses_) + " clauses, found " +
                                        std::to_string(parsed_clauses_));
    }
    for (int id = 1; id <= problem_.num_vars; ++id) {
      Variable v(id);
      if (problem_.exist.contains(v) || problem_.random.contains(v)) {
        continue;
      }
      if (!options_.free_as_exist) {
        throw ParseError(line_no_, 1, "variable " + std::to_string(id) + " is declared but never quantified");
      }
      problem_.exist.insert(v);
    }
  }

  ParseOptions options_;
  Problem problem_;
  int line_no_ = 0;
  bool seen_header_ = false;
  long declared_clauses_ = 0;
  long parsed_clauses_ = 0;
};

}  // namespace

Problem parse_problem(std::istream& in, const ParseOptions& options) {
  return Parser(options).run(in);
}

Problem parse_problem_string(std::string_view text, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_problem(in, options);
}

Problem parse_problem_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return parse_problem(in, options);
}

/* serialization ============================================================ */

std::string serialize_problem(const Problem& p) {
  std::ostringstream out;
  out << "p cnf " << p.num_vars << " " << p.clauses.size() << "\n";
  if (!p.exist.empty()) {
    out << "e";
    for (Variable v : p.exist) {
      out << " " << v.id;
    }
    out << " 0\n";
  }
  // one r line per distinct probability, in order of first variable
  std::vector<std::pair<double, std::vector<Variable>>> groups;
  for (Variable v : p.random) {
    double prob = p.prob.at(v);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == prob; });
    if (it == groups.end()) {
      groups.push_back({prob, {v}});
    }
    else {
      it->second.push_back(v);
    }
  }
  for (const auto& [prob, vars] : groups) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", prob);
    out << "r " << buf;
    for (Variable v : vars) {
      out << " " << v.id;
    }
    out << " 0\n";
  }
  for (const Clause& clause : p.clauses) {
    for (const Literal& lit : clause.literals) {
      out << lit.dimacs() << " ";
    }
    out << "0\n";
  }
  return out.str();
}

/* validation =============================================================== */

std::vector<std::string> problem_violations(const Problem& p) {
  std::vector<std::string> out;
  auto in_range = [&](Variable v) { return v.id >= 1 && v.id <= p.num_vars; };
  for (Variable v : p.exist) {
    if (p.random.contains(v)) {
      out.push_back("partition: variable " + std::to_string(v.id) + " is both existential and randomized");
    }
    if (!in_range(v)) {
      out.push_back("range: existential variable " + std::to_string(v.id) + " outside 1.." + std::to_string(p.num_vars));
    }
  }
  for (Variable v : p.random) {
    if (!in_range(v)) {
      out.push_back("range: randomized variable " + std::to_string(v.id) + " outside 1.." + std::to_string(p.num_vars));
    }
    auto it = p.prob.find(v);
    if (it == p.prob.end()) {
      out.push_back("probability: randomized variable " + std::to_string(v.id) + " has no probability");
    }
    else if (!(it->second >= 0 && it->second <= 1)) {
      out.push_back("probability: pr(" + std::to_string(v.id) + ") = " + std::to_string(it->second) + " outside [0,1]");
    }
  }
  for (const auto& [v, prob] : p.prob) {
    if (!p.random.contains(v)) {
      out.push_back("probability: variable " + std::to_string(v.id) + " has a probability but is not randomized");
    }
  }
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    const Clause& clause = p.clauses[i];
    std::set<Variable> seen;
    for (const Literal& lit : clause.literals) {
      if (!seen.insert(lit.var).second) {
        out.push_back("clause " + std::to_string(i) + ": variable " + std::to_string(lit.var.id) + " repeated");
      }
      if (!p.exist.contains(lit.var) && !p.random.contains(lit.var)) {
        out.push_back("partition: variable " + std::to_string(lit.var.id) + " in clause " + std::to_string(i) +
                      " is not quantified");
      }
    }
  }
  return out;
}

void validate(const Problem& p) {
  std::vector<std::string> violations = problem_violations(p);
  if (!violations.empty()) {
    throw ValidationError(std::move(violations));
  }
}

/* class Graph ============================================================== */

void Graph::add_edge(Variable u, Variable v) {
  if (u == v) {
    add_vertex(u);
    return;
  }
  adjacency_[u].insert(v);
  adjacency_[v].insert(u);
}

void Graph::remove_vertex(Variable v) {
  auto it = adjacency_.find(v);
  if (it == adjacency_.end()) {
    return;
  }
  for (Variable u : it->second) {
    adjacency_[u].erase(v);
  }
  adjacency_.erase(it);
}

bool Graph::has_edge(Variable u, Variable v) const {
  auto it = adjacency_.find(u);
  return it != adjacency_.end() && it->second.contains(v);
}

std::size_t Graph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& [v, nbrs] : adjacency_) {
    twice += nbrs.size();
  }
  return twice / 2;
}

std::vector<Variable> Graph::vertices() const {
  std::vector<Variable> out;
  for (const auto& [v, nbrs] : adjacency_) {
    out.push_back(v);
  }
  return out;
}

std::vector<std::pair<Variable, Variable>> Graph::edges() const {
  std::vector<std::pair<Variable, Variable>> out;
  for (const auto& [u, nbrs] : adjacency_) {
    for (Variable v : nbrs) {
      if (u < v) {
        out.emplace_back(u, v);
      }
    }
  }
  return out;
}

Graph primal_graph(const Problem& p) {
  Graph g;
  for (Variable v : p.exist) {
    g.add_vertex(v);
  }
  for (Variable v : p.random) {
    g.add_vertex(v);
  }
  for (const Clause& clause : p.clauses) {
    for (std::size_t i = 0; i < clause.literals.size(); ++i) {
      g.add_vertex(clause.literals[i].var);
      for (std::size_t j = i + 1; j < clause.literals.size(); ++j) {
        g.add_edge(clause.literals[i].var, clause.literals[j].var);
      }
    }
  }
  return g;
}

}  // namespace dper
