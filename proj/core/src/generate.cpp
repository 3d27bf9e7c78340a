#include "dper/generate.hpp"

#include <algorithm>
#include <stdexcept>

namespace dper {

namespace {

void quantify(Problem& p, double exist_fraction, const std::vector<double>& probabilities, std::mt19937_64& rng) {
  if (probabilities.empty()) {
    throw std::invalid_argument("no probabilities to draw from");
  }
  std::bernoulli_distribution is_exist(exist_fraction);
  std::uniform_int_distribution<std::size_t> pick(0, probabilities.size() - 1);
  for (int id = 1; id <= p.num_vars; ++id) {
    Variable v(id);
    if (is_exist(rng)) {
      p.exist.insert(v);
    }
    else {
      p.random.insert(v);
      p.prob[v] = probabilities[pick(rng)];
    }
  }
}

Clause make_clause(std::vector<int> ids, std::mt19937_64& rng) {
  std::sort(ids.begin(), ids.end());
  std::bernoulli_distribution positive(0.5);
  Clause c;
  for (int id : ids) {
    c.literals.push_back(Literal{Variable(id), positive(rng)});
  }
  return c;
}

}  // namespace

Problem random_problem(const RandomProblemParams& params, std::mt19937_64& rng) {
  if (params.min_vars < 1 || params.max_vars < params.min_vars || params.max_clauses < params.min_clauses ||
      params.min_clause_len < 1 || params.max_clause_len < params.min_clause_len) {
    throw std::invalid_argument("bad random problem parameters");
  }
  Problem p;
  p.num_vars = std::uniform_int_distribution<int>(params.min_vars, params.max_vars)(rng);
  quantify(p, params.exist_fraction, params.probabilities, rng);

  int num_clauses = std::uniform_int_distribution<int>(params.min_clauses, params.max_clauses)(rng);
  int max_len = std::min(params.max_clause_len, p.num_vars);
  std::uniform_int_distribution<int> len_dist(std::min(params.min_clause_len, max_len), max_len);
  std::vector<int> ids(static_cast<std::size_t>(p.num_vars));
  for (int i = 0; i < num_clauses; ++i) {
    for (int id = 1; id <= p.num_vars; ++id) {
      ids[id - 1] = id;
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    int len = len_dist(rng);
    p.clauses.push_back(make_clause({ids.begin(), ids.begin() + len}, rng));
  }
  return p;
}

Problem banded_problem(const BandedProblemParams& params, std::mt19937_64& rng) {
  if (params.band < 1 || params.num_exist < params.band || params.clause_len < 2 ||
      params.clause_len - 1 > params.band || params.clauses_per_window < 1 || params.probabilities.empty()) {
    throw std::invalid_argument("bad banded problem parameters");
  }
  const int windows = params.num_exist - params.band + 1;
  Problem p;
  p.num_vars = params.num_exist + windows;
  std::uniform_int_distribution<std::size_t> pick(0, params.probabilities.size() - 1);
  for (int id = 1; id <= params.num_exist; ++id) {
    p.exist.insert(Variable(id));
  }
  for (int id = params.num_exist + 1; id <= p.num_vars; ++id) {
    p.random.insert(Variable(id));
    p.prob[Variable(id)] = params.probabilities[pick(rng)];
  }

  std::vector<int> window(static_cast<std::size_t>(params.band));
  for (int start = 1; start <= windows; ++start) {
    for (int k = 0; k < params.clauses_per_window; ++k) {
      for (int j = 0; j < params.band; ++j) {
        window[j] = start + j;
      }
      std::shuffle(window.begin(), window.end(), rng);
      std::vector<int> ids(window.begin(), window.begin() + (params.clause_len - 1));
      ids.push_back(params.num_exist + start);
      p.clauses.push_back(make_clause(std::move(ids), rng));
    }
  }
  return p;
}

}  // namespace dper
