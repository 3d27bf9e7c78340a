#include "dper/oracle.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>

namespace dper {

namespace {

// Clauses as bit masks over a compact index: X variables take bits
// 0..|X|-1, Y variables the bits above.
class Enumerator {
 public:
  explicit Enumerator(const Problem& p) {
    validate(p);
    xs_.assign(p.exist.begin(), p.exist.end());
    ys_.assign(p.random.begin(), p.random.end());
    std::map<Variable, int> bit;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      bit[xs_[i]] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < ys_.size(); ++i) {
      bit[ys_[i]] = static_cast<int>(xs_.size() + i);
    }
    for (const Clause& clause : p.clauses) {
      std::uint64_t pos = 0;
      std::uint64_t neg = 0;
      for (const Literal& lit : clause.literals) {
        int b = bit.at(lit.var);
        if (b >= 64) {
          throw std::length_error("too many variables to enumerate");
        }
        (lit.positive ? pos : neg) |= std::uint64_t{1} << b;
      }
      clauses_.push_back({pos, neg});
    }
    for (Variable y : ys_) {
      probs_.push_back(p.prob.at(y));
    }
  }

  std::size_t num_x() const { return xs_.size(); }
  std::size_t num_y() const { return ys_.size(); }
  const std::vector<Variable>& xs() const { return xs_; }

  std::uint64_t x_mask(const Assignment& tau_x) const {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      std::optional<bool> value = tau_x.get(xs_[i]);
      if (!value) {
        throw std::invalid_argument("assignment misses existential variable " + std::to_string(xs_[i].id));
      }
      if (*value) {
        mask |= std::uint64_t{1} << i;
      }
    }
    return mask;
  }

  Assignment x_assignment(std::uint64_t mask) const {
    Assignment tau;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      tau.set(xs_[i], ((mask >> i) & 1) != 0);
    }
    return tau;
  }

  double count(std::uint64_t x_mask) const {
    const std::size_t shift = xs_.size();
    const std::uint64_t y_count = std::uint64_t{1} << ys_.size();
    double total = 0;
    for (std::uint64_t y = 0; y < y_count; ++y) {
      std::uint64_t tau = x_mask | (y << shift);
      if (!satisfies(tau)) {
        continue;
      }
      double weight = 1;
      for (std::size_t i = 0; i < ys_.size(); ++i) {
        weight *= ((y >> i) & 1) != 0 ? probs_[i] : 1 - probs_[i];
      }
      total += weight;
    }
    return total;
  }

 private:
  bool satisfies(std::uint64_t tau) const {
    for (const auto& [pos, neg] : clauses_) {
      if (((tau & pos) | (~tau & neg)) == 0) {
        return false;
      }
    }
    return true;
  }

  std::vector<Variable> xs_;
  std::vector<Variable> ys_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> clauses_;
  std::vector<double> probs_;
};

}  // namespace

double weighted_count(const Problem& p, const Assignment& tau_x) {
  if (p.random.size() > kMaxEnumeratedRandom) {
    throw std::length_error("weighted_count enumerates at most 24 randomized variables");
  }
  validate(p);
  for (Variable x : p.exist) {
    if (!tau_x.contains(x)) {
      throw std::invalid_argument("assignment misses existential variable " + std::to_string(x.id));
    }
  }
  // residual formula over Y: drop clauses satisfied by tau_x, strip X literals
  Problem residual;
  residual.num_vars = p.num_vars;
  residual.random = p.random;
  residual.prob = p.prob;
  for (const Clause& clause : p.clauses) {
    Clause rest;
    bool satisfied = false;
    for (const Literal& lit : clause.literals) {
      if (p.is_exist(lit.var)) {
        satisfied = satisfied || tau_x.at(lit.var) == lit.positive;
      }
      else {
        rest.literals.push_back(lit);
      }
    }
    if (!satisfied) {
      residual.clauses.push_back(std::move(rest));
    }
  }
  return Enumerator(residual).count(0);
}

OracleResult enumerate_solve(const Problem& p) {
  if (p.exist.size() + p.random.size() > kMaxEnumeratedTotal) {
    throw std::length_error("enumerate_solve handles at most 24 quantified variables");
  }
  Enumerator e(p);
  OracleResult result;
  const std::uint64_t x_count = std::uint64_t{1} << e.num_x();
  std::vector<double> values(x_count);
  for (std::uint64_t x = 0; x < x_count; ++x) {
    values[x] = e.count(x);
  }
  result.maximum = values[0];
  for (double v : values) {
    result.maximum = std::max(result.maximum, v);
  }
  for (std::uint64_t x = 0; x < x_count; ++x) {
    if (values[x] == result.maximum) {
      result.maximizers.push_back(e.x_assignment(x));
    }
  }
  if (e.num_x() <= kMaxPerAssignmentTable) {
    result.per_assignment.emplace();
    for (std::uint64_t x = 0; x < x_count; ++x) {
      result.per_assignment->emplace_back(e.x_assignment(x), values[x]);
    }
  }
  return result;
}

}  // namespace dper
