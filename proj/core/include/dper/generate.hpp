#pragma once

// Random instance families for fuzzing and benchmarks.

#include <cstdint>
#include <random>
#include <vector>

#include "dper/formula.hpp"

namespace dper {

struct RandomProblemParams {
  int min_vars = 1;
  int max_vars = 12;
  int min_clauses = 0;
  int max_clauses = 20;
  int min_clause_len = 1;
  int max_clause_len = 4;
  /// Chance that a variable is existential.
  double exist_fraction = 0.5;
  std::vector<double> probabilities{0.4, 0.5, 0.6};
};

/// Uniform random CNF; every declared variable is quantified, some may occur
/// in no clause.
Problem random_problem(const RandomProblemParams& params, std::mt19937_64& rng);

struct BandedProblemParams {
  /// Width of the sliding window over the existential chain.
  int band = 5;
  /// Length of the existential chain.
  int num_exist = 40;
  /// Clauses per window start; each takes clause_len - 1 existential
  /// variables from the window plus the window's own random variable.
  int clauses_per_window = 2;
  int clause_len = 3;
  std::vector<double> probabilities{0.4, 0.6};
};

/// Existential variables 1..num_exist form a chain; window i owns random
/// variable num_exist + i, which occurs in no other window. Random variables
/// therefore never share a clause, and elimination widths track the band.
Problem banded_problem(const BandedProblemParams& params, std::mt19937_64& rng);

}  // namespace dper
