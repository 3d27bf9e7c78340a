#pragma once

// Brute-force ground truth by exhaustive enumeration. Shares no code with
// the diagram path.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "dper/formula.hpp"
#include "dper/pbf.hpp"

namespace dper {

inline constexpr std::size_t kMaxEnumeratedRandom = 24;
inline constexpr std::size_t kMaxEnumeratedTotal = 24;
inline constexpr std::size_t kMaxPerAssignmentTable = 12;

struct OracleResult {
  double maximum = 0;
  /// Every X-assignment attaining the maximum, in binary-counter order over X ascending.
  std::vector<Assignment> maximizers;
  /// Weighted count per X-assignment; present only when |X| <= 12.
  std::optional<std::vector<std::pair<Assignment, double>>> per_assignment;
};

/// Probability that a random Y-assignment satisfies the clauses under tau_x.
/// Y-assignments are summed in binary-counter order (Y ascending, lowest id
/// as the least significant bit). Throws std::length_error when |Y| > 24 and
/// std::invalid_argument when tau_x misses an X variable.
double weighted_count(const Problem& p, const Assignment& tau_x);

/// Throws std::length_error when |X| + |Y| > 24.
OracleResult enumerate_solve(const Problem& p);

}  // namespace dper
