#include <doctest.h>

#include <cmath>

#include "dper/oracle.hpp"
#include "support.hpp"

using namespace dper;

TEST_CASE("weighted count on the worked example") {
  Problem p = testing::worked_example();
  Assignment good{{Variable(1), true}, {Variable(3), true}, {Variable(5), false}};
  CHECK(weighted_count(p, good) == 0.75);
  Assignment bad{{Variable(1), false}, {Variable(3), true}, {Variable(5), false}};
  CHECK(weighted_count(p, bad) == 0);
  CHECK_THROWS_AS(weighted_count(p, Assignment{{Variable(1), true}}), std::invalid_argument);
}

TEST_CASE("enumeration on the worked example") {
  OracleResult r = enumerate_solve(testing::worked_example());
  CHECK(r.maximum == 0.75);
  REQUIRE(r.maximizers.size() == 2);
  for (const Assignment& tau : r.maximizers) {
    CHECK(tau.at(Variable(1)));
    CHECK(tau.at(Variable(3)) != tau.at(Variable(5)));
  }
  REQUIRE(r.per_assignment.has_value());
  CHECK(r.per_assignment->size() == 8);
}

TEST_CASE("degenerate oracles") {
  OracleResult empty = enumerate_solve(parse_problem_string("p cnf 0 0\n"));
  CHECK(empty.maximum == 1);
  REQUIRE(empty.maximizers.size() == 1);
  CHECK(empty.maximizers[0].empty());

  Problem wmc = parse_problem_string("p cnf 2 1\nr 0.25 1 0\nr 0.5 2 0\n1 2 0\n");
  OracleResult r = enumerate_solve(wmc);
  CHECK(r.maximum == weighted_count(wmc, {}));
  CHECK(r.maximum == 1 - 0.75 * 0.5);

  Problem no_y = parse_problem_string("p cnf 2 1\ne 1 2 0\n1 -2 0\n");
  CHECK(weighted_count(no_y, {{Variable(1), false}, {Variable(2), true}}) == 0);
  CHECK(weighted_count(no_y, {{Variable(1), false}, {Variable(2), false}}) == 1);
}

TEST_CASE("maximizers reach the maximum exactly") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Problem p = testing::fuzz_problem(seed);
    OracleResult r = enumerate_solve(p);
    REQUIRE(!r.maximizers.empty());
    for (const Assignment& tau : r.maximizers) {
      CHECK(weighted_count(p, tau) == r.maximum);
    }
  }
}

TEST_CASE("enumeration guards") {
  Problem p;
  p.num_vars = 25;
  for (int i = 1; i <= 25; ++i) {
    p.random.insert(Variable(i));
    p.prob[Variable(i)] = 0.5;
  }
  CHECK_THROWS_AS(enumerate_solve(p), std::length_error);
  CHECK_THROWS_AS(weighted_count(p, {}), std::length_error);
}
