#include <doctest.h>

#include <algorithm>

#include "dper/planner.hpp"
#include "support.hpp"

using namespace dper;

namespace {

bool has_criterion(const std::vector<TreeViolation>& v, int criterion) {
  return std::any_of(v.begin(), v.end(), [&](const TreeViolation& t) { return t.criterion == criterion; });
}

const Heuristic kHeuristics[] = {Heuristic::MinFill, Heuristic::MinDegree, Heuristic::Lexicographic};

}  // namespace

TEST_CASE("heuristic names") {
  CHECK(parse_heuristic("min-fill") == Heuristic::MinFill);
  CHECK(parse_heuristic("lexicographic") == Heuristic::Lexicographic);
  CHECK(heuristic_name(Heuristic::MinDegree) == "min-degree");
  CHECK_THROWS_AS(parse_heuristic("best"), std::invalid_argument);
}

TEST_CASE("the worked-example tree is valid, graded and of width 2") {
  Problem p = testing::worked_example();
  PjTree t = testing::worked_example_tree();
  CHECK(tree_violations(t, p).empty());
  CHECK(graded_violations(t, p.exist, p.random).empty());
  CHECK(width(t, p) == 2);
  CHECK(projection_order(t) ==
        std::vector<Variable>{Variable(2), Variable(4), Variable(6), Variable(1), Variable(3), Variable(5)});
  std::vector<std::set<Variable>> vars = node_vars(t, p);
  CHECK(vars[7] == std::set<Variable>{});
  CHECK(vars[5] == std::set<Variable>{});
  CHECK(vars[2] == std::set<Variable>{Variable(1)});
}

TEST_CASE("check_tree catches both criteria") {
  Problem p = testing::worked_example();
  SUBCASE("a variable projected twice") {
    PjTree t = testing::worked_example_tree();
    t.nodes[9].projected.push_back(Variable(1));
    CHECK(has_criterion(tree_violations(t, p), 1));
    CHECK_THROWS_AS(check_tree(t, p), TreeError);
  }
  SUBCASE("a variable projected away from its clauses") {
    PjTree t = testing::worked_example_tree();
    t.nodes[7].projected.clear();
    t.nodes[8].projected.push_back(Variable(1));
    CHECK(has_criterion(tree_violations(t, p), 2));
  }
  SUBCASE("a variable never projected") {
    PjTree t = testing::worked_example_tree();
    t.nodes[6].projected.clear();
    CHECK(has_criterion(tree_violations(t, p), 1));
  }
  SUBCASE("a clause without a leaf") {
    PjTree t = testing::worked_example_tree();
    t.nodes[7].children = {5, 6};
    CHECK(has_criterion(tree_violations(t, p), 0));
  }
  SUBCASE("a cycle") {
    PjTree t = testing::worked_example_tree();
    t.nodes[8].children.push_back(9);
    CHECK(has_criterion(tree_violations(t, p), 0));
  }
}

TEST_CASE("check_graded catches each property") {
  Problem p = testing::worked_example();
  SUBCASE("an X projection in a Y node") {
    PjTree t = testing::worked_example_tree();
    t.nodes[7].grade = Grade::Y;
    CHECK(has_criterion(graded_violations(t, p.exist, p.random), 13));
  }
  SUBCASE("a Y projection in an X node") {
    PjTree t = testing::worked_example_tree();
    t.nodes[5].grade = Grade::X;
    CHECK(has_criterion(graded_violations(t, p.exist, p.random), 12));
  }
  SUBCASE("an X node below a Y node") {
    PjTree t = testing::worked_example_tree();
    t.nodes[9].grade = Grade::Y;
    CHECK(has_criterion(graded_violations(t, p.exist, p.random), 14));
    CHECK_THROWS_AS(check_graded(t, p.exist, p.random), TreeError);
  }
}

TEST_CASE("elimination orders put Y before X") {
  Problem p = testing::worked_example();
  Graph g = primal_graph(p);
  for (Heuristic h : kHeuristics) {
    std::vector<Variable> order = elimination_order(g, p.exist, p.random, h);
    REQUIRE(order.size() == 6);
    for (int i = 0; i < 3; ++i) {
      CHECK(p.is_random(order[i]));
      CHECK(p.is_exist(order[i + 3]));
    }
  }
  CHECK(elimination_order(g, p.exist, p.random, Heuristic::Lexicographic) ==
        std::vector<Variable>{Variable(2), Variable(4), Variable(6), Variable(1), Variable(3), Variable(5)});
  Graph single;
  single.add_vertex(Variable(1));
  CHECK(elimination_order(single, {Variable(1)}, {}, Heuristic::MinFill) == std::vector<Variable>{Variable(1)});
}

TEST_CASE("build_graded_tree rejects orders that break the blocks") {
  Problem p = testing::worked_example();
  std::vector<Variable> bad{Variable(1), Variable(2), Variable(3), Variable(4), Variable(5), Variable(6)};
  CHECK_THROWS_AS(build_graded_tree(p, bad), std::invalid_argument);
}

TEST_CASE("small trees") {
  SUBCASE("one unit clause") {
    Problem p = parse_problem_string("p cnf 1 1\ne 1 0\n1 0\n");
    PjTree t = plan(p);
    CHECK(t.nodes.size() == 2);
    CHECK(t.node(t.root).projected == std::vector<Variable>{Variable(1)});
    CHECK(width(t, p) == 1);
  }
  SUBCASE("empty formula") {
    Problem p = parse_problem_string("p cnf 0 0\n");
    PjTree t = plan(p);
    check_tree(t, p);
    CHECK(width(t, p) == 0);
  }
  SUBCASE("independent clauses hang off one root") {
    Problem p = parse_problem_string("p cnf 3 3\ne 1 2 3 0\n1 0\n2 0\n3 0\n");
    PjTree t = plan(p);
    check_tree(t, p);
    CHECK(t.node(t.root).children.size() == 3);
    CHECK(t.node(t.root).projected.empty());
  }
}

TEST_CASE("planner output is valid on random problems") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Problem p = testing::fuzz_problem(seed);
    std::size_t max_clause = 0;
    for (const Clause& c : p.clauses) {
      max_clause = std::max(max_clause, c.literals.size());
    }
    for (Heuristic h : kHeuristics) {
      PjTree t = plan(p, {h, seed, seed % 2 == 0});
      REQUIRE(tree_violations(t, p).empty());
      REQUIRE(graded_violations(t, p.exist, p.random).empty());
      REQUIRE(testing::siblings_disjoint(t, p));
      REQUIRE(static_cast<std::size_t>(width(t, p)) >= max_clause);
    }
  }
}

TEST_CASE("planning is deterministic") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Problem p = testing::fuzz_problem(seed);
    CHECK(write_tree(plan(p, {Heuristic::MinFill, 3, true}), p) ==
          write_tree(plan(p, {Heuristic::MinFill, 3, true}), p));
  }
}

TEST_CASE("tree files round-trip") {
  Problem p = testing::worked_example();
  PjTree t = testing::worked_example_tree();
  std::string text = write_tree(t, p);
  CHECK(text.rfind("pjt 10 5 6\n", 0) == 0);
  PjTree back = read_tree(text, p);
  CHECK(write_tree(back, p) == text);
  CHECK(width(back, p) == 2);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Problem q = testing::fuzz_problem(seed);
    PjTree u = plan(q);
    CHECK(write_tree(read_tree(write_tree(u, q), q), q) == write_tree(u, q));
  }
}

TEST_CASE("bad tree files are rejected") {
  Problem p = testing::worked_example();
  std::string text = write_tree(testing::worked_example_tree(), p);
  SUBCASE("clause index out of range") {
    std::string bad = text;
    bad.replace(bad.find("l 1 1"), 5, "l 1 9");
    CHECK_THROWS(read_tree(bad, p));
  }
  SUBCASE("grades breaking property 4") {
    std::string bad = text;
    bad.replace(bad.find("i 10 x"), 6, "i 10 y");
    CHECK_THROWS_AS(read_tree(bad, p), TreeError);
  }
  SUBCASE("garbage") {
    CHECK_THROWS_AS(read_tree("pjt 1 2\n", p), ParseError);
    CHECK_THROWS_AS(read_tree("", p), ParseError);
  }
}
