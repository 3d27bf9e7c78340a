// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dper/executor.hpp"
#include "dper/generate.hpp"
#include "dper/harness.hpp"
#include "dper/oracle.hpp"
#include "dper/planner.hpp"
#include "support.hpp"

using namespace dper;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kAgreeTolerance = 1e-9;
constexpr double kProjectionTolerance = 1e-12;
constexpr int kFuzzInstances = 2000;
constexpr std::uint64_t kFuzzSeedBase = 1'000'000;
constexpr int kAlgebraCases = 500;
constexpr int kAlgebraVars = 10;
constexpr double kWorkedExampleSeconds = 1.0;
constexpr double kFuzzSeconds = 300.0;
constexpr double kSmokeCapSeconds = 60.0;
constexpr int kSmokeMaxWidth = 25;
constexpr int kSmokePerBucket = 4;
const int kWidthBuckets[] = {5, 10, 15, 20, 25};
const Heuristic kHeuristics[] = {Heuristic::MinFill, Heuristic::MinDegree, Heuristic::Lexicographic};

struct Verdict {
  bool pass = true;
  std::string detail;
};

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/* 1: worked example ======================================================== */

Verdict worked_example() {
  auto start = Clock::now();
  Problem p = testing::worked_example();
  SolveResult r = solve(p, plan(p));
  double seconds = since(start);
  SolveResult fixed = solve(p, testing::worked_example_tree());
  double wc = weighted_count(p, r.maximizer);
  OracleResult o = enumerate_solve(p);
  bool in_argmax = std::find(o.maximizers.begin(), o.maximizers.end(), r.maximizer) != o.maximizers.end();

  Verdict v;
  v.pass = r.maximum == 0.75 && fixed.maximum == 0.75 && wc == 0.75 && o.maximum == 0.75 && in_argmax &&
           seconds < kWorkedExampleSeconds;
  std::ostringstream d;
  d << "maximum " << r.maximum << ", maximizer";
  for (int lit : r.maximizer.literals()) {
    d << ' ' << lit;
  }
  d << ", weighted count " << wc << ", oracle " << o.maximum << " (" << o.maximizers.size() << " maximizers)"
    << ", " << fmt("%.4f", seconds) << " s";
  v.detail = d.str();
  return v;
}

/* 2: fuzz agreement ======================================================== */

Verdict fuzz_agreement() {
  auto start = Clock::now();
  int disagreements = 0;
  int bad_maximizers = 0;
  std::string first;
  for (int i = 0; i < kFuzzInstances; ++i) {
    std::uint64_t seed = kFuzzSeedBase + static_cast<std::uint64_t>(i);
    Problem p = testing::fuzz_problem(seed);
    OracleResult o = enumerate_solve(p);
    std::vector<SolveResult> results;
    for (Heuristic h : kHeuristics) {
      results.push_back(solve(p, plan(p, {h})));
    }
    results.push_back(solve_monolithic(p));
    for (const SolveResult& r : results) {
      if (!(std::fabs(r.maximum - o.maximum) <= kAgreeTolerance)) {
        ++disagreements;
        if (first.empty()) {
          first = "seed " + std::to_string(seed);
        }
      }
      if (!(std::fabs(weighted_count(p, r.maximizer) - o.maximum) <= kAgreeTolerance)) {
        ++bad_maximizers;
        if (first.empty()) {
          first = "seed " + std::to_string(seed);
        }
      }
    }
  }
  double seconds = since(start);
  Verdict v;
  v.pass = disagreements == 0 && bad_maximizers == 0 && seconds < kFuzzSeconds;
  v.detail = std::to_string(kFuzzInstances) + " instances x 4 solvers vs enumeration: " +
             std::to_string(disagreements) + " maximum disagreements, " + std::to_string(bad_maximizers) +
             " non-optimal maximizers, " + fmt("%.1f", seconds) + " s" + (first.empty() ? "" : ", first at " + first);
  return v;
}

/* 3: algebra properties ==================================================== */

// Dense reference tables over variables 1..n; bit i of the index is variable i + 1.
using Dense = std::vector<double>;

Dense densify(const testing::Table& t, int n) {
  Dense out(std::size_t{1} << n);
  for (std::size_t m = 0; m < out.size(); ++m) {
    std::size_t local = 0;
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
      if ((m >> (t.vars[i].id - 1)) & 1) {
        local |= std::size_t{1} << i;
      }
    }
    out[m] = t.values[local];
  }
  return out;
}

Dense dense_binary(const Dense& a, const Dense& b, const std::function<double(double, double)>& op) {
  Dense out(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) {
    out[m] = op(a[m], b[m]);
  }
  return out;
}

Dense dense_project(const Dense& a, Variable x, const std::function<double(double, double)>& combine) {
  Dense out(a.size());
  std::size_t bit = std::size_t{1} << (x.id - 1);
  for (std::size_t m = 0; m < a.size(); ++m) {
    out[m] = combine(a[m & ~bit], a[m | bit]);
  }
  return out;
}

std::function<double(double, double)> dense_max() {
  return [](double lo, double hi) { return std::max(lo, hi); };
}

std::function<double(double, double)> dense_random(double p) {
  return [p](double lo, double hi) { return p * hi + (1 - p) * lo; };
}

double dense_diff(PbFunc f, const Dense& d, int n) {
  double worst = 0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    Assignment tau;
    for (int i = 0; i < n; ++i) {
      tau.set(Variable(i + 1), ((m >> i) & 1) != 0);
    }
    worst = std::max(worst, std::fabs(evaluate(f, tau) - d[m]));
  }
  return worst;
}

struct PropertyCount {
  int cases = 0;
  int failures = 0;
  void record(bool ok) {
    ++cases;
    failures += ok ? 0 : 1;
  }
};

Verdict algebra() {
  std::mt19937_64 rng(2024);
  const int n = kAlgebraVars;
  const double probs[] = {0.4, 0.5, 0.6};
  std::map<std::string, PropertyCount> props;
  auto pick_prob = [&] { return probs[std::uniform_int_distribution<int>(0, 2)(rng)]; };

  // split 1..n into f-private (projected), shared and g-private parts; S is never empty
  auto split = [&](std::vector<Variable>& fv, std::vector<Variable>& gv, std::vector<Variable>& s) {
    std::uniform_int_distribution<int> role(0, 3);
    do {
      fv.clear();
      gv.clear();
      s.clear();
      for (int id = 1; id <= n; ++id) {
        switch (role(rng)) {
          case 0: fv.push_back(Variable(id)); s.push_back(Variable(id)); break;
          case 1: fv.push_back(Variable(id)); gv.push_back(Variable(id)); break;
          case 2: gv.push_back(Variable(id)); break;
          default: break;
        }
      }
    } while (s.empty());
  };

  for (int c = 0; c < kAlgebraCases; ++c) {
    DiagramStore store(VarOrder::natural(n));
    std::vector<Variable> fv, gv, s;

    // early projection, existential and random
    split(fv, gv, s);
    testing::Table ft = testing::random_dyadic_table(fv, rng);
    testing::Table gt = testing::random_dyadic_table(gv, rng);
    PbFunc f = testing::to_func(store, ft);
    PbFunc g = testing::to_func(store, gt);
    Dense fd = densify(ft, n), gd = densify(gt, n);
    Dense joined = dense_binary(fd, gd, std::multiplies<double>());
    {
      PbFunc lhs = join(f, g);
      PbFunc rhs_f = f;
      Dense ref = joined;
      for (Variable x : s) {
        lhs = exists_project(lhs, x);
        rhs_f = exists_project(rhs_f, x);
        ref = dense_project(ref, x, dense_max());
      }
      PbFunc rhs = join(rhs_f, g);
      props["early projection (exists)"].record(lhs == rhs && dense_diff(lhs, ref, n) == 0);
    }
    {
      PbFunc lhs = join(f, g);
      PbFunc rhs_f = f;
      Dense ref = joined;
      for (Variable x : s) {
        double p = pick_prob();
        lhs = rand_project(lhs, x, p);
        rhs_f = rand_project(rhs_f, x, p);
        ref = dense_project(ref, x, dense_random(p));
      }
      PbFunc rhs = join(rhs_f, g);
      props["early projection (random)"].record(max_abs_diff(lhs, rhs) <= kProjectionTolerance &&
                                                dense_diff(lhs, ref, n) <= kProjectionTolerance &&
                                                dense_diff(rhs, ref, n) <= kProjectionTolerance);
    }

    // projection commutativity
    {
      std::uniform_int_distribution<int> var(1, n);
      Variable x(var(rng)), y(var(rng));
      while (y == x) {
        y = Variable(var(rng));
      }
      testing::Table ht = testing::random_dyadic_table(testing::random_vars(n, 0.7, rng), rng);
      PbFunc h = testing::to_func(store, ht);
      Dense hd = densify(ht, n);
      PbFunc exy = exists_project(exists_project(h, x), y);
      PbFunc eyx = exists_project(exists_project(h, y), x);
      Dense eref = dense_project(dense_project(hd, x, dense_max()), y, dense_max());
      props["projection commutativity (exists)"].record(exy == eyx && dense_diff(exy, eref, n) == 0);
      double px = pick_prob(), py = pick_prob();
      PbFunc rxy = rand_project(rand_project(h, x, px), y, py);
      PbFunc ryx = rand_project(rand_project(h, y, py), x, px);
      Dense rref = dense_project(dense_project(hd, x, dense_random(px)), y, dense_random(py));
      props["projection commutativity (random)"].record(max_abs_diff(rxy, ryx) <= kProjectionTolerance &&
                                                        dense_diff(rxy, rref, n) <= kProjectionTolerance);
    }

    // join commutativity and associativity as handle identity
    {
      testing::Table at = testing::random_dyadic_table(testing::random_vars(n, 0.4, rng), rng);
      testing::Table bt = testing::random_dyadic_table(testing::random_vars(n, 0.4, rng), rng);
      testing::Table ct = testing::random_dyadic_table(testing::random_vars(n, 0.4, rng), rng);
      PbFunc a = testing::to_func(store, at), b = testing::to_func(store, bt), cc = testing::to_func(store, ct);
      Dense ref = dense_binary(dense_binary(densify(at, n), densify(bt, n), std::multiplies<double>()),
                               densify(ct, n), std::multiplies<double>());
      props["join commutativity"].record(join(a, b) == join(b, a));
      PbFunc left = join(join(a, b), cc);
      props["join associativity"].record(left == join(a, join(b, cc)) && dense_diff(left, ref, n) == 0);
    }

    // tie rule: chooser is 1 exactly where f(x=1) >= f(x=0)
    {
      Variable x(std::uniform_int_distribution<int>(1, n)(rng));
      std::vector<Variable> vars = testing::random_vars(n, 0.6, rng);
      if (std::find(vars.begin(), vars.end(), x) == vars.end()) {
        vars.push_back(x);
        std::sort(vars.begin(), vars.end());
      }
      testing::Table t = testing::random_dyadic_table(vars, rng);
      // force ties on about half of the points, always including the all-zero one
      std::size_t xi = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), x) - vars.begin());
      std::bernoulli_distribution tie(0.5);
      for (std::size_t m = 0; m < t.values.size(); ++m) {
        if (((m >> xi) & 1) == 0 && (m == 0 || tie(rng))) {
          t.values[m | (std::size_t{1} << xi)] = t.values[m];
        }
      }
      PbFunc h = testing::to_func(store, t);
      PbFunc chooser = dsgn(h, x).chooser;
      Dense hd = densify(t, n);
      std::size_t bit = std::size_t{1} << (x.id - 1);
      std::vector<Variable> chooser_support = support(chooser);
      bool ok = std::find(chooser_support.begin(), chooser_support.end(), x) == chooser_support.end();
      int ties = 0;
      for (std::size_t m = 0; m < hd.size() && ok; ++m) {
        Assignment tau;
        for (int i = 0; i < n; ++i) {
          tau.set(Variable(i + 1), ((m >> i) & 1) != 0);
        }
        double hi = hd[m | bit], lo = hd[m & ~bit];
        ties += hi == lo ? 1 : 0;
        ok = evaluate(chooser, tau) == (hi >= lo ? 1.0 : 0.0);
      }
      props["derivative-sign tie rule"].record(ok && ties > 0);
    }

    // derivative sign and join: for g >= 0 without x, dsgn(f*g) = dsgn(f) where g > 0, and 1 where g = 0
    {
      Variable x(std::uniform_int_distribution<int>(1, n)(rng));
      std::vector<Variable> fvars = testing::random_vars(n, 0.5, rng);
      if (std::find(fvars.begin(), fvars.end(), x) == fvars.end()) {
        fvars.push_back(x);
        std::sort(fvars.begin(), fvars.end());
      }
      std::vector<Variable> gvars = testing::random_vars(n, 0.5, rng);
      gvars.erase(std::remove(gvars.begin(), gvars.end(), x), gvars.end());
      testing::Table ft2 = testing::random_dyadic_table(fvars, rng);
      testing::Table gt2 = testing::random_dyadic_table(gvars, rng);
      PbFunc f2 = testing::to_func(store, ft2), g2 = testing::to_func(store, gt2);
      PbFunc alone = dsgn(f2, x).chooser;
      PbFunc joint = dsgn(join(f2, g2), x).chooser;
      bool ok = true;
      Dense gd2 = densify(gt2, n);
      for (std::size_t m = 0; m < gd2.size() && ok; ++m) {
        Assignment tau;
        for (int i = 0; i < n; ++i) {
          tau.set(Variable(i + 1), ((m >> i) & 1) != 0);
        }
        double expected = gd2[m] > 0 ? evaluate(alone, tau) : 1.0;
        ok = evaluate(joint, tau) == expected;
      }
      props["derivative-sign/join lemma"].record(ok);
    }
  }

  Verdict v;
  std::ostringstream d;
  bool first = true;
  for (const auto& [name, count] : props) {
    v.pass = v.pass && count.failures == 0 && count.cases >= kAlgebraCases;
    d << (first ? "" : "; ") << name << " " << count.cases - count.failures << "/" << count.cases;
    first = false;
  }
  v.detail = d.str();
  return v;
}

/* 4: assertion mode ======================================================== */

struct Mutation {
  const char* name;
  std::function<void(PjTree&)> apply;
};

std::vector<Mutation> mutations() {
  return {
      {"X projection moved to a sibling", [](PjTree& t) {
         t.nodes[7].projected.clear();
         t.nodes[8].projected.push_back(Variable(1));
       }},
      {"Y projections swapped between siblings", [](PjTree& t) {
         t.nodes[5].projected = {Variable(2), Variable(6)};
         t.nodes[6].projected = {Variable(4)};
       }},
      {"variable projected twice", [](PjTree& t) { t.nodes[9].projected.push_back(Variable(3)); }},
      {"variable never projected", [](PjTree& t) { t.nodes[6].projected.clear(); }},
      {"X node relabelled Y", [](PjTree& t) { t.nodes[7].grade = Grade::Y; }},
      {"Y variable moved into an X node", [](PjTree& t) {
         t.nodes[5].projected = {Variable(4)};
         t.nodes[7].projected.push_back(Variable(2));
       }},
      {"unquantified variable projected", [](PjTree& t) { t.nodes[9].projected.push_back(Variable(7)); }},
      {"leaf detached", [](PjTree& t) { t.nodes[7].children = {5, 6}; }},
      {"leaf shared by two parents", [](PjTree& t) { t.nodes[8].children.push_back(2); }},
      {"leaf points past the clauses", [](PjTree& t) { t.nodes[4].clause = 9; }},
      {"child id out of range", [](PjTree& t) { t.nodes[9].children.push_back(42); }},
      {"root id out of range", [](PjTree& t) { t.root = 15; }},
      {"cycle through the root", [](PjTree& t) { t.nodes[8].children.push_back(9); }},
  };
}

Verdict assertion_mode() {
  int mismatches = 0;
  int assertion_failures = 0;
  std::string first;
  for (int i = 0; i < kFuzzInstances; ++i) {
    std::uint64_t seed = kFuzzSeedBase + static_cast<std::uint64_t>(i);
    Problem p = testing::fuzz_problem(seed);
    PjTree t = plan(p);
    try {
      SolveResult d = debug_assert_mode(p, t);
      SolveResult r = solve(p, t);
      if (d.maximum != r.maximum || !(d.maximizer == r.maximizer)) {
        ++mismatches;
      }
    }
    catch (const DebugAssertionError& e) {
      ++assertion_failures;
      if (first.empty()) {
        first = "seed " + std::to_string(seed) + ": " + e.what();
      }
    }
  }

  Problem p = testing::worked_example();
  std::vector<std::string> caught, missed;
  for (const Mutation& m : mutations()) {
    PjTree t = testing::worked_example_tree();
    m.apply(t);
    try {
      debug_assert_mode(p, t);
      missed.push_back(m.name);
    }
    catch (const DebugAssertionError& e) {
      caught.push_back(std::string(m.name) + " -> " + e.point());
    }
    catch (const std::exception& e) {
      missed.push_back(std::string(m.name) + " (" + e.what() + ")");
    }
  }

  Verdict v;
  v.pass = mismatches == 0 && assertion_failures == 0 && missed.empty() && caught.size() >= 10;
  std::ostringstream d;
  d << kFuzzInstances << " fuzzed solves: " << assertion_failures << " assertion failures, " << mismatches
    << " result mismatches; mutations caught " << caught.size() << "/" << caught.size() + missed.size() << " [";
  for (std::size_t i = 0; i < caught.size(); ++i) {
    d << (i ? "; " : "") << caught[i];
  }
  d << "]";
  for (const std::string& m : missed) {
    d << " missed: " << m;
  }
  if (!first.empty()) {
    d << " first failure " << first;
  }
  v.detail = d.str();
  return v;
}

/* 5: structural guarantees ================================================= */

Verdict structure() {
  int invalid = 0, wide = 0, overlapping = 0, trees = 0;
  for (int i = 0; i < kFuzzInstances; ++i) {
    Problem p = testing::fuzz_problem(kFuzzSeedBase + static_cast<std::uint64_t>(i));
    for (Heuristic h : kHeuristics) {
      for (bool randomized : {false, true}) {
        PjTree t = plan(p, {h, static_cast<std::uint64_t>(i), randomized});
        ++trees;
        if (!tree_violations(t, p).empty() || !graded_violations(t, p.exist, p.random).empty()) {
          ++invalid;
          continue;
        }
        SolveResult r = solve(p, t);
        if (r.stats.max_support > static_cast<std::size_t>(width(t, p))) {
          ++wide;
        }
        if (!testing::siblings_disjoint(t, p)) {
          ++overlapping;
        }
      }
    }
  }
  Verdict v;
  v.pass = invalid == 0 && wide == 0 && overlapping == 0;
  v.detail = std::to_string(trees) + " trees: " + std::to_string(invalid) + " invalid, " + std::to_string(wide) +
             " with a diagram wider than the tree, " + std::to_string(overlapping) + " with overlapping siblings";
  return v;
}

/* 6: harness arithmetic ==================================================== */

Verdict harness() {
  auto rec = [](std::string name, bool solved, double seconds, double answer) {
    BenchRecord r;
    r.name = std::move(name);
    r.solved = solved;
    r.seconds = seconds;
    if (solved) {
      r.answer = answer;
    }
    return r;
  };
  // PAR-2 with a 10 s cap: 1.5 + 2.25 + 3 + 10 + 2 * 10 = 36.75 over 5 records
  BenchSummary s = summarize({rec("a", true, 1.5, 0.5), rec("b", true, 2.25, 0.25), rec("c", true, 3, 1),
                              rec("d", true, 10, 0), rec("e", false, 0, 0)},
                             10);
  bool par2_ok = s.mean_par2 == 7.35 && s.par2.back() == 20 && s.solved == 4;
  bool examples_ok = summarize({rec("a", true, 1, 0), rec("b", true, 2, 0), rec("c", true, 3, 0)}, 1000).mean_par2 ==
                         2.0 &&
                     summarize({rec("a", true, 10, 0), rec("b", false, 0, 0)}, 100).mean_par2 == 105;

  std::map<std::string, double> refs{{"wrong", 0.5}, {"close", 0.25}};
  std::vector<BenchRecord> records{rec("wrong", true, 1, 0.5 + 1e-3), rec("close", true, 1, 0.25 + 1e-9)};
  std::vector<std::string> flagged = apply_reference_answers(records, refs);
  bool dq_ok = flagged == std::vector<std::string>{"wrong"} && !records[0].solved && records[1].solved;

  Verdict v;
  v.pass = par2_ok && examples_ok && dq_ok;
  v.detail = "mean PAR-2 " + fmt("%.17g", s.mean_par2) + " (expected 7.35), flagged " +
             std::to_string(flagged.size()) + " of {wrong by 1e-3, off by 1e-9}";
  return v;
}

/* 7: smoke benchmark ======================================================= */

Verdict smoke() {
  struct Run {
    int bucket;
    int width;
    std::size_t peak;
    double seconds;
    bool solved;
  };
  std::vector<Run> runs;
  for (int bucket : kWidthBuckets) {
    for (int k = 0; k < kSmokePerBucket; ++k) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(bucket * 100 + k));
      BandedProblemParams params;
      params.band = bucket - 1;
      params.num_exist = 40;
      params.clauses_per_window = params.band;
      params.clause_len = 4;
      Problem p = banded_problem(params, rng);
      auto out = run_with_deadline<SolveResult>(
          [&](std::stop_token stop) {
            SolveOptions opts;
            opts.stop = stop;
            PjTree t = plan(p, {}, stop);
            return solve(p, t, opts);
          },
          kSmokeCapSeconds);
      Run r{bucket, -1, 0, out.seconds, !out.timed_out && out.value.has_value()};
      if (out.value) {
        r.width = out.value->stats.width;
        r.peak = out.value->stats.peak_diagram_nodes;
      }
      runs.push_back(r);
    }
  }

  bool all_solved = true;
  bool widths_ok = true;
  bool monotone = true;
  std::size_t prev_max = 0;
  std::ostringstream d;
  d << runs.size() << " instances;";
  for (int bucket : kWidthBuckets) {
    std::size_t lo = SIZE_MAX, hi = 0;
    int wmax = 0;
    double tmax = 0;
    for (const Run& r : runs) {
      if (r.bucket != bucket) {
        continue;
      }
      all_solved = all_solved && r.solved && r.seconds < kSmokeCapSeconds;
      widths_ok = widths_ok && r.width >= 0 && r.width <= std::min(bucket, kSmokeMaxWidth) && r.width > bucket - 5;
      lo = std::min(lo, r.peak);
      hi = std::max(hi, r.peak);
      wmax = std::max(wmax, r.width);
      tmax = std::max(tmax, r.seconds);
    }
    monotone = monotone && lo > prev_max;
    prev_max = hi;
    d << " width<=" << bucket << ": max width " << wmax << ", peak nodes " << lo << ".." << hi << ", max "
      << fmt("%.2f", tmax) << " s;";
  }
  Verdict v;
  v.pass = runs.size() >= 20 && all_solved && widths_ok && monotone;
  v.detail = d.str() + (monotone ? " peaks strictly increase across buckets" : " peaks NOT monotone");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "worked example", worked_example},
      {2, "oracle-equivalence fuzz", fuzz_agreement},
      {3, "algebra properties", algebra},
      {4, "assertion mode", assertion_mode},
      {5, "structural guarantees", structure},
      {6, "harness arithmetic", harness},
      {7, "smoke benchmark", smoke},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    }
    catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
