// dper: exact exist-random SSAT by dynamic programming over graded
// project-join trees.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dper/executor.hpp"
#include "dper/formula.hpp"
#include "dper/harness.hpp"
#include "dper/oracle.hpp"
#include "dper/planner.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dper;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDeadline = 2;
constexpr int kExitResource = 3;

constexpr int kSchemaVersion = 1;
constexpr double kVerifyTolerance = 1e-9;

struct RunConfig {
  std::string input;
  std::string dir;
  std::string heuristic = "min-fill";
  std::uint64_t seed = 0;
  double timeout = 0;  // 0: no deadline
  std::string format = "json";
  bool debug_assert = false;
  bool randomize_ties = false;
  bool free_as_exist = false;
  std::string tree_out;
  std::string ref_answers;
  std::string csv_out;
  unsigned jobs = 1;
  std::size_t node_limit = 0;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t node_limit_from_env() {
  const char* raw = std::getenv("DPER_NODE_LIMIT");
  if (raw == nullptr || *raw == '\0') {
    return 0;
  }
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0') {
    throw std::invalid_argument(std::string("DPER_NODE_LIMIT is not a number: ") + raw);
  }
  return static_cast<std::size_t>(v);
}

/* pipeline ================================================================= */

enum class Status { Ok, Timeout, Resource };

struct Outcome {
  Status status = Status::Ok;
  std::optional<SolveResult> result;
  std::optional<PjTree> tree;
  SolveStats stats;
  std::string message;
};

PlanOptions plan_options(const RunConfig& cfg) {
  return PlanOptions{parse_heuristic(cfg.heuristic), cfg.seed, cfg.randomize_ties};
}

Outcome run_pipeline(const Problem& p, const RunConfig& cfg, std::stop_token stop) {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  try {
    out.tree = plan(p, plan_options(cfg), stop);
  }
  catch (const Cancelled&) {
    out.status = Status::Timeout;
    out.message = "deadline reached while planning";
    return out;
  }
  double plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.stats.plan_seconds = plan_seconds;
  out.stats.width = width(*out.tree, p);
  out.stats.tree_nodes = out.tree->nodes.size();

  SolveOptions opts;
  opts.debug_assert = cfg.debug_assert;
  opts.node_limit = cfg.node_limit;
  opts.stop = stop;
  try {
    SolveResult r = solve(p, *out.tree, opts);
    r.stats.plan_seconds = plan_seconds;
    out.stats = r.stats;
    out.result = std::move(r);
  }
  catch (const SolveInterrupted& e) {
    out.status = e.kind() == SolveInterrupted::Kind::Deadline ? Status::Timeout : Status::Resource;
    out.stats = e.stats();
    out.stats.plan_seconds = plan_seconds;
    out.message = e.what();
  }
  return out;
}

Outcome run_bounded(const Problem& p, const RunConfig& cfg) {
  if (cfg.timeout <= 0) {
    return run_pipeline(p, cfg, {});
  }
  auto bounded = run_with_deadline<Outcome>([&](std::stop_token stop) { return run_pipeline(p, cfg, stop); },
                                            cfg.timeout);
  if (!bounded.timed_out) {
    return std::move(*bounded.value);
  }
  Outcome out;
  if (bounded.value) {
    out = std::move(*bounded.value);
  }
  out.status = Status::Timeout;
  out.result.reset();
  out.message = "deadline of " + fmt17(cfg.timeout) + " s reached";
  return out;
}

json stats_json(const SolveStats& s) {
  return json{{"width", s.width},
              {"tree_nodes", s.tree_nodes},
              {"store_nodes", s.store_nodes},
              {"peak_diagram_nodes", s.peak_diagram_nodes},
              {"max_support", s.max_support},
              {"dsgn_entries", s.dsgn_entries}};
}

std::string status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Timeout: return "timeout";
    case Status::Resource: return "resource";
  }
  return "?";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) {
    throw std::runtime_error("cannot write " + path);
  }
}

/* subcommands ============================================================== */

int cmd_solve(const RunConfig& cfg) {
  Problem p = parse_problem_file(cfg.input, ParseOptions{cfg.free_as_exist});
  Outcome out = run_bounded(p, cfg);
  if (out.tree && !cfg.tree_out.empty()) {
    write_text_file(cfg.tree_out, write_tree(*out.tree, p));
  }

  json report{{"schema", kSchemaVersion}, {"status", status_name(out.status)}};
  std::optional<double> wc;
  if (out.result) {
    const SolveResult& r = *out.result;
    if (p.random.size() <= kMaxEnumeratedRandom) {
      wc = weighted_count(p, r.maximizer);
      if (std::fabs(*wc - r.maximum) > kVerifyTolerance) {
        std::cerr << "warning: maximizer evaluates to " << fmt17(*wc) << ", not " << fmt17(r.maximum) << "\n";
      }
    }
    report["maximum"] = r.maximum;
    report["maximizer"] = r.maximizer.literals();
    json verified{{"checked", wc.has_value()}};
    if (wc) {
      verified["weighted_count"] = *wc;
      verified["difference"] = std::fabs(*wc - r.maximum);
    }
    report["verified"] = verified;
  }
  else {
    report["message"] = out.message;
  }
  report["width"] = out.stats.width;
  report["heuristic"] = std::string(heuristic_name(parse_heuristic(cfg.heuristic)));
  report["timings"] = json{{"plan_seconds", out.stats.plan_seconds}, {"exec_seconds", out.stats.exec_seconds}};
  report["stats"] = stats_json(out.stats);

  if (cfg.format == "json") {
    std::cout << report.dump(2) << "\n";
  }
  else {
    std::cout << "status " << status_name(out.status) << "\n";
    if (out.result) {
      std::cout << "maximum " << fmt17(out.result->maximum) << "\n";
      std::cout << "maximizer";
      for (int lit : out.result->maximizer.literals()) {
        std::cout << ' ' << lit;
      }
      std::cout << "\n";
      std::cout << "verified " << (wc ? fmt17(*wc) : std::string("skipped")) << "\n";
    }
    else {
      std::cout << "message " << out.message << "\n";
    }
    std::cout << "width " << out.stats.width << "\n";
    std::cout << "plan_seconds " << fmt17(out.stats.plan_seconds) << "\n";
    std::cout << "exec_seconds " << fmt17(out.stats.exec_seconds) << "\n";
    std::cout << "peak_diagram_nodes " << out.stats.peak_diagram_nodes << "\n";
    std::cout << "store_nodes " << out.stats.store_nodes << "\n";
  }
  switch (out.status) {
    case Status::Ok: return kExitOk;
    case Status::Timeout: return kExitDeadline;
    case Status::Resource: return kExitResource;
  }
  return kExitOk;
}

int cmd_plan(const RunConfig& cfg) {
  Problem p = parse_problem_file(cfg.input, ParseOptions{cfg.free_as_exist});
  PjTree t = plan(p, plan_options(cfg));
  int w = width(t, p);
  std::string text = write_tree(t, p);
  if (cfg.tree_out.empty()) {
    std::cout << text;
    std::cerr << "width " << w << "\n";
  }
  else {
    write_text_file(cfg.tree_out, text);
    if (cfg.format == "json") {
      std::cout << json{{"schema", kSchemaVersion}, {"width", w}, {"tree_nodes", t.nodes.size()},
                        {"tree_out", cfg.tree_out}}
                       .dump(2)
                << "\n";
    }
    else {
      std::cout << "width " << w << "\n";
    }
  }
  return kExitOk;
}

std::vector<fs::path> bench_inputs(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".cnf" || ext == ".sdimacs" || ext == ".ssat" || ext == ".dimacs")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

BenchRecord bench_one(const fs::path& path, const RunConfig& cfg) {
  BenchRecord r;
  r.name = path.filename().string();
  try {
    Problem p = parse_problem_file(path.string(), ParseOptions{cfg.free_as_exist});
    Outcome out = run_bounded(p, cfg);
    r.peak_nodes = out.stats.peak_diagram_nodes;
    if (out.tree) {
      r.width = out.stats.width;
    }
    r.status = status_name(out.status);
    r.seconds = out.stats.plan_seconds + out.stats.exec_seconds;
    if (out.result) {
      r.solved = r.seconds <= cfg.timeout;
      r.answer = out.result->maximum;
      if (!r.solved) {
        r.status = "timeout";
      }
    }
    else if (out.status == Status::Timeout) {
      r.seconds = cfg.timeout;
    }
  }
  catch (const std::exception& e) {
    r.status = "error";
    std::cerr << r.name << ": " << e.what() << "\n";
  }
  return r;
}

int cmd_bench(const RunConfig& cfg) {
  std::vector<fs::path> files = bench_inputs(cfg.dir);
  std::vector<BenchRecord> records(files.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> workers;
    unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(std::max<std::size_t>(1, files.size()))));
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
          records[i] = bench_one(files[i], cfg);
        }
      });
    }
  }

  std::vector<std::string> flagged;
  if (!cfg.ref_answers.empty()) {
    std::ifstream in(cfg.ref_answers);
    if (!in) {
      throw std::runtime_error("cannot open " + cfg.ref_answers);
    }
    flagged = apply_reference_answers(records, read_reference_answers(in));
    for (const std::string& name : flagged) {
      std::cerr << name << ": answer disagrees with the reference by more than " << kAnswerTolerance << "\n";
    }
  }
  BenchSummary s = summarize(std::move(records), cfg.timeout);

  std::ostringstream csv;
  write_csv(csv, s);
  if (!cfg.csv_out.empty()) {
    write_text_file(cfg.csv_out, csv.str());
  }
  if (cfg.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < s.records.size(); ++i) {
      const BenchRecord& r = s.records[i];
      json row{{"name", r.name}, {"solved", r.solved}, {"seconds", r.seconds}, {"par2", s.par2[i]},
               {"status", r.status}, {"peak_diagram_nodes", r.peak_nodes}};
      row["answer"] = r.answer ? json(*r.answer) : json(nullptr);
      row["width"] = r.width ? json(*r.width) : json(nullptr);
      rows.push_back(row);
    }
    std::cout << json{{"schema", kSchemaVersion},
                      {"cap_seconds", s.cap},
                      {"records", rows},
                      {"solved", s.solved},
                      {"mean_par2", s.mean_par2},
                      {"ci95", {s.ci_low, s.ci_high}},
                      {"disqualified", flagged}}
                     .dump(2)
              << "\n";
  }
  else {
    if (cfg.csv_out.empty()) {
      std::cout << csv.str();
    }
    std::cout << "# solved " << s.solved << "/" << s.records.size() << "\n";
    std::cout << "# mean_par2 " << fmt17(s.mean_par2) << "\n";
    std::cout << "# ci95 " << fmt17(s.ci_low) << " " << fmt17(s.ci_high) << "\n";
  }
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg) {
  Problem p = parse_problem_file(cfg.input, ParseOptions{cfg.free_as_exist});
  OracleResult r = enumerate_solve(p);
  json maximizers = json::array();
  for (const Assignment& tau : r.maximizers) {
    maximizers.push_back(tau.literals());
  }
  if (cfg.format == "json") {
    std::cout << json{{"schema", kSchemaVersion}, {"maximum", r.maximum}, {"maximizers", maximizers}}.dump(2)
              << "\n";
  }
  else {
    std::cout << "maximum " << fmt17(r.maximum) << "\n";
    for (const Assignment& tau : r.maximizers) {
      std::cout << "maximizer";
      for (int lit : tau.literals()) {
        std::cout << ' ' << lit;
      }
      std::cout << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact exist-random SSAT solver over graded project-join trees"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--heuristic", cfg.heuristic, "Elimination heuristic")
        ->check(CLI::IsMember({"min-fill", "min-degree", "lex"}));
    sub->add_option("--seed", cfg.seed, "Seed for randomized tie-breaking");
    sub->add_flag("--randomize-ties", cfg.randomize_ties, "Break heuristic ties with the seed");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    sub->add_flag("--free-as-exist", cfg.free_as_exist, "Treat unquantified variables as existential");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  solve_cmd->add_option("--input", cfg.input, "ER-DIMACS file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--timeout", cfg.timeout, "Deadline for planning and execution, seconds")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--debug-assert", cfg.debug_assert, "Check every valuation invariant (small instances)");
  solve_cmd->add_option("--tree-out", cfg.tree_out, "Write the project-join tree here");
  add_common(solve_cmd);

  CLI::App* plan_cmd = app.add_subcommand("plan", "Build a graded project-join tree");
  plan_cmd->add_option("--input", cfg.input, "ER-DIMACS file")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--tree-out", cfg.tree_out, "Tree file; stdout when omitted");
  add_common(plan_cmd);

  CLI::App* bench_cmd = app.add_subcommand("bench", "Solve every instance in a directory and score PAR-2");
  bench_cmd->add_option("--dir", cfg.dir, "Directory of .cnf/.sdimacs/.ssat/.dimacs files")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--timeout", cfg.timeout, "Per-instance time cap, seconds")
      ->required()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--ref-answers", cfg.ref_answers, "File of 'name answer' lines")->check(CLI::ExistingFile);
  bench_cmd->add_option("--jobs", cfg.jobs, "Parallel workers")->check(CLI::Range(1u, 256u));
  bench_cmd->add_option("--csv", cfg.csv_out, "Write the per-instance CSV here");
  bench_cmd->add_flag("--debug-assert", cfg.debug_assert, "Check every valuation invariant (small instances)");
  add_common(bench_cmd);

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Brute-force enumeration (small instances)");
  oracle_cmd->group("");
  oracle_cmd->add_option("--input", cfg.input, "ER-DIMACS file")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  oracle_cmd->add_flag("--free-as-exist", cfg.free_as_exist, "Treat unquantified variables as existential");

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    // help and version are successes; every usage error maps to 1
    return app.exit(e) == 0 ? 0 : 1;
  }
  // bench prints CSV unless asked otherwise; the rest default to JSON
  if (app.got_subcommand(bench_cmd) && bench_cmd->count("--format") == 0) {
    cfg.format = "text";
  }

  try {
    cfg.node_limit = node_limit_from_env();
    if (app.got_subcommand(solve_cmd)) {
      return cmd_solve(cfg);
    }
    if (app.got_subcommand(plan_cmd)) {
      return cmd_plan(cfg);
    }
    if (app.got_subcommand(bench_cmd)) {
      return cmd_bench(cfg);
    }
    return cmd_oracle(cfg);
  }
  catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
  }
  catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
  }
  catch (const TreeError& e) {
    std::cerr << e.what() << "\n";
  }
  catch (const DebugAssertionError& e) {
    std::cerr << e.what() << "\n";
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitInput;
}
