#pragma once

// Benchmark bookkeeping: PAR-2 scoring, reference-answer checks, CSV output
// and deadline-bounded runs.

#include <chrono>
#include <cmath>
#include <future>
#include <iosfwd>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace dper {

/// Reference answers may differ from ours by at most this much.
inline constexpr double kAnswerTolerance = 1e-6;

struct BenchRecord {
  std::string name;
  bool solved = false;
  double seconds = 0;
  std::optional<double> answer;
  std::optional<int> width;
  std::size_t peak_nodes = 0;
  /// ok, timeout, resource, error or wrong.
  std::string status = "ok";
};

/// seconds when solved within the cap, 2 * cap otherwise.
double par2(const BenchRecord& r, double cap);

struct BenchSummary {
  std::vector<BenchRecord> records;
  std::vector<double> par2;
  double cap = 0;
  double mean_par2 = 0;
  /// Student-t 95% interval of the mean; collapses to the mean below two records.
  double ci_low = 0;
  double ci_high = 0;
  std::size_t solved = 0;
};

BenchSummary summarize(std::vector<BenchRecord> records, double cap);

/// Whitespace-separated "name answer" lines; '#' starts a comment.
std::map<std::string, double> read_reference_answers(std::istream& in);

bool answers_disagree(double ours, double reference, double tol = kAnswerTolerance);

/// Marks every solved record whose answer disagrees with its reference as
/// unsolved with status "wrong". Returns the names flagged.
std::vector<std::string> apply_reference_answers(std::vector<BenchRecord>& records,
                                                 const std::map<std::string, double>& refs,
                                                 double tol = kAnswerTolerance);

/// Columns: name,solved,seconds,par2,answer,width.
void write_csv(std::ostream& out, const BenchSummary& s);

template <typename T>
struct DeadlineOutcome {
  std::optional<T> value;
  bool timed_out = false;
  double seconds = 0;
};

/// Runs work(stop_token) on a worker thread. Past the deadline the token is
/// signalled and the worker joined; a result that arrives late still counts
/// as a timeout but is kept in `value`. Exceptions thrown by work propagate
/// unless the run timed out.
template <typename T, typename Work>
DeadlineOutcome<T> run_with_deadline(Work&& work, double deadline_seconds) {
  using Clock = std::chrono::steady_clock;
  std::packaged_task<T(std::stop_token)> task(std::forward<Work>(work));
  std::future<T> result = task.get_future();
  auto start = Clock::now();
  std::jthread worker([&task](std::stop_token stop) { task(stop); });

  DeadlineOutcome<T> out;
  auto budget = std::chrono::duration<double>(deadline_seconds);
  bool ready = result.wait_for(budget) == std::future_status::ready;
  if (!ready) {
    worker.request_stop();
  }
  worker.join();
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.timed_out = !ready || out.seconds > deadline_seconds;
  try {
    out.value = result.get();
  }
  catch (...) {
    if (!out.timed_out) {
      throw;
    }
  }
  return out;
}

}  // namespace dper
