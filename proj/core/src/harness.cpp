#include "dper/harness.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dper {

double par2(const BenchRecord& r, double cap) {
  return r.solved && r.seconds <= cap ? r.seconds : 2 * cap;
}

BenchSummary summarize(std::vector<BenchRecord> records, double cap) {
  if (!(cap > 0)) {
    throw std::invalid_argument("time cap must be positive");
  }
  BenchSummary s;
  s.cap = cap;
  s.records = std::move(records);
  for (const BenchRecord& r : s.records) {
    s.par2.push_back(par2(r, cap));
    if (r.solved && r.seconds <= cap) {
      ++s.solved;
    }
  }
  const std::size_t n = s.par2.size();
  if (n == 0) {
    return s;
  }
  s.mean_par2 = std::accumulate(s.par2.begin(), s.par2.end(), 0.0) / static_cast<double>(n);
  s.ci_low = s.ci_high = s.mean_par2;
  if (n >= 2) {
    double ss = 0;
    for (double v : s.par2) {
      ss += (v - s.mean_par2) * (v - s.mean_par2);
    }
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    boost::math::students_t dist(static_cast<double>(n - 1));
    double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    double half = t * sd / std::sqrt(static_cast<double>(n));
    s.ci_low = s.mean_par2 - half;
    s.ci_high = s.mean_par2 + half;
  }
  return s;
}

std::map<std::string, double> read_reference_answers(std::istream& in) {
  std::map<std::string, double> refs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string name;
    if (!(fields >> name)) {
      continue;
    }
    double answer = 0;
    std::string extra;
    if (!(fields >> answer) || (fields >> extra)) {
      throw std::runtime_error("reference answers, line " + std::to_string(line_no) + ": expected 'name answer'");
    }
    refs[name] = answer;
  }
  return refs;
}

bool answers_disagree(double ours, double reference, double tol) {
  return !(std::fabs(ours - reference) <= tol);
}

std::vector<std::string> apply_reference_answers(std::vector<BenchRecord>& records,
                                                 const std::map<std::string, double>& refs, double tol) {
  std::vector<std::string> flagged;
  for (BenchRecord& r : records) {
    auto it = refs.find(r.name);
    if (!r.solved || !r.answer || it == refs.end()) {
      continue;
    }
    if (answers_disagree(*r.answer, it->second, tol)) {
      r.solved = false;
      r.status = "wrong";
      flagged.push_back(r.name);
    }
  }
  return flagged;
}

void write_csv(std::ostream& out, const BenchSummary& s) {
  char buf[64];
  out << "name,solved,seconds,par2,answer,width\n";
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const BenchRecord& r = s.records[i];
    out << r.name << ',' << (r.solved ? 1 : 0) << ',';
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", r.seconds, s.par2[i]);
    out << buf;
    if (r.answer) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.answer);
      out << buf;
    }
    out << ',';
    if (r.width) {
      out << *r.width;
    }
    out << '\n';
  }
}

}  // namespace dper
