#ifndef QBO_HARNESS_HPP
#define QBO_HARNESS_HPP

// Benchmark sweeps: functions x algorithms x trials, with paired start points
// per (function, trial), raw per-trial rows and per-pair summaries.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qbo/benchfn.hpp"
#include "qbo/error.hpp"
#include "qbo/optimizers.hpp"

namespace qbo {

inline constexpr std::uint64_t kTrialSeedStride = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) noexcept {
  return base_seed ^ (trial * kTrialSeedStride);
}

struct FunctionEntry {
  std::string name;
  std::size_t dimension = 2;
};

struct ExperimentSpec {
  std::vector<FunctionEntry> functions;
  std::vector<AlgorithmParams> algorithms;
  std::uint64_t trials = 50;
  std::uint64_t base_seed = 0;
  std::uint64_t budget = 20000;
  double success_tolerance = 1e-2;
  unsigned workers = 1;
  // Off by default: wall-clock times make otherwise identical CSVs differ.
  bool record_wall_time = false;

  /// Fail-fast validation; nothing runs if this throws.
  void validate() const {
    auto bad = [](const std::string& what) { throw Error(Errc::configuration, what); };
    if (functions.empty()) bad("no functions selected");
    if (algorithms.empty()) bad("no algorithms selected");
    if (trials < 1) bad("trials must be >= 1");
    if (budget < 1) bad("budget must be >= 1");
    if (!(success_tolerance > 0.0)) bad("success_tolerance must be > 0");
    for (const auto& f : functions) {
      try {
        (void)lookup(f.name, f.dimension);
      } catch (const Error& e) {
        bad(std::string("functions: ") + e.what());
      }
    }
    for (const auto& a : algorithms) qbo::validate(a);
  }
};

struct RawRow {
  std::string function;
  std::string algorithm;
  std::size_t dimension = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::uint64_t evaluations = 0;
  double final_value = 0.0;
  double improvement_ratio = 0.0;
  bool success = false;
  double wall_ms = 0.0;

  friend bool operator==(const RawRow&, const RawRow&) = default;
};

struct SummaryRow {
  std::string function;
  std::string algorithm;
  double median_iterations = 0.0;
  bool median_budget_capped = false;  // no successful trial; median is the budget
  double mean_improvement_ratio = 0.0;
  double success_rate = 0.0;
  std::uint64_t trials = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Median iterations over successful trials, mean improvement ratio over all
/// trials, success rate. Groups keep first-appearance order.
inline std::vector<SummaryRow> summarize(const std::vector<RawRow>& rows, std::uint64_t budget) {
  if (rows.empty()) throw Error(Errc::summary, "no raw rows to summarize");
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const RawRow*>> groups;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.function, r.algorithm);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    SummaryRow s;
    s.function = key.first;
    s.algorithm = key.second;
    s.trials = g.size();
    std::vector<double> its;
    double ratio_sum = 0.0;
    for (const RawRow* r : g) {
      ratio_sum += r->improvement_ratio;
      if (r->success) its.push_back(static_cast<double>(r->iterations));
    }
    s.mean_improvement_ratio = ratio_sum / static_cast<double>(g.size());
    s.success_rate = static_cast<double>(its.size()) / static_cast<double>(g.size());
    if (its.empty()) {
      s.median_iterations = static_cast<double>(budget);
      s.median_budget_capped = true;
    } else {
      std::sort(its.begin(), its.end());
      const std::size_t m = its.size() / 2;
      s.median_iterations = its.size() % 2 ? its[m] : 0.5 * (its[m - 1] + its[m]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct ExperimentResult {
  std::vector<RawRow> rows;
  std::vector<SummaryRow> summary;
};

/// Runs every (function, algorithm, trial). Trial t of every algorithm on a
/// function starts from the same point (seeded by trial_seed(base_seed, t)).
/// Rows are ordered by (function, algorithm, trial) in spec order regardless
/// of worker scheduling.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t f, a;
    std::uint64_t trial;
  };
  std::vector<BenchmarkFunction> fns;
  for (const auto& f : spec.functions) fns.push_back(lookup(f.name, f.dimension));
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < fns.size(); ++f)
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
      for (std::uint64_t t = 0; t < spec.trials; ++t) jobs.push_back({f, a, t});

  ExperimentResult result;
  result.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) {
      const Job& j = jobs[i];
      const BenchmarkFunction& fn = fns[j.f];
      try {
        const std::uint64_t seed = trial_seed(spec.base_seed, j.trial);
        const auto t0 = std::chrono::steady_clock::now();
        const RunRecord rec = run(spec.algorithms[j.a], fn, spec.budget, seed);
        const auto t1 = std::chrono::steady_clock::now();
        RawRow& r = result.rows[i];
        r.function = fn.name;
        r.algorithm = std::string(to_string(rec.algorithm));
        r.dimension = fn.dimension;
        r.trial = j.trial;
        r.seed = seed;
        r.iterations = rec.iterations_to_converge;
        r.evaluations = rec.evaluations;
        r.final_value = rec.final_value;
        r.improvement_ratio = rec.improvement_ratio;
        r.success = rec.final_value <= fn.global_min_value + spec.success_tolerance;
        if (spec.record_wall_time) r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failed.exchange(true)) failure = e.what();
      }
    }
  };

  const unsigned n_workers = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failed) throw Error(Errc::configuration, "trial failed: " + failure);
  result.summary = summarize(result.rows, spec.budget);
  return result;
}

// ---------------------------------------------------------------------------
// Emission

inline constexpr const char* kRawCsvHeader =
    "function,algorithm,dimension,trial,seed,iterations,evaluations,final_value,improvement_ratio,success,wall_ms";

inline void write_raw_csv(std::ostream& os, const std::vector<RawRow>& rows) {
  os << kRawCsvHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%llu,%llu,%llu,%llu,%.17g,%.17g,%d,%.3f\n", r.function.c_str(),
                  r.algorithm.c_str(), r.dimension, static_cast<unsigned long long>(r.trial),
                  static_cast<unsigned long long>(r.seed), static_cast<unsigned long long>(r.iterations),
                  static_cast<unsigned long long>(r.evaluations), r.final_value, r.improvement_ratio,
                  r.success ? 1 : 0, r.wall_ms);
    os << buf;
  }
}

/// Inverse of write_raw_csv.
inline std::vector<RawRow> read_raw_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRawCsvHeader) throw Error(Errc::io, "raw CSV header mismatch");
  std::vector<RawRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 11) throw Error(Errc::io, "raw CSV row has " + std::to_string(cells.size()) + " cells");
    try {
      RawRow r;
      r.function = cells[0];
      r.algorithm = cells[1];
      r.dimension = std::stoull(cells[2]);
      r.trial = std::stoull(cells[3]);
      r.seed = std::stoull(cells[4]);
      r.iterations = std::stoull(cells[5]);
      r.evaluations = std::stoull(cells[6]);
      r.final_value = std::stod(cells[7]);
      r.improvement_ratio = std::stod(cells[8]);
      r.success = cells[9] == "1";
      r.wall_ms = std::stod(cells[10]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(Errc::io, "malformed raw CSV row: " + line);
    }
  }
  return rows;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "function,algorithm,median_iterations,median_budget_capped,mean_improvement_ratio,success_rate,trials\n";
  char buf[384];
  for (const auto& s : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%d,%.17g,%.17g,%llu\n", s.function.c_str(), s.algorithm.c_str(),
                  s.median_iterations, s.median_budget_capped ? 1 : 0, s.mean_improvement_ratio, s.success_rate,
                  static_cast<unsigned long long>(s.trials));
    os << buf;
  }
}

inline nlohmann::ordered_json summary_json(const std::vector<SummaryRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : rows) {
    arr.push_back({{"function", s.function},
                   {"algorithm", s.algorithm},
                   {"median_iterations", s.median_iterations},
                   {"median_budget_capped", s.median_budget_capped},
                   {"mean_improvement_ratio", s.mean_improvement_ratio},
                   {"success_rate", s.success_rate},
                   {"trials", s.trials}});
  }
  return arr;
}

}  // namespace qbo

#endif  // QBO_HARNESS_HPP
