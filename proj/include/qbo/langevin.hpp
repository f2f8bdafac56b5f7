#ifndef QBO_LANGEVIN_HPP
#define QBO_LANGEVIN_HPP

// Euler-Maruyama integration of dX = -f'(X) dt + sqrt(C_q) / Q_p(t) dW and
// ensemble statistics over independent paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qbo/error.hpp"
#include "qbo/potential.hpp"
#include "qbo/quantize.hpp"
#include "qbo/rng.hpp"

namespace qbo {

/// Start distribution of every path: a point mass at `lo`, or uniform on [lo, hi].
struct InitialLaw {
  enum class Kind { point, uniform };
  Kind kind = Kind::point;
  double lo = 0.0;
  double hi = 0.0;

  static InitialLaw point(double x) { return {Kind::point, x, x}; }
  static InitialLaw uniform(double lo, double hi) {
    detail::require(hi > lo, Errc::invalid_input, "uniform initial law needs hi > lo");
    return {Kind::uniform, lo, hi};
  }

  double sample(Rng& rng) const { return kind == Kind::point ? lo : rng.uniform(lo, hi); }
};

/// `drift(x, t)` is -f'(x); `noise_scale(t)` is sqrt(C_q) / Q_p(t), nonnegative
/// and nonincreasing.
template <typename Drift, typename Noise>
struct SdeConfig {
  Drift drift;
  Noise noise_scale;
  double dt = 1e-3;
  std::uint64_t steps = 0;
  InitialLaw initial = InitialLaw::point(0.0);
};

template <typename Drift, typename Noise>
SdeConfig(Drift, Noise, double, std::uint64_t, InitialLaw) -> SdeConfig<Drift, Noise>;

/// Gradient drift of a 1-D potential with constant noise sqrt(c_q) / qp.
inline auto make_sde_config(const Potential1D& f, double c_q, double qp, double dt, std::uint64_t steps,
                            InitialLaw initial) {
  detail::require(c_q >= 0.0, Errc::invalid_input, "sde: c_q must be nonnegative");
  detail::require(qp > 0.0, Errc::invalid_input, "sde: qp must be positive");
  const double sigma = std::sqrt(c_q) / qp;
  auto slope = f.slope;
  return SdeConfig{[slope](double x, double) { return -slope(x); }, [sigma](double) { return sigma; }, dt, steps,
                   initial};
}

/// Same, with Q_p(t) taken from a schedule whose index advances every
/// `time_per_index` units of time.
inline auto make_sde_config(const Potential1D& f, double c_q, QuantizationSchedule schedule, double time_per_index,
                            double dt, std::uint64_t steps, InitialLaw initial) {
  detail::require(c_q >= 0.0, Errc::invalid_input, "sde: c_q must be nonnegative");
  detail::require(time_per_index > 0.0, Errc::invalid_input, "sde: time_per_index must be positive");
  schedule.validate();
  auto slope = f.slope;
  const double root_cq = std::sqrt(c_q);
  return SdeConfig{[slope](double x, double) { return -slope(x); },
                   [root_cq, schedule, time_per_index](double t) {
                     const auto idx = static_cast<std::uint64_t>(std::floor(t / time_per_index));
                     return root_cq / qp_at(schedule, idx);
                   },
                   dt, steps, initial};
}

namespace detail {

/// Step with dt already validated and sqrt(dt) precomputed.
template <typename Config>
double em_update(double x, double t, const Config& cfg, double sqrt_dt, double xi) {
  const double a = cfg.drift(x, t);
  if (!std::isfinite(a)) [[unlikely]] {
    std::ostringstream msg;
    msg << "non-finite drift at x=" << x << ", t=" << t;
    throw Error(Errc::integration, msg.str());
  }
  return x + a * cfg.dt + cfg.noise_scale(t) * sqrt_dt * xi;
}

}  // namespace detail

/// x' = x + drift(x, t) dt + noise_scale(t) sqrt(dt) xi, with xi supplied.
template <typename Config>
double em_step_with(double x, double t, const Config& cfg, double xi) {
  detail::require(cfg.dt > 0.0, Errc::invalid_input, "em_step: dt must be positive");
  return detail::em_update(x, t, cfg, std::sqrt(cfg.dt), xi);
}

template <typename Config>
double em_step(double x, double t, const Config& cfg, Rng& rng) {
  return em_step_with(x, t, cfg, rng.normal());
}

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  double t = 0.0;
  std::vector<double> mass;  // fraction of all paths per bin
  double below = 0.0;        // tail mass left of lo
  double above = 0.0;        // tail mass right of hi

  std::size_t bins() const noexcept { return mass.size(); }
  double bin_width() const noexcept { return (hi - lo) / static_cast<double>(mass.size()); }
  double center(std::size_t j) const noexcept { return lo + (static_cast<double>(j) + 0.5) * bin_width(); }
  double tail_mass() const noexcept { return below + above; }
};

struct EnsembleOptions {
  double grid_lo = -5.0;
  double grid_hi = 5.0;
  std::size_t bins = 512;
  std::vector<double> snapshot_times;  // empty: the horizon only
  std::uint64_t record_every = 0;      // 0: about 1000 moment rows
};

struct MomentRow {
  double t = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct EnsembleResult {
  std::vector<MomentRow> moments;
  std::vector<Histogram> snapshots;
  std::vector<std::string> warnings;
  std::uint64_t paths = 0;

  const MomentRow& terminal() const { return moments.back(); }
};

/// Integrates `n_paths` independent paths to `horizon`. Path p draws from the
/// stream derive_seed(seed, p), so results do not depend on evaluation order.
template <typename Config>
EnsembleResult run_ensemble(const Config& cfg, std::uint64_t n_paths, double horizon, std::uint64_t seed,
                            EnsembleOptions opt = {}) {
  detail::require(n_paths >= 100, Errc::invalid_input, "run_ensemble: need at least 100 paths");
  detail::require(cfg.dt > 0.0, Errc::invalid_input, "run_ensemble: dt must be positive");
  detail::require(horizon > 0.0, Errc::invalid_input, "run_ensemble: horizon must be positive");
  detail::require(opt.bins >= 1 && opt.grid_hi > opt.grid_lo, Errc::invalid_input, "run_ensemble: bad histogram grid");

  const auto steps = static_cast<std::uint64_t>(std::llround(horizon / cfg.dt));
  detail::require(steps >= 1, Errc::invalid_input, "run_ensemble: horizon shorter than one step");
  const std::uint64_t every = opt.record_every ? opt.record_every : std::max<std::uint64_t>(1, steps / 1000);
  if (opt.snapshot_times.empty()) opt.snapshot_times.push_back(horizon);

  std::vector<std::uint64_t> record_steps;
  for (std::uint64_t k = 0; k <= steps; k += every) record_steps.push_back(k);
  if (record_steps.back() != steps) record_steps.push_back(steps);

  std::vector<std::uint64_t> snap_steps;
  EnsembleResult out;
  out.paths = n_paths;
  for (double ts : opt.snapshot_times) {
    detail::require(ts >= 0.0 && ts <= horizon * (1 + 1e-12), Errc::invalid_input, "snapshot time outside horizon");
    snap_steps.push_back(static_cast<std::uint64_t>(std::llround(ts / cfg.dt)));
    Histogram h;
    h.lo = opt.grid_lo;
    h.hi = opt.grid_hi;
    h.t = static_cast<double>(snap_steps.back()) * cfg.dt;
    h.mass.assign(opt.bins, 0.0);
    out.snapshots.push_back(std::move(h));
  }

  // Welford accumulators per recorded step; per-bin counts as doubles.
  std::vector<double> mean(record_steps.size(), 0.0), m2(record_steps.size(), 0.0);
  const double inv_w = static_cast<double>(opt.bins) / (opt.grid_hi - opt.grid_lo);

  const double sqrt_dt = std::sqrt(cfg.dt);
  // Steps at which anything is observed, ascending and unique.
  std::vector<std::uint64_t> events(record_steps);
  events.insert(events.end(), snap_steps.begin(), snap_steps.end());
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  for (std::uint64_t p = 0; p < n_paths; ++p) {
    Rng rng(derive_seed(seed, p));
    double x = cfg.initial.sample(rng);
    const double count = static_cast<double>(p + 1);
    std::size_t rec = 0;
    auto observe = [&](std::uint64_t k) {
      while (rec < record_steps.size() && record_steps[rec] == k) {
        const double d = x - mean[rec];
        mean[rec] += d / count;
        m2[rec] += d * (x - mean[rec]);
        ++rec;
      }
      for (std::size_t s = 0; s < snap_steps.size(); ++s) {
        if (snap_steps[s] != k) continue;
        Histogram& h = out.snapshots[s];
        if (x < h.lo) {
          h.below += 1.0;
        } else if (x >= h.hi) {
          h.above += 1.0;
        } else {
          auto j = static_cast<std::size_t>((x - h.lo) * inv_w);
          if (j >= h.mass.size()) j = h.mass.size() - 1;
          h.mass[j] += 1.0;
        }
      }
    };
    std::uint64_t k = 0;
    for (std::uint64_t next : events) {
      for (; k < next; ++k) x = detail::em_update(x, static_cast<double>(k) * cfg.dt, cfg, sqrt_dt, rng.normal());
      observe(k);
    }
  }

  for (std::size_t r = 0; r < record_steps.size(); ++r)
    out.moments.push_back({static_cast<double>(record_steps[r]) * cfg.dt, mean[r],
                           m2[r] / static_cast<double>(n_paths - 1)});
  const double n = static_cast<double>(n_paths);
  for (Histogram& h : out.snapshots) {
    for (double& m : h.mass) m /= n;
    h.below /= n;
    h.above /= n;
    if (h.tail_mass() > 0.0) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "histogram-overflow at t=%.6g: tail mass %.6g outside [%.6g, %.6g]", h.t,
                    h.tail_mass(), h.lo, h.hi);
      out.warnings.emplace_back(msg);
    }
  }
  return out;
}

/// "t mean variance" rows.
inline void write_moments(std::ostream& os, const EnsembleResult& r) {
  char line[96];
  for (const auto& m : r.moments) {
    std::snprintf(line, sizeof line, "%.10g %.12g %.12g\n", m.t, m.mean, m.variance);
    os << line;
  }
}

/// "x mass" rows, bin centers; tails reported as comment lines.
inline void write_histogram(std::ostream& os, const Histogram& h) {
  char line[96];
  std::snprintf(line, sizeof line, "# t=%.10g below=%.12g above=%.12g\n", h.t, h.below, h.above);
  os << line;
  for (std::size_t j = 0; j < h.bins(); ++j) {
    std::snprintf(line, sizeof line, "%.10g %.12g\n", h.center(j), h.mass[j]);
    os << line;
  }
}

}  // namespace qbo

#endif  // QBO_LANGEVIN_HPP
