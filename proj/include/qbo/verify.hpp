#ifndef QBO_VERIFY_HPP
#define QBO_VERIFY_HPP

// Built-in invariant checks run by `qbo verify`.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "qbo/fpe.hpp"
#include "qbo/langevin.hpp"
#include "qbo/potential.hpp"
#include "qbo/quantize.hpp"

namespace qbo::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string measured;
};

inline constexpr std::string_view kCheckNames[] = {"error-moments", "gibbs-fixed-point", "zero-current", "sde-fpe",
                                                   "tunneling"};

namespace detail {
inline std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}
}  // namespace detail

/// Quantization error of uniform draws on [0, 100): |mean| < 3 sigma / sqrt(n)
/// and variance within 2% of 1 / (12 qp^2).
inline CheckResult error_moments(double qp, std::uint64_t n = 1'000'000, std::uint64_t seed = 2024) {
  const auto theory = theoretical_error_moments(qp);
  const auto emp = empirical_error_stats([](Rng& r) { return r.uniform(0.0, 100.0); }, qp, n, seed);
  const double sigma = std::sqrt(theory.variance);
  const double mean_bound = 3.0 * sigma / std::sqrt(static_cast<double>(n));
  const double rel = std::abs(emp.variance - theory.variance) / theory.variance;
  const bool ok = std::abs(emp.mean) < mean_bound && rel < 0.02;
  return {detail::format("error-moments[qp=%g]", qp), ok,
          detail::format("mean=%.3e (bound %.3e) variance=%.6e vs 1/(12 qp^2)=%.6e (rel %.3f%%)", emp.mean, mean_bound,
                         emp.variance, theory.variance, 100.0 * rel)};
}

/// L1 drift of the Gibbs density under fp_evolve over T = 1.
inline CheckResult gibbs_fixed_point() {
  double worst = 0.0;
  std::string detail_text;
  for (const auto& [f, a, b] : {std::tuple{quadratic_potential(), -6.0, 6.0}, std::tuple{double_well_potential(), -3.0, 3.0}}) {
    const DensityGrid g = gibbs_density(f, 1.0, a, b, 512);
    const DensityGrid e = fp_evolve(g, f, DiffusionLaw::constant_q(1.0), 1.0, 1e-2);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) l1 += g.weight(i) * std::abs(e.values[i] - g.values[i]);
    worst = std::max(worst, l1);
    detail_text += detail::format("%s L1=%.3e ", f.name.c_str(), l1);
  }
  return {"gibbs-fixed-point", worst < 1e-3, detail_text + "(limit 1e-3)"};
}

/// max |v| on the interior of Gibbs densities.
inline CheckResult zero_current() {
  double worst = 0.0;
  std::string detail_text;
  for (const auto& [f, q, a, b] : {std::tuple{quadratic_potential(), 1.0, -6.0, 6.0},
                                   std::tuple{double_well_potential(), 0.5, -3.0, 3.0}}) {
    const DensityGrid g = gibbs_density(f, q, a, b, 512);
    const double m = velocity_field(g, f, q).max_abs_v();
    worst = std::max(worst, m);
    detail_text += detail::format("%s max|v|=%.3e ", f.name.c_str(), m);
  }
  return {"zero-current", worst < 1e-6, detail_text + "(limit 1e-6)"};
}

/// L1 between the Fokker-Planck solution and an Euler-Maruyama histogram at
/// T = 1 (C_q = 1, Q_p = 1, 512 bins on [-6, 6]).
inline CheckResult sde_fpe(std::uint64_t paths = 100'000, std::uint64_t seed = 7) {
  double worst = 0.0;
  std::string detail_text;
  for (const auto& [f, lo, hi] : {std::tuple{quadratic_potential(), 0.0, 2.0}, std::tuple{double_well_potential(), -1.5, -0.5}}) {
    const auto cfg = make_sde_config(f, 1.0, 1.0, 1e-3, 1000, InitialLaw::uniform(lo, hi));
    EnsembleOptions opt;
    opt.grid_lo = -6.0;
    opt.grid_hi = 6.0;
    opt.bins = 512;
    const auto ens = run_ensemble(cfg, paths, 1.0, seed, opt);
    const DensityGrid rho =
        fp_evolve(DensityGrid::uniform(-6.0, 6.0, 1025, lo, hi), f, DiffusionLaw::constant_q(1.0), 1.0, 1e-3);
    const double l1 = compare_density_to_histogram(rho, ens.snapshots.front());
    worst = std::max(worst, l1);
    detail_text += detail::format("%s L1=%.4f ", f.name.c_str(), l1);
  }
  return {"sde-fpe", worst < 0.05, detail_text + "(limit 0.05)"};
}

/// Mass beyond the barrier of the double well at T = 10, started at -1, for
/// constant Q in {0, 0.1, 0.5, 1}.
inline std::vector<double> tunneling_masses(const std::vector<double>& qs = {0.0, 0.1, 0.5, 1.0}) {
  const Potential1D f = double_well_potential();
  const DensityGrid rho0 = DensityGrid::gaussian(-3.0, 3.0, 512, -1.0, 0.1);
  std::vector<double> out;
  for (double q : qs) out.push_back(barrier_crossing_mass(fp_evolve(rho0, f, DiffusionLaw::constant_q(q), 10.0, 1e-2), 0.0));
  return out;
}

inline CheckResult tunneling() {
  const std::vector<double> qs = {0.0, 0.1, 0.5, 1.0};
  const auto m = tunneling_masses(qs);
  bool ok = m[0] < 1e-6;
  for (std::size_t i = 1; i < m.size(); ++i) ok = ok && m[i] > m[i - 1];
  std::string text;
  for (std::size_t i = 0; i < m.size(); ++i) text += detail::format("Q=%g:%.4e ", qs[i], m[i]);
  return {"tunneling", ok, text + "(strictly increasing, Q=0 < 1e-6)"};
}

}  // namespace qbo::verify

#endif  // QBO_VERIFY_HPP
