#ifndef QBO_FPE_HPP
#define QBO_FPE_HPP

// 1-D Fokker-Planck solver for
//
//   d rho / dt = d/dx (f'(x) rho) + (Q(t) / 2) d^2 rho / dx^2
//
// on [a, b] with zero-flux walls, plus the stationary (Gibbs) density and the
// probability-current velocity v = -f' - (Q/2) d ln(rho)/dx.
//
// Discretization: node-centred finite volumes (trapezoid weights dx, dx/2 at
// the walls) with the exponentially fitted Scharfetter-Gummel flux
//
//   J_{i+1/2} = (D/dx) [B(-z) rho_i - B(z) rho_{i+1}],  z = -(f_{i+1} - f_i) / D,  D = Q/2,
//
// B(z) = z / (e^z - 1). It reduces to upwinding when drift dominates and to
// centred diffusion when it does not. Mass is conserved to rounding,
// nonnegativity holds under the explicit step bound, and the sampled Gibbs
// density exp(-2 f / Q) is an exact discrete equilibrium.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qbo/error.hpp"
#include "qbo/langevin.hpp"
#include "qbo/potential.hpp"
#include "qbo/quantize.hpp"

namespace qbo {

struct DensityGrid {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> values;

  std::size_t n() const noexcept { return values.size(); }
  double dx() const noexcept { return (b - a) / static_cast<double>(values.size() - 1); }
  double x(std::size_t i) const noexcept { return a + static_cast<double>(i) * dx(); }

  double weight(std::size_t i) const noexcept { return (i == 0 || i + 1 == n()) ? 0.5 * dx() : dx(); }

  /// Trapezoidal mass.
  double mass() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < n(); ++i) m += weight(i) * values[i];
    return m;
  }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(Errc::normalization, "density has no finite positive mass");
    for (double& v : values) v /= m;
  }

  void validate() const {
    detail::require(n() >= 64, Errc::invalid_input, "density grid needs at least 64 points");
    detail::require(b > a, Errc::invalid_input, "density grid needs b > a");
    for (double v : values) detail::require(v >= 0.0, Errc::invalid_input, "density grid has negative values");
    detail::require(std::abs(mass() - 1.0) <= 1e-6, Errc::invalid_input, "density grid is not normalized");
  }

  /// Samples `density` at n nodes and normalizes.
  template <typename F>
  static DensityGrid sample(double a, double b, std::size_t n, F&& density) {
    detail::require(n >= 64, Errc::invalid_input, "density grid needs at least 64 points");
    detail::require(b > a, Errc::invalid_input, "density grid needs b > a");
    DensityGrid g{a, b, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) g.values[i] = density(g.x(i));
    g.normalize();
    return g;
  }

  static DensityGrid gaussian(double a, double b, std::size_t n, double mean, double sd) {
    return sample(a, b, n, [=](double x) { const double z = (x - mean) / sd; return std::exp(-0.5 * z * z); });
  }

  /// Cell averages of the uniform law on [lo, hi]; node i owns
  /// [x_i - dx/2, x_i + dx/2] clipped to the domain.
  static DensityGrid uniform(double a, double b, std::size_t n, double lo, double hi) {
    detail::require(hi > lo, Errc::invalid_input, "uniform density needs hi > lo");
    DensityGrid g{a, b, std::vector<double>(n, 0.0)};
    detail::require(n >= 64 && b > a, Errc::invalid_input, "bad density grid");
    const double h = g.dx();
    for (std::size_t i = 0; i < n; ++i) {
      const double l = std::max(g.x(i) - 0.5 * h, a);
      const double r = std::min(g.x(i) + 0.5 * h, b);
      const double overlap = std::max(0.0, std::min(r, hi) - std::max(l, lo));
      g.values[i] = overlap / (hi - lo) / g.weight(i);
    }
    g.normalize();
    return g;
  }

  /// Exact integral of the piecewise-linear interpolant over [lo, hi] (clipped to the domain).
  double integrate(double lo, double hi) const {
    lo = std::clamp(lo, a, b);
    hi = std::clamp(hi, a, b);
    if (hi <= lo) return 0.0;
    return cumulative(hi) - cumulative(lo);
  }

 private:
  double cumulative(double x) const {
    const double h = dx();
    const double s_total = (x - a) / h;
    auto k = static_cast<std::size_t>(std::floor(s_total));
    if (k >= n() - 1) k = n() - 2;
    double c = 0.0;
    for (std::size_t i = 0; i < k; ++i) c += 0.5 * h * (values[i] + values[i + 1]);
    const double s = x - this->x(k);
    c += values[k] * s + (values[k + 1] - values[k]) * s * s / (2.0 * h);
    return c;
  }
};

/// Q(t) = C_q Q_p(t)^-2, nonnegative and nonincreasing.
struct DiffusionLaw {
  std::function<double(double)> q_of_t;
  bool constant = false;

  static DiffusionLaw constant_q(double q) {
    detail::require(q >= 0.0 && std::isfinite(q), Errc::invalid_input, "diffusion Q must be nonnegative");
    return {[q](double) { return q; }, true};
  }

  /// Schedule index advances every `time_per_index` units of time.
  static DiffusionLaw from_schedule(double c_q, QuantizationSchedule schedule, double time_per_index) {
    detail::require(c_q >= 0.0, Errc::invalid_input, "diffusion C_q must be nonnegative");
    detail::require(time_per_index > 0.0, Errc::invalid_input, "time_per_index must be positive");
    schedule.validate();
    return {[=](double t) {
              const double qp = qp_at(schedule, static_cast<std::uint64_t>(std::floor(t / time_per_index)));
              return c_q / (qp * qp);
            },
            false};
  }

  double operator()(double t) const { return q_of_t(t); }
};

namespace detail {

/// B(z) = z / (e^z - 1), B(0) = 1.
inline double bernoulli_fn(double z) {
  if (std::abs(z) < 1e-10) return 1.0 - 0.5 * z;
  if (z > 700.0) return z * std::exp(-z);
  return z / std::expm1(z);
}

struct FluxCoefficients {
  std::vector<double> right;  // rate coefficient of rho_i in J_{i+1/2}
  std::vector<double> left;   // rate coefficient of rho_{i+1} in -J_{i+1/2}
};

inline FluxCoefficients flux_coefficients(const std::vector<double>& f_nodes, double dx, double q) {
  const std::size_t m = f_nodes.size() - 1;
  FluxCoefficients c{std::vector<double>(m), std::vector<double>(m)};
  const double D = 0.5 * q;
  for (std::size_t i = 0; i < m; ++i) {
    const double dphi = f_nodes[i + 1] - f_nodes[i];
    if (D == 0.0) {
      const double u = -dphi / dx;  // velocity -f'
      c.right[i] = std::max(u, 0.0);
      c.left[i] = std::max(-u, 0.0);
    } else {
      const double z = -dphi / D;
      c.right[i] = D / dx * bernoulli_fn(-z);
      c.left[i] = D / dx * bernoulli_fn(z);
    }
  }
  return c;
}

/// Largest dt keeping every node's outflow below its content.
inline double positivity_bound(const FluxCoefficients& c, const DensityGrid& g) {
  double rate = 0.0;
  const std::size_t n = g.n();
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    if (i + 1 < n) out += c.right[i];
    if (i > 0) out += c.left[i - 1];
    rate = std::max(rate, out / g.weight(i));
  }
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

inline void explicit_step(DensityGrid& g, const FluxCoefficients& c, double dt, std::vector<double>& flux) {
  const std::size_t n = g.n();
  flux.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) flux[i] = c.right[i] * g.values[i] - c.left[i] * g.values[i + 1];
  for (std::size_t i = 0; i < n; ++i) {
    double net = 0.0;
    if (i > 0) net += flux[i - 1];
    if (i + 1 < n) net -= flux[i];
    g.values[i] = std::max(0.0, g.values[i] + dt * net / g.weight(i));
  }
}

}  // namespace detail

struct FpOptions {
  double safety = 0.9;                       // fraction of the positivity bound
  std::uint64_t max_substeps = 200'000'000;  // total explicit steps allowed
};

/// Evolves rho0 to time T. `dt` is an outer step; each outer step is
/// subdivided until the explicit scheme is positivity preserving.
inline DensityGrid fp_evolve(const DensityGrid& rho0, const Potential1D& f, const DiffusionLaw& law, double T,
                             double dt, FpOptions opt = {}) {
  rho0.validate();
  detail::require(T >= 0.0, Errc::invalid_input, "fp_evolve: horizon must be nonnegative");
  detail::require(dt > 0.0, Errc::invalid_input, "fp_evolve: dt must be positive");
  DensityGrid g = rho0;
  if (T == 0.0) return g;

  std::vector<double> f_nodes(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) f_nodes[i] = f.value(g.x(i));

  std::vector<double> flux;
  std::uint64_t used = 0;
  double t = 0.0;
  detail::FluxCoefficients coeff;
  bool have_coeff = false;
  while (t < T) {
    const double outer = std::min(dt, T - t);
    if (!law.constant || !have_coeff) {
      const double q = law(t);
      detail::require(q >= 0.0 && std::isfinite(q), Errc::solver, "diffusion Q(t) must be nonnegative");
      coeff = detail::flux_coefficients(f_nodes, g.dx(), q);
      have_coeff = true;
    }
    const double bound = opt.safety * detail::positivity_bound(coeff, g);
    const auto sub = static_cast<std::uint64_t>(std::max(1.0, std::ceil(outer / bound)));
    used += sub;
    if (used > opt.max_substeps)
      throw Error(Errc::solver, "stability bound needs more than " + std::to_string(opt.max_substeps) + " substeps");
    const double h = outer / static_cast<double>(sub);
    for (std::uint64_t s = 0; s < sub; ++s) detail::explicit_step(g, coeff, h, flux);
    t += outer;
  }
  return g;
}

/// Normalized exp(-2 f / Q) on the grid [a, b] with n nodes.
inline DensityGrid gibbs_density(const Potential1D& f, double Q, double a, double b, std::size_t n) {
  detail::require(Q > 0.0 && std::isfinite(Q), Errc::invalid_input, "gibbs_density: Q must be positive");
  DensityGrid g{a, b, std::vector<double>(n)};
  detail::require(n >= 64 && b > a, Errc::invalid_input, "gibbs_density: bad grid");
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = f.value(g.x(i));
  const double fmin = *std::min_element(fv.begin(), fv.end());
  for (std::size_t i = 0; i < n; ++i) g.values[i] = std::exp(-2.0 * (fv[i] - fmin) / Q);
  g.normalize();
  return g;
}

struct VelocityField {
  std::vector<double> x;
  std::vector<double> v;   // -f' - (Q/2) d ln rho / dx
  std::vector<double> mu;  // f' + Q d ln rho / dx
  std::vector<bool> masked;
  std::size_t flagged = 0;  // interior nodes masked for vanishing density

  /// Largest |v| over unmasked nodes.
  double max_abs_v() const {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!masked[i]) m = std::max(m, std::abs(v[i]));
    return m;
  }
};

inline constexpr double kDensityFloor = 1e-300;

/// Central differences of both f and ln rho on the grid (for Q > 0), so that
/// a sampled Gibbs density yields v = 0 to rounding. The two wall nodes and any node
/// whose stencil touches rho < 1e-300 are masked (v = mu = 0 there).
inline VelocityField velocity_field(const DensityGrid& rho, const Potential1D& f, double Q) {
  detail::require(Q >= 0.0, Errc::invalid_input, "velocity_field: Q must be nonnegative");
  const std::size_t n = rho.n();
  detail::require(n >= 3, Errc::invalid_input, "velocity_field: grid too small");
  VelocityField out;
  out.x.resize(n);
  out.v.assign(n, 0.0);
  out.mu.assign(n, 0.0);
  out.masked.assign(n, false);
  const double h = rho.dx();
  std::vector<double> fv(n), lr(n);
  std::vector<bool> low(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = rho.x(i);
    fv[i] = f.value(out.x[i]);
    low[i] = !(rho.values[i] >= kDensityFloor);
    lr[i] = std::log(std::max(rho.values[i], kDensityFloor));
  }
  out.masked[0] = out.masked[n - 1] = true;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (low[i - 1] || low[i] || low[i + 1]) {
      out.masked[i] = true;
      ++out.flagged;
      continue;
    }
    // With Q = 0 the density term vanishes and v is the exact -f'.
    const double df = Q == 0.0 ? f.slope(out.x[i]) : (fv[i + 1] - fv[i - 1]) / (2.0 * h);
    const double dlr = (lr[i + 1] - lr[i - 1]) / (2.0 * h);
    out.v[i] = -df - 0.5 * Q * dlr;
    out.mu[i] = df + Q * dlr;
  }
  return out;
}

/// Mass of rho on (barrier_x, b].
inline double barrier_crossing_mass(const DensityGrid& rho, double barrier_x) {
  detail::require(barrier_x >= rho.a && barrier_x <= rho.b, Errc::invalid_input,
                  "barrier_crossing_mass: barrier outside the domain");
  return std::clamp(rho.integrate(barrier_x, rho.b), 0.0, 1.0);
}

/// L1 distance between rho and a normalized ensemble histogram on the same
/// domain. rho is rebinned by exact integration of its linear interpolant;
/// histogram tail mass counts fully toward the distance.
inline double compare_density_to_histogram(const DensityGrid& rho, const Histogram& hist) {
  const double tol = 1e-9 * (rho.b - rho.a);
  if (std::abs(rho.a - hist.lo) > tol || std::abs(rho.b - hist.hi) > tol || hist.bins() == 0)
    throw Error(Errc::comparison, "density and histogram domains differ");
  double total = hist.tail_mass();
  for (double m : hist.mass) total += m;
  if (std::abs(total - 1.0) > 1e-6) throw Error(Errc::comparison, "histogram is not normalized");
  double l1 = hist.tail_mass();
  const double w = hist.bin_width();
  for (std::size_t j = 0; j < hist.bins(); ++j) {
    const double lo = hist.lo + static_cast<double>(j) * w;
    l1 += std::abs(rho.integrate(lo, lo + w) - hist.mass[j]);
  }
  return l1;
}

inline void write_density(std::ostream& os, const DensityGrid& rho) {
  char line[80];
  for (std::size_t i = 0; i < rho.n(); ++i) {
    std::snprintf(line, sizeof line, "%.10g %.12g\n", rho.x(i), rho.values[i]);
    os << line;
  }
}

/// "x v mu" rows; masked nodes are written as nan.
inline void write_diagnostics(std::ostream& os, const VelocityField& vf) {
  char line[96];
  for (std::size_t i = 0; i < vf.x.size(); ++i) {
    if (vf.masked[i])
      std::snprintf(line, sizeof line, "%.10g nan nan\n", vf.x[i]);
    else
      std::snprintf(line, sizeof line, "%.10g %.12g %.12g\n", vf.x[i], vf.v[i], vf.mu[i]);
    os << line;
  }
}

}  // namespace qbo

#endif  // QBO_FPE_HPP
