#ifndef QBO_BENCHFN_HPP
#define QBO_BENCHFN_HPP

// Multimodal benchmark objectives with box bounds, gradients and certified
// global minima.
//
//   xinsheyang_n4  2 + (sum sin^2 x_i - exp(-sum x_i^2)) * exp(-sum sin^2 sqrt|x_i|)   [-10, 10]^d,  min 1 at 0
//   salomon        1 - cos(2 pi |x|) + 0.1 |x|                                        [-100, 100]^d, min 0 at 0
//   dropwave       1 - (1 + cos(12 r)) / (0.5 r^2 + 2)                                [-5.12, 5.12]^2, min 0 at 0
//   schaffer_n2    0.5 + (sin^2(x^2 - y^2) - 0.5) / (1 + 0.001 (x^2 + y^2))^2        [-100, 100]^2, min 0 at 0

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbo/error.hpp"

namespace qbo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

using Point = std::vector<double>;

struct BenchmarkFunction {
  std::string name;
  std::size_t dimension = 0;
  std::vector<Interval> bounds;
  double global_min_value = 0.0;
  Point global_min_point;
  std::function<double(std::span<const double>)> evaluator;
  /// Returns nullopt where the function is not differentiable.
  std::function<std::optional<Point>(std::span<const double>)> analytic_gradient;

  bool in_bounds(std::span<const double> x) const noexcept {
    if (x.size() != dimension) return false;
    for (std::size_t i = 0; i < dimension; ++i)
      if (!bounds[i].contains(x[i])) return false;
    return true;
  }

  void clamp(std::span<double> x) const noexcept {
    for (std::size_t i = 0; i < x.size() && i < dimension; ++i) x[i] = bounds[i].clamp(x[i]);
  }
};

inline constexpr std::array<std::string_view, 4> kRegisteredFunctions = {"xinsheyang_n4", "salomon", "dropwave",
                                                                         "schaffer_n2"};

namespace detail {

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline BenchmarkFunction make_xinsheyang_n4(std::size_t d) {
  BenchmarkFunction fn;
  fn.name = "xinsheyang_n4";
  fn.dimension = d;
  fn.bounds.assign(d, Interval{-10.0, 10.0});
  fn.global_min_value = 1.0;
  fn.global_min_point.assign(d, 0.0);
  fn.evaluator = [](std::span<const double> x) {
    double s_sin = 0.0, s_sq = 0.0, s_root = 0.0;
    for (double v : x) {
      const double s = std::sin(v);
      const double r = std::sin(std::sqrt(std::abs(v)));
      s_sin += s * s;
      s_sq += v * v;
      s_root += r * r;
    }
    return 2.0 + (s_sin - std::exp(-s_sq)) * std::exp(-s_root);
  };
  fn.analytic_gradient = [](std::span<const double> x) -> std::optional<Point> {
    double s_sin = 0.0, s_sq = 0.0, s_root = 0.0;
    for (double v : x) {
      if (v == 0.0) return std::nullopt;  // sqrt|x| has a cusp
      const double s = std::sin(v);
      const double r = std::sin(std::sqrt(std::abs(v)));
      s_sin += s * s;
      s_sq += v * v;
      s_root += r * r;
    }
    const double gauss = std::exp(-s_sq);
    const double damp = std::exp(-s_root);
    const double inner = s_sin - gauss;
    Point g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x[i];
      const double root = std::sqrt(std::abs(v));
      const double d_root = std::sin(2.0 * root) * std::copysign(1.0, v) / (2.0 * root);
      g[i] = (std::sin(2.0 * v) + 2.0 * v * gauss) * damp - inner * damp * d_root;
    }
    return g;
  };
  return fn;
}

inline BenchmarkFunction make_salomon(std::size_t d) {
  BenchmarkFunction fn;
  fn.name = "salomon";
  fn.dimension = d;
  fn.bounds.assign(d, Interval{-100.0, 100.0});
  fn.global_min_value = 0.0;
  fn.global_min_point.assign(d, 0.0);
  fn.evaluator = [](std::span<const double> x) {
    const double r = std::sqrt(norm2(x));
    return 1.0 - std::cos(2.0 * std::numbers::pi * r) + 0.1 * r;
  };
  fn.analytic_gradient = [](std::span<const double> x) -> std::optional<Point> {
    const double r = std::sqrt(norm2(x));
    Point g(x.size(), 0.0);
    if (r == 0.0) return g;  // radial cusp; 0 by symmetry
    const double radial = 2.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * r) + 0.1;
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = radial * x[i] / r;
    return g;
  };
  return fn;
}

inline BenchmarkFunction make_dropwave() {
  BenchmarkFunction fn;
  fn.name = "dropwave";
  fn.dimension = 2;
  fn.bounds.assign(2, Interval{-5.12, 5.12});
  fn.global_min_value = 0.0;
  fn.global_min_point.assign(2, 0.0);
  fn.evaluator = [](std::span<const double> x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return 1.0 - (1.0 + std::cos(12.0 * std::sqrt(r2))) / (0.5 * r2 + 2.0);
  };
  fn.analytic_gradient = [](std::span<const double> x) -> std::optional<Point> {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double r = std::sqrt(r2);
    // sin(12 r) / r, continuous through the origin
    const double sinc = r < 1e-8 ? 12.0 : std::sin(12.0 * r) / r;
    const double num = 1.0 + std::cos(12.0 * r);
    const double den = 0.5 * r2 + 2.0;
    Point g(2);
    for (int i = 0; i < 2; ++i) {
      const double d_num = -12.0 * sinc * x[i];
      const double d_den = x[i];
      g[i] = -(d_num * den - num * d_den) / (den * den);
    }
    return g;
  };
  return fn;
}

inline BenchmarkFunction make_schaffer_n2() {
  BenchmarkFunction fn;
  fn.name = "schaffer_n2";
  fn.dimension = 2;
  fn.bounds.assign(2, Interval{-100.0, 100.0});
  fn.global_min_value = 0.0;
  fn.global_min_point.assign(2, 0.0);
  fn.evaluator = [](std::span<const double> x) {
    const double s = std::sin(x[0] * x[0] - x[1] * x[1]);
    const double q = 1.0 + 0.001 * (x[0] * x[0] + x[1] * x[1]);
    return 0.5 + (s * s - 0.5) / (q * q);
  };
  fn.analytic_gradient = [](std::span<const double> x) -> std::optional<Point> {
    const double u = x[0] * x[0] - x[1] * x[1];
    const double s = std::sin(u);
    const double q = 1.0 + 0.001 * (x[0] * x[0] + x[1] * x[1]);
    const double num = s * s - 0.5;
    const double den = q * q;
    const double d_num_du = std::sin(2.0 * u);
    Point g(2);
    const double du[2] = {2.0 * x[0], -2.0 * x[1]};
    for (int i = 0; i < 2; ++i) {
      const double d_den = 2.0 * q * 0.002 * x[i];
      g[i] = (d_num_du * du[i] * den - num * d_den) / (den * den);
    }
    return g;
  };
  return fn;
}

}  // namespace detail

/// Registry lookup. Throws Errc::registry on an unknown name or a dimension
/// the function does not support.
inline BenchmarkFunction lookup(std::string_view name, std::size_t dimension = 2) {
  if (dimension == 0) throw Error(Errc::registry, "dimension must be positive for '" + std::string(name) + "'");
  if (name == "xinsheyang_n4") return detail::make_xinsheyang_n4(dimension);
  if (name == "salomon") return detail::make_salomon(dimension);
  if (name == "dropwave" || name == "schaffer_n2") {
    if (dimension != 2)
      throw Error(Errc::registry, std::string(name) + " is defined only for dimension 2, got " +
                                      std::to_string(dimension));
    return name == "dropwave" ? detail::make_dropwave() : detail::make_schaffer_n2();
  }
  throw Error(Errc::registry, "unknown benchmark function '" + std::string(name) + "'");
}

inline double eval(const BenchmarkFunction& fn, std::span<const double> x) {
  if (x.size() != fn.dimension)
    throw Error(Errc::invalid_input, fn.name + ": expected " + std::to_string(fn.dimension) +
                                         " coordinates, got " + std::to_string(x.size()));
  return fn.evaluator(x);
}

inline constexpr double kFiniteDifferenceStep = 1e-6;

inline Point central_difference(const BenchmarkFunction& fn, std::span<const double> x,
                                double step = kFiniteDifferenceStep) {
  Point probe(x.begin(), x.end());
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double up = fn.evaluator(probe);
    probe[i] = saved - step;
    const double down = fn.evaluator(probe);
    probe[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Gradient, analytic where defined. At non-differentiable points the central
/// difference is used when `allow_fallback`, otherwise gradient_undefined.
inline Point grad(const BenchmarkFunction& fn, std::span<const double> x, bool allow_fallback = true) {
  if (x.size() != fn.dimension)
    throw Error(Errc::invalid_input, fn.name + ": gradient dimension mismatch");
  if (fn.analytic_gradient) {
    if (auto g = fn.analytic_gradient(x)) return *std::move(g);
  }
  if (!allow_fallback) throw Error(Errc::gradient_undefined, fn.name + ": gradient undefined at the given point");
  return central_difference(fn, x);
}

/// "x y f" rows over a grid x grid lattice spanning the first two coordinates'
/// bounds. Remaining coordinates are pinned at the global minimizer.
inline void write_surface(std::ostream& out, const BenchmarkFunction& fn, std::size_t grid = 201) {
  detail::require(grid >= 2, Errc::invalid_input, "surface grid needs at least 2 points per axis");
  detail::require(fn.dimension >= 2, Errc::invalid_input, "surface needs a function of dimension >= 2");
  Point x = fn.global_min_point;
  const Interval bx = fn.bounds[0];
  const Interval by = fn.bounds[1];
  char line[96];
  for (std::size_t i = 0; i < grid; ++i) {
    x[0] = bx.lo + bx.width() * static_cast<double>(i) / static_cast<double>(grid - 1);
    for (std::size_t j = 0; j < grid; ++j) {
      x[1] = by.lo + by.width() * static_cast<double>(j) / static_cast<double>(grid - 1);
      std::snprintf(line, sizeof line, "%.10g %.10g %.12g\n", x[0], x[1], fn.evaluator(x));
      out << line;
    }
  }
}

}  // namespace qbo

#endif  // QBO_BENCHFN_HPP
