#ifndef QBO_QUANTIZE_HPP
#define QBO_QUANTIZE_HPP

// Range-space quantization of objective values and the quantization
// parameter schedule Q_p(t) = eta * base^h(t).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "qbo/error.hpp"
#include "qbo/rng.hpp"

namespace qbo {

/// A value on the lattice k / qp. `residual` is qp * value - qp * f, the
/// quantization error in lattice units; it lies in [-1/2, 1/2].
struct QuantizedValue {
  double value = 0.0;
  double qp = 1.0;
  double residual = 0.0;

  /// Integer lattice index k with value == k / qp.
  double lattice_index() const noexcept { return std::round(value * qp); }
};

/// f^Q = floor(qp * f + 0.5) / qp. Midpoints round up.
inline QuantizedValue quantize(double f, double qp) {
  detail::require(std::isfinite(f), Errc::invalid_input, "quantize: objective value is not finite");
  detail::require(std::isfinite(qp) && qp > 0.0, Errc::invalid_input,
                  "quantize: qp must be positive and finite");
  const double scaled = qp * f;
  const double k = std::floor(scaled + 0.5);
  return QuantizedValue{k / qp, qp, k - scaled};
}

/// Maps a step index to the exponent h(t). Must be nondecreasing.
using PowerRule = std::function<std::int64_t(std::uint64_t)>;

/// h(t) = min(floor(t / period), cap). A period of 0 is rejected.
inline PowerRule stepwise_power(std::uint64_t period, std::optional<std::int64_t> cap = std::nullopt) {
  detail::require(period > 0, Errc::invalid_input, "stepwise_power: period must be positive");
  return [period, cap](std::uint64_t t) {
    auto h = static_cast<std::int64_t>(t / period);
    if (cap && h > *cap) h = *cap;
    return h;
  };
}

inline PowerRule constant_power(std::int64_t h) {
  detail::require(h >= 0, Errc::invalid_input, "constant_power: exponent must be nonnegative");
  return [h](std::uint64_t) { return h; };
}

struct QuantizationSchedule {
  double eta = 1.0;
  int base = 2;
  PowerRule power = stepwise_power(500);

  void validate() const {
    detail::require(std::isfinite(eta) && eta > 0.0, Errc::invalid_input, "schedule: eta must be positive");
    detail::require(base >= 2, Errc::invalid_input, "schedule: base must be >= 2");
    detail::require(static_cast<bool>(power), Errc::invalid_input, "schedule: power rule is empty");
  }
};

/// Q_p(t) = eta * base^h(t). Throws schedule_overflow when the power leaves
/// the representable range; cap the power rule to avoid it.
inline double qp_at(const QuantizationSchedule& schedule, std::uint64_t t) {
  schedule.validate();
  const std::int64_t h = schedule.power(t);
  detail::require(h >= 0, Errc::invalid_input, "qp_at: power rule returned a negative exponent");
  const double qp = schedule.eta * std::pow(static_cast<double>(schedule.base), static_cast<double>(h));
  if (!std::isfinite(qp) || qp > std::numeric_limits<double>::max() / 2) {
    throw Error(Errc::schedule_overflow,
                "qp_at: eta * " + std::to_string(schedule.base) + "^" + std::to_string(h) + " overflows");
  }
  return qp;
}

struct ErrorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Uniform-error moments of f^Q - f: (0, 1 / (12 qp^2)).
inline ErrorMoments theoretical_error_moments(double qp) {
  detail::require(std::isfinite(qp) && qp > 0.0, Errc::invalid_input,
                  "theoretical_error_moments: qp must be positive");
  return {0.0, 1.0 / (12.0 * qp * qp)};
}

/// Sample mean and (unbiased) variance of quantize(f, qp) - f over n draws of
/// `sampler(rng)`. Deterministic given seed.
template <typename Sampler>
ErrorMoments empirical_error_stats(Sampler&& sampler, double qp, std::uint64_t n, std::uint64_t seed) {
  detail::require(n >= 1000, Errc::insufficient_samples,
                  "empirical_error_stats: need at least 1000 samples, got " + std::to_string(n));
  detail::require(std::isfinite(qp) && qp > 0.0, Errc::invalid_input, "empirical_error_stats: qp must be positive");
  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double f = sampler(rng);
    const double err = quantize(f, qp).value - f;
    const double delta = err - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (err - mean);
  }
  return {mean, m2 / static_cast<double>(n - 1)};
}

}  // namespace qbo

#endif  // QBO_QUANTIZE_HPP
