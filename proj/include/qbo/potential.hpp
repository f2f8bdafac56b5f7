#ifndef QBO_POTENTIAL_HPP
#define QBO_POTENTIAL_HPP

#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "qbo/error.hpp"

namespace qbo {

/// One-dimensional potential f with its derivative, for the SDE and
/// Fokker-Planck machinery.
struct Potential1D {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> slope;
};

inline Potential1D quadratic_potential() {
  return {"quadratic", [](double x) { return 0.5 * x * x; }, [](double x) { return x; }};
}

/// (x^2 - 1)^2 + tilt * x; wells near -1 and +1, barrier near 0.
inline Potential1D double_well_potential(double tilt = 0.0) {
  return {"doublewell", [tilt](double x) { const double u = x * x - 1.0; return u * u + tilt * x; },
          [tilt](double x) { return 4.0 * x * (x * x - 1.0) + tilt; }};
}

inline Potential1D flat_potential(double level = 0.0) {
  return {"flat", [level](double) { return level; }, [](double) { return 0.0; }};
}

inline Potential1D potential_by_name(std::string_view name) {
  if (name == "quadratic") return quadratic_potential();
  if (name == "doublewell") return double_well_potential();
  if (name == "tilted_doublewell") return double_well_potential(0.2);
  if (name == "flat") return flat_potential();
  throw Error(Errc::configuration, "unknown potential '" + std::string(name) + "'");
}

}  // namespace qbo

#endif  // QBO_POTENTIAL_HPP
