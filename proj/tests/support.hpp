#ifndef QBO_TESTS_SUPPORT_HPP
#define QBO_TESTS_SUPPORT_HPP

#include <gtest/gtest.h>

#include <cstdint>
#include <functional>
#include <string>

#include "qbo/error.hpp"
#include "qbo/rng.hpp"

namespace qbo::testing {

/// Asserts that `fn` throws qbo::Error with the given category.
inline ::testing::AssertionResult throws_code(Errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == expected) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "threw " << to_string(e.code()) << " (" << e.what() << "), expected "
                                         << to_string(expected);
  } catch (const std::exception& e) {
    return ::testing::AssertionFailure() << "threw a non-qbo exception: " << e.what();
  }
  return ::testing::AssertionFailure() << "did not throw; expected " << to_string(expected);
}

/// Seeded generator for property tests.
struct Gen {
  Rng rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double real(double lo, double hi) { return rng.uniform(lo, hi); }
  /// Magnitudes spread over many decades, both signs.
  double wide() {
    const double mag = std::pow(10.0, rng.uniform(-6.0, 6.0));
    return rng.uniform() < 0.5 ? -mag : mag;
  }
  double positive_qp() { return std::pow(2.0, rng.uniform(-8.0, 20.0)); }
};

}  // namespace qbo::testing

#endif  // QBO_TESTS_SUPPORT_HPP
