#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qbo/quantize.hpp"
#include "support.hpp"

using qbo::Errc;
using qbo::testing::throws_code;

TEST(Quantize, RoundsToNearestLatticePoint) {
  EXPECT_DOUBLE_EQ(qbo::quantize(1.234, 10.0).value, 1.2);
  EXPECT_DOUBLE_EQ(qbo::quantize(2.0, 4.0).value, 2.0);
}

TEST(Quantize, MidpointRoundsUp) {
  EXPECT_DOUBLE_EQ(qbo::quantize(0.5, 1.0).value, 1.0);
  EXPECT_DOUBLE_EQ(qbo::quantize(-0.5, 1.0).value, 0.0);
  EXPECT_DOUBLE_EQ(qbo::quantize(0.5, 1.0).residual, 0.5);
}

TEST(Quantize, ValueIsOnTheLattice) {
  const auto q = qbo::quantize(3.14159, 16.0);
  EXPECT_NEAR(q.value * q.qp, q.lattice_index(), 1e-9);
  EXPECT_EQ(q.lattice_index(), 50.0);
}

TEST(Quantize, RejectsBadInput) {
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::quantize(std::nan(""), 1.0); }));
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::quantize(std::numeric_limits<double>::infinity(), 1.0); }));
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::quantize(1.0, 0.0); }));
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::quantize(1.0, -2.0); }));
}

TEST(QuantizeProperty, ErrorBoundedByHalfCell) {
  qbo::testing::Gen g(11);
  for (int i = 0; i < 100000; ++i) {
    const double f = g.wide();
    const double qp = g.positive_qp();
    const auto q = qbo::quantize(f, qp);
    // Half a cell plus the rounding of qp * f and of k / qp.
    const double slack = 4 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0 / qp);
    ASSERT_LE(std::abs(q.value - f), 0.5 / qp + slack) << "f=" << f << " qp=" << qp;
    ASSERT_GE(q.residual, -0.5);
    ASSERT_LE(q.residual, 0.5);
  }
}

TEST(QuantizeProperty, Idempotent) {
  qbo::testing::Gen g(12);
  for (int i = 0; i < 100000; ++i) {
    const double f = g.wide();
    const double qp = g.positive_qp();
    const double once = qbo::quantize(f, qp).value;
    ASSERT_EQ(qbo::quantize(once, qp).value, once) << "f=" << f << " qp=" << qp;
  }
}

TEST(QuantizeProperty, Monotone) {
  qbo::testing::Gen g(13);
  for (int i = 0; i < 100000; ++i) {
    double a = g.wide();
    double b = g.rng.uniform() < 0.2 ? a + g.real(0.0, 1e-3) : g.wide();
    if (a > b) std::swap(a, b);
    const double qp = g.positive_qp();
    ASSERT_LE(qbo::quantize(a, qp).value, qbo::quantize(b, qp).value) << a << " " << b << " qp=" << qp;
  }
}

TEST(Schedule, StepwiseExponent) {
  const qbo::QuantizationSchedule s{2.0, 2, [](std::uint64_t t) { return static_cast<std::int64_t>(t); }};
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 0), 2.0);
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 3), 16.0);
}

TEST(Schedule, ConstantExponent) {
  const qbo::QuantizationSchedule s{1.0, 10, qbo::constant_power(0)};
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 7), 1.0);
}

TEST(Schedule, DefaultIsPeriodic) {
  const qbo::QuantizationSchedule s;
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 499), 1.0);
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 500), 2.0);
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 1500), 8.0);
}

TEST(Schedule, CapBoundsTheExponent) {
  const qbo::QuantizationSchedule s{1.0, 2, qbo::stepwise_power(1, 10)};
  EXPECT_DOUBLE_EQ(qbo::qp_at(s, 1'000'000), 1024.0);
}

TEST(Schedule, OverflowIsReported) {
  const qbo::QuantizationSchedule s{1.0, 2, qbo::stepwise_power(1)};
  EXPECT_NO_THROW(qbo::qp_at(s, 1000));
  EXPECT_TRUE(throws_code(Errc::schedule_overflow, [&] { qbo::qp_at(s, 1100); }));
}

TEST(Schedule, RejectsInvalidParameters) {
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::qp_at({0.0, 2, qbo::constant_power(0)}, 0); }));
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::qp_at({1.0, 1, qbo::constant_power(0)}, 0); }));
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::stepwise_power(0); }));
}

TEST(ScheduleProperty, Nondecreasing) {
  const qbo::QuantizationSchedule s{3.0, 3, qbo::stepwise_power(7, 200)};
  double prev = 0.0;
  for (std::uint64_t t = 0; t < 5000; ++t) {
    const double q = qbo::qp_at(s, t);
    ASSERT_GT(q, 0.0);
    ASSERT_GE(q, prev);
    prev = q;
  }
}

TEST(ErrorMoments, Theory) {
  EXPECT_EQ(qbo::theoretical_error_moments(1.0).mean, 0.0);
  EXPECT_NEAR(qbo::theoretical_error_moments(1.0).variance, 0.0833333, 1e-7);
  EXPECT_NEAR(qbo::theoretical_error_moments(2.0).variance, 0.0208333, 1e-7);
  EXPECT_LT(qbo::theoretical_error_moments(1e9).variance, 1e-19);
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::theoretical_error_moments(0.0); }));
}

TEST(ErrorMoments, EmpiricalMatchesTheory) {
  for (double qp : {1.0, 4.0, 16.0}) {
    const std::uint64_t n = 1'000'000;
    const auto th = qbo::theoretical_error_moments(qp);
    const auto em = qbo::empirical_error_stats([](qbo::Rng& r) { return r.uniform(0.0, 100.0); }, qp, n, 99);
    EXPECT_LT(std::abs(em.mean), 3.0 * std::sqrt(th.variance / static_cast<double>(n))) << "qp=" << qp;
    EXPECT_NEAR(em.variance / th.variance, 1.0, 0.02) << "qp=" << qp;
  }
}

TEST(ErrorMoments, IntegerSamplerHasNoError) {
  const auto em = qbo::empirical_error_stats([](qbo::Rng& r) { return std::floor(r.uniform(0.0, 50.0)); }, 1.0,
                                             10000, 3);
  EXPECT_EQ(em.mean, 0.0);
  EXPECT_EQ(em.variance, 0.0);
}

TEST(ErrorMoments, DeterministicGivenSeed) {
  auto s = [](qbo::Rng& r) { return r.uniform(-5.0, 5.0); };
  const auto a = qbo::empirical_error_stats(s, 3.0, 5000, 8);
  const auto b = qbo::empirical_error_stats(s, 3.0, 5000, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(ErrorMoments, TooFewSamples) {
  EXPECT_TRUE(throws_code(Errc::insufficient_samples,
                          [] { qbo::empirical_error_stats([](qbo::Rng& r) { return r.uniform(); }, 1.0, 999, 0); }));
}
