#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbo/fpe.hpp"
#include "support.hpp"

using qbo::DensityGrid;
using qbo::DiffusionLaw;
using qbo::Errc;
using qbo::testing::throws_code;

namespace {

double l1(const DensityGrid& a, const DensityGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) s += a.weight(i) * std::abs(a.values[i] - b.values[i]);
  return s;
}

double moment(const DensityGrid& g, int k, double about = 0.0) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) s += g.weight(i) * g.values[i] * std::pow(g.x(i) - about, k);
  return s;
}

double variance(const DensityGrid& g) {
  const double m = moment(g, 1);
  return moment(g, 2, m);
}

// Histogram holding the exact bin masses of rho.
qbo::Histogram rebinned(const DensityGrid& rho, std::size_t bins) {
  qbo::Histogram h;
  h.lo = rho.a;
  h.hi = rho.b;
  h.mass.resize(bins);
  const double w = (rho.b - rho.a) / bins;
  for (std::size_t j = 0; j < bins; ++j) h.mass[j] = rho.integrate(rho.a + j * w, rho.a + (j + 1) * w);
  return h;
}

}  // namespace

TEST(DensityGrid, Validation) {
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { DensityGrid::gaussian(-1, 1, 32, 0, 0.2).validate(); }));
  DensityGrid g = DensityGrid::gaussian(-3, 3, 128, 0, 0.5);
  EXPECT_NO_THROW(g.validate());
  g.values[5] = -1e-3;
  EXPECT_TRUE(throws_code(Errc::invalid_input, [&] { g.validate(); }));
  DensityGrid zero{0.0, 1.0, std::vector<double>(64, 0.0)};
  EXPECT_TRUE(throws_code(Errc::normalization, [&] { zero.normalize(); }));
}

TEST(FpEvolve, NoDynamicsLeavesDensityUnchanged) {
  const auto rho0 = DensityGrid::gaussian(-3, 3, 256, 0.4, 0.3);
  const auto rho = qbo::fp_evolve(rho0, qbo::flat_potential(), DiffusionLaw::constant_q(0.0), 2.0, 0.1);
  EXPECT_EQ(rho.values, rho0.values);
}

TEST(FpEvolve, RelaxesToTheGibbsDensity) {
  const auto f = qbo::quadratic_potential();
  const auto rho0 = DensityGrid::gaussian(-6, 6, 512, 1.5, 0.4);
  const auto rho = qbo::fp_evolve(rho0, f, DiffusionLaw::constant_q(1.0), 20.0, 1e-2);
  const auto gibbs = qbo::gibbs_density(f, 1.0, -6, 6, 512);
  EXPECT_LT(l1(rho, gibbs), 0.01);
  EXPECT_NEAR(variance(rho), 0.5, 1e-3);
}

TEST(FpEvolve, HeatKernelVarianceGrowsLinearly) {
  const double sd = 0.1;
  const auto rho0 = DensityGrid::gaussian(-10, 10, 1001, 0.0, sd);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto rho = qbo::fp_evolve(rho0, qbo::flat_potential(), DiffusionLaw::constant_q(1.0), t, 1e-2);
    const double growth = variance(rho) - variance(rho0);
    EXPECT_NEAR(growth / (1.0 * t), 1.0, 0.02) << "t=" << t;
  }
}

TEST(FpEvolveProperty, MassAndSignPreserved) {
  const auto f = qbo::double_well_potential(0.2);
  for (double q : {0.0, 0.05, 0.3, 2.0}) {
    const auto rho0 = DensityGrid::uniform(-2.5, 2.5, 300, -2.0, 0.5);
    const auto rho = qbo::fp_evolve(rho0, f, DiffusionLaw::constant_q(q), 1.5, 1e-2);
    EXPECT_NEAR(rho.mass(), 1.0, 1e-6) << "Q=" << q;
    for (double v : rho.values) ASSERT_GE(v, 0.0) << "Q=" << q;
  }
}

TEST(FpEvolve, ScheduledDiffusion) {
  const auto law = DiffusionLaw::from_schedule(1.0, {1.0, 2, qbo::stepwise_power(1)}, 0.5);
  EXPECT_DOUBLE_EQ(law(0.0), 1.0);
  EXPECT_DOUBLE_EQ(law(0.6), 0.25);
  const auto rho = qbo::fp_evolve(DensityGrid::gaussian(-3, 3, 128, -1, 0.2), qbo::double_well_potential(), law, 2.0, 0.05);
  EXPECT_NEAR(rho.mass(), 1.0, 1e-6);
}

TEST(FpEvolve, SubstepLimitIsASolverError) {
  qbo::FpOptions opt;
  opt.max_substeps = 10;
  EXPECT_TRUE(throws_code(Errc::solver, [&] {
    qbo::fp_evolve(DensityGrid::gaussian(-3, 3, 256, 0, 0.3), qbo::quadratic_potential(), DiffusionLaw::constant_q(1.0),
                   1.0, 0.1, opt);
  }));
}

TEST(Gibbs, QuadraticIsGaussianWithHalfVariance) {
  const auto g = qbo::gibbs_density(qbo::quadratic_potential(), 1.0, -8, 8, 2001);
  EXPECT_NEAR(g.mass(), 1.0, 1e-12);
  EXPECT_NEAR(variance(g), 0.5, 1e-5);
}

TEST(Gibbs, FlattensAsQGrows) {
  // Monotone for a centred single well; a double well is not monotone (mass
  // first fills the barrier region).
  double prev = 0.0;
  for (double q : {0.1, 0.5, 1.0, 5.0, 50.0, 500.0}) {
    const double v = variance(qbo::gibbs_density(qbo::quadratic_potential(), q, -2, 2, 256));
    EXPECT_GT(v, prev) << "Q=" << q;
    prev = v;
  }
  EXPECT_NEAR(prev, 16.0 / 12.0, 0.01);  // uniform on [-2, 2]
  EXPECT_NEAR(variance(qbo::gibbs_density(qbo::double_well_potential(), 1e4, -2, 2, 256)), 16.0 / 12.0, 0.01);
}

TEST(Gibbs, ConstantPotentialIsUniform) {
  const auto g = qbo::gibbs_density(qbo::flat_potential(3.0), 0.7, 0, 4, 64);
  for (double v : g.values) EXPECT_NEAR(v, 0.25, 1e-14);
  EXPECT_TRUE(throws_code(Errc::invalid_input, [] { qbo::gibbs_density(qbo::flat_potential(), 0.0, 0, 1, 64); }));
}

TEST(Gibbs, FixedPointOfTheSolver) {
  for (const auto& f : {qbo::quadratic_potential(), qbo::double_well_potential(), qbo::double_well_potential(0.2)}) {
    for (double q : {0.2, 1.0}) {
      const auto g = qbo::gibbs_density(f, q, -3, 3, 512);
      EXPECT_LT(l1(qbo::fp_evolve(g, f, DiffusionLaw::constant_q(q), 1.0, 1e-2), g), 1e-3) << f.name << " Q=" << q;
    }
  }
}

TEST(Velocity, VanishesOnGibbs) {
  for (const auto& f : {qbo::quadratic_potential(), qbo::double_well_potential(0.2)}) {
    const auto g = qbo::gibbs_density(f, 0.5, -3, 3, 512);
    const auto vf = qbo::velocity_field(g, f, 0.5);
    EXPECT_LT(vf.max_abs_v(), 1e-6) << f.name;
    EXPECT_EQ(vf.flagged, 0u);
  }
}

TEST(Velocity, ZeroDiffusionIsMinusTheSlope) {
  const auto f = qbo::double_well_potential(0.2);
  const auto g = DensityGrid::gaussian(-2, 2, 201, 0.0, 1.0);
  const auto vf = qbo::velocity_field(g, f, 0.0);
  for (std::size_t i = 1; i + 1 < g.n(); ++i) EXPECT_EQ(vf.v[i], -f.slope(vf.x[i]));
}

TEST(Velocity, UniformDensityInAQuadratic) {
  const auto g = DensityGrid::uniform(-2, 2, 101, -2, 2);
  const auto vf = qbo::velocity_field(g, qbo::quadratic_potential(), 1.0);
  for (std::size_t i = 2; i + 2 < g.n(); ++i) EXPECT_NEAR(vf.v[i], -vf.x[i], 1e-12);
}

TEST(Velocity, VanishingDensityIsMasked) {
  auto g = DensityGrid::uniform(-2, 2, 101, -2, 0);
  const auto vf = qbo::velocity_field(g, qbo::quadratic_potential(), 1.0);
  EXPECT_GT(vf.flagged, 40u);
  EXPECT_TRUE(vf.masked[90]);
  EXPECT_FALSE(vf.masked[20]);
  std::ostringstream os;
  qbo::write_diagnostics(os, vf);
  EXPECT_NE(os.str().find("nan"), std::string::npos);
}

TEST(Barrier, Examples) {
  const auto sym = DensityGrid::gaussian(-3, 3, 257, 0.0, 0.5);
  EXPECT_NEAR(qbo::barrier_crossing_mass(sym, 0.0), 0.5, 1e-6);
  const auto left = DensityGrid::uniform(-3, 3, 257, -2.5, -1.0);
  EXPECT_EQ(qbo::barrier_crossing_mass(left, 0.0), 0.0);
  EXPECT_TRUE(throws_code(Errc::invalid_input, [&] { qbo::barrier_crossing_mass(left, 4.0); }));
}

TEST(Barrier, DoubleWellCrossingNeedsDiffusion) {
  const auto f = qbo::double_well_potential();
  const auto rho0 = DensityGrid::gaussian(-3, 3, 512, -1.0, 0.1);
  const double noisy = qbo::barrier_crossing_mass(qbo::fp_evolve(rho0, f, DiffusionLaw::constant_q(0.5), 10.0, 1e-2), 0.0);
  const double still = qbo::barrier_crossing_mass(qbo::fp_evolve(rho0, f, DiffusionLaw::constant_q(0.0), 10.0, 1e-2), 0.0);
  RecordProperty("crossing_mass_q_0_5", std::to_string(noisy));
  EXPECT_GT(noisy, 0.0);
  EXPECT_LT(still, 1e-6);
}

TEST(Compare, IdenticalAndDisjoint) {
  const auto rho = DensityGrid::gaussian(-4, 4, 513, 0.3, 0.7);
  EXPECT_NEAR(qbo::compare_density_to_histogram(rho, rebinned(rho, 512)), 0.0, 1e-12);
  const auto right = DensityGrid::uniform(-4, 4, 513, 1.0, 3.0);
  const auto left = DensityGrid::uniform(-4, 4, 513, -3.0, -1.0);
  EXPECT_NEAR(qbo::compare_density_to_histogram(right, rebinned(left, 512)), 2.0, 1e-9);
}

TEST(Compare, Errors) {
  const auto rho = DensityGrid::gaussian(-4, 4, 513, 0.0, 1.0);
  auto h = rebinned(DensityGrid::gaussian(-5, 5, 513, 0.0, 1.0), 64);
  EXPECT_TRUE(throws_code(Errc::comparison, [&] { qbo::compare_density_to_histogram(rho, h); }));
  auto h2 = rebinned(rho, 64);
  h2.mass[3] += 0.1;
  EXPECT_TRUE(throws_code(Errc::comparison, [&] { qbo::compare_density_to_histogram(rho, h2); }));
}

TEST(Writers, DensityRows) {
  const auto rho = DensityGrid::uniform(0, 1, 64, 0, 1);
  std::ostringstream os;
  qbo::write_density(os, rho);
  const std::string out = os.str();
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 64);
  EXPECT_EQ(out.substr(0, 2), "0 ");
}
