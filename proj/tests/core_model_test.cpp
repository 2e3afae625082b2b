#include <gtest/gtest.h>

#include <cmath>

#include "linqs/core_model.hpp"
#include "test_support.hpp"

namespace linqs {
namespace {

using testing::Random;

TEST(SymplecticForm, SingleModeBlock) {
  const auto s = symplectic_form(1);
  MatrixXd expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_EQ(s.matrix(), expected);
}

TEST(SymplecticForm, TwoModeBlock) {
  const auto s = symplectic_form(2);
  MatrixXd expected(4, 4);
  expected << 0, 0, 1, 0,  //
      0, 0, 0, 1,          //
      -1, 0, 0, 0,         //
      0, -1, 0, 0;
  EXPECT_EQ(s.matrix(), expected);
}

TEST(SymplecticForm, AlgebraIdentities) {
  for (Index n = 1; n <= 6; ++n) {
    const MatrixXd s = symplectic_form(n).matrix();
    const MatrixXd id = MatrixXd::Identity(2 * n, 2 * n);
    EXPECT_EQ(MatrixXd(s.transpose()), MatrixXd(-s)) << "N=" << n;
    EXPECT_EQ(MatrixXd(s * s), MatrixXd(-id)) << "N=" << n;
    EXPECT_EQ(MatrixXd(s * s.transpose()), id) << "N=" << n;
    for (Index i = 0; i < s.size(); ++i) {
      const double v = s.data()[i];
      EXPECT_TRUE(v == 0.0 || v == 1.0 || v == -1.0);
    }
  }
}

TEST(SymplecticForm, RejectsZeroModes) { EXPECT_THROW(symplectic_form(0), DimensionError); }

TEST(BuildDrift, DampedOscillatorMatchesIndependentEvaluation) {
  const auto sys = testing::damped_oscillator(1.0, 0.5);
  const auto loops = testing::loop_drift_diffusion(sys);
  MatrixXd expected(2, 2);
  expected << -0.25, 1.0, -1.0, -0.25;
  EXPECT_LE(max_abs(loops.drift - expected), 1e-15);  // oracle agrees with the frozen value
  EXPECT_LE(max_abs(build_drift(sys) - expected), 1e-12);
}

TEST(BuildDiffusion, DampedOscillatorMatchesIndependentEvaluation) {
  const auto sys = testing::damped_oscillator(1.0, 0.5);
  const auto loops = testing::loop_drift_diffusion(sys);
  const MatrixXd expected = 0.25 * MatrixXd::Identity(2, 2);
  EXPECT_LE(max_abs(loops.diffusion - expected), 1e-15);
  EXPECT_LE(max_abs(build_diffusion(sys) - expected), 1e-12);
}

TEST(BuildDrift, ClosedSystemIsSigmaM) {
  Random rng(11);
  for (Index n = 1; n <= 3; ++n) {
    LinearOpenSystem sys{n, rng.symmetric(2 * n), MatrixXcd::Zero(1, 2 * n)};
    const MatrixXd a = build_drift(sys);
    EXPECT_LE(max_abs(a - symplectic_form(n).matrix() * sys.hamiltonian), 1e-15);
    EXPECT_NEAR(a.trace(), 0.0, 1e-14);
    EXPECT_EQ(build_diffusion(sys), MatrixXd::Zero(2 * n, 2 * n));
  }
}

TEST(BuildDrift, RealCouplingWithoutHamiltonianGivesZeroDrift) {
  Random rng(12);
  LinearOpenSystem sys{2, MatrixXd::Zero(4, 4), rng.complex_matrix(3, 4).real().cast<Complex>()};
  EXPECT_EQ(build_drift(sys), MatrixXd::Zero(4, 4));
}

TEST(BuildDriftDiffusion, RandomSystemsAgreeWithLoopEvaluation) {
  Random rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = rng.system(rng.integer(1, 3), rng.integer(1, 3));
    const auto ad = build_drift_diffusion(sys);
    const auto loops = testing::loop_drift_diffusion(sys);
    EXPECT_LE(max_abs(ad.drift - loops.drift), 1e-12);
    EXPECT_LE(max_abs(ad.diffusion - loops.diffusion), 1e-12);
  }
}

TEST(BuildDiffusion, SymmetricAndPositiveSemidefinite) {
  Random rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sys = rng.system(rng.integer(1, 4), rng.integer(1, 4));
    const MatrixXd d = build_diffusion(sys);
    EXPECT_EQ(d, MatrixXd(d.transpose()));
    EXPECT_GE(min_hermitian_eigenvalue(d), -1e-10);
    EXPECT_LT(detail::gram_parts(sys.coupling).residue, 1e-12);
  }
}

TEST(BuildDriftDiffusion, GlobalPhaseOnOneRowIsInvisible) {
  Random rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    auto sys = rng.system(2, 3);
    const auto before = build_drift_diffusion(sys);
    const Index row = rng.integer(0, 2);
    sys.coupling.row(row) *= std::polar(1.0, rng.uniform(0.0, 6.283185307179586));
    const auto after = build_drift_diffusion(sys);
    EXPECT_LE(max_abs(before.drift - after.drift), 1e-12);
    EXPECT_LE(max_abs(before.diffusion - after.diffusion), 1e-12);
  }
}

TEST(ValidateModel, DampedOscillatorPasses) {
  const auto report = validate_model(testing::damped_oscillator());
  EXPECT_TRUE(report.ok()) << report.failures();
}

TEST(ValidateModel, AsymmetricHamiltonianFailsNamingTheEntries) {
  auto sys = testing::damped_oscillator();
  sys.hamiltonian(0, 1) = 0.3;
  const auto report = validate_model(sys);
  EXPECT_FALSE(report.ok());
  EXPECT_NE(report.failures().find("asymmetric Hamiltonian"), std::string::npos);
  EXPECT_NE(report.failures().find("M(1,2)"), std::string::npos);
  EXPECT_THROW(build_drift(sys), ValidationError);
}

TEST(ValidateModel, AsymmetryWithinToleranceIsSymmetrized) {
  auto sys = testing::damped_oscillator();
  sys.hamiltonian(0, 1) = 4e-11;
  EXPECT_TRUE(validate_model(sys).ok());
  const auto v = validated(sys);
  EXPECT_EQ(v.hamiltonian(0, 1), v.hamiltonian(1, 0));
  EXPECT_DOUBLE_EQ(v.hamiltonian(0, 1), 2e-11);
}

TEST(ValidateModel, CouplingColumnMismatchFails) {
  auto sys = testing::damped_oscillator();
  sys.coupling = MatrixXcd::Ones(1, 3);
  const auto report = validate_model(sys);
  EXPECT_FALSE(report.ok());
  EXPECT_NE(report.failures().find("dimension mismatch"), std::string::npos);
  EXPECT_THROW(build_diffusion(sys), ValidationError);
}

TEST(ValidateModel, HamiltonianShapeAndFinitenessChecked) {
  auto sys = testing::damped_oscillator();
  sys.hamiltonian = MatrixXd::Identity(3, 3);
  EXPECT_FALSE(validate_model(sys).ok());

  sys = testing::damped_oscillator();
  sys.hamiltonian(1, 1) = std::nan("");
  EXPECT_FALSE(validate_model(sys).ok());

  sys = testing::damped_oscillator();
  sys.coupling(0, 0) = Complex(INFINITY, 0.0);
  EXPECT_FALSE(validate_model(sys).ok());
}

TEST(ValidateModel, RequiresAtLeastOneChannelAndOneMode) {
  auto sys = testing::damped_oscillator();
  sys.coupling = MatrixXcd(0, 2);
  EXPECT_FALSE(validate_model(sys).ok());

  LinearOpenSystem empty;
  EXPECT_FALSE(validate_model(empty).ok());
}

TEST(ValidateModel, ZeroChannelRowIsAccepted) {
  auto sys = testing::damped_oscillator();
  sys.coupling.conservativeResize(2, 2);
  sys.coupling.row(1).setZero();
  EXPECT_TRUE(validate_model(sys).ok());
  EXPECT_LE(max_abs(build_drift(sys) - build_drift(testing::damped_oscillator())), 0.0);
}

TEST(Validated, InterleavedOrderingRejected) {
  EXPECT_THROW(validated(testing::damped_oscillator(), QuadratureOrdering::interleaved),
               ValidationError);
}

}  // namespace
}  // namespace linqs
