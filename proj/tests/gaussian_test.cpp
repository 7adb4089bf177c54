#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"
#include "oracles.hpp"

namespace cvqkd {
namespace {

using testing::random_physical_state;
using testing::two_mode_spectrum;

TEST(EntropyG, ExactValues) {
  EXPECT_EQ(entropy_g(1.0), 0.0);
  EXPECT_DOUBLE_EQ(entropy_g(3.0), 2.0);
  // mpmath, 40 digits: g(1.11) = 0.31163471528630427170...
  EXPECT_NEAR(entropy_g(1.11), 0.31163471528630427, 1e-15);
}

TEST(EntropyG, ClampsFloatingPointNoiseBelowOne) {
  EXPECT_EQ(entropy_g(1.0 - 5e-10), 0.0);
  EXPECT_EQ(entropy_g(1.0 - 1e-9), 0.0);
  EXPECT_THROW((void)entropy_g(1.0 - 1e-8), DomainError);
  EXPECT_THROW((void)entropy_g(0.5), DomainError);
  EXPECT_THROW((void)entropy_g(std::nan("")), DomainError);
}

TEST(EntropyG, IncreasingAndContinuousAtOne) {
  double prev = 0.0;
  for (double x = 1.0 + 1e-12; x < 100.0; x *= 1.5) {
    const double g = entropy_g(x);
    EXPECT_GT(g, prev);
    prev = g;
  }
  EXPECT_LT(entropy_g(1.0 + 1e-12), 1e-10);
}

TEST(SymplecticForm, Structure) {
  for (int n = 1; n <= 4; ++n) {
    const Eigen::MatrixXd omega = symplectic_form(n);
    EXPECT_TRUE((omega + omega.transpose()).isZero());
    EXPECT_TRUE((omega * omega + Eigen::MatrixXd::Identity(2 * n, 2 * n)).isZero());
  }
  EXPECT_TRUE((pauli_z() * pauli_z()).isIdentity());
}

TEST(CovarianceMatrix, RejectsInvalidInput) {
  EXPECT_THROW(CovarianceMatrix(Eigen::MatrixXd::Identity(3, 3)), ValidationError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  asym(0, 1) = 0.1;
  EXPECT_THROW(CovarianceMatrix{asym}, ValidationError);
  Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  EXPECT_THROW(CovarianceMatrix{indefinite}, ValidationError);
  EXPECT_THROW(CovarianceMatrix::vacuum(0), ValidationError);
}

TEST(SymplecticSpectrum, TrivialStates) {
  const auto vac = symplectic_spectrum(CovarianceMatrix::vacuum(2));
  ASSERT_EQ(vac.size(), 2u);
  EXPECT_NEAR(vac[0], 1.0, 1e-12);
  EXPECT_NEAR(vac[1], 1.0, 1e-12);

  const auto thermal = symplectic_spectrum(CovarianceMatrix(Eigen::MatrixXd::Identity(2, 2) * 3.0));
  ASSERT_EQ(thermal.size(), 1u);
  EXPECT_NEAR(thermal[0], 3.0, 1e-12);

  const auto pure = symplectic_spectrum(epr_state(2.0, 0.0));
  EXPECT_NEAR(pure[0], 1.0, 1e-12);
  EXPECT_NEAR(pure[1], 1.0, 1e-12);
}

TEST(SymplecticSpectrum, NoisyEprAtHighNoiseOperatingPoint) {
  // Invariants by hand: Delta = 33^2 + 51^2 - 2*1088 = 1514, sqrt(det) = 33*51 - 1088 = 595,
  // nu^2 = (1514 +- 936)/2 = 1225, 289.
  const auto gamma = epr_state(33.0, 18.0);
  EXPECT_TRUE(gamma.block(1, 1).isApprox(51.0 * Eigen::Matrix2d::Identity()));
  const auto spectrum = symplectic_spectrum(gamma);
  EXPECT_NEAR(spectrum[0], 35.0, 1e-10);
  EXPECT_NEAR(spectrum[1], 17.0, 1e-10);
  const auto [plus, minus] = two_mode_spectrum(gamma.entries());
  EXPECT_NEAR(spectrum[0], plus, 1e-9);
  EXPECT_NEAR(spectrum[1], minus, 1e-9);
}

TEST(SymplecticSpectrum, MatchesClosedFormOnRandomTwoModeStates) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto state = random_physical_state(2, rng);
    const auto spectrum = symplectic_spectrum(CovarianceMatrix(state.gamma));
    const auto [plus, minus] = two_mode_spectrum(state.gamma);
    worst = std::max({worst, std::abs(spectrum[0] - plus), std::abs(spectrum[1] - minus)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(SymplecticSpectrum, RecoversConstructedSpectrumUpToFourModes) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    for (int i = 0; i < 200; ++i) {
      const auto state = random_physical_state(n, rng);
      const auto spectrum = symplectic_spectrum(CovarianceMatrix(state.gamma));
      ASSERT_EQ(spectrum.size(), static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        EXPECT_NEAR(spectrum[k], state.spectrum[k], 1e-9) << "n=" << n << " k=" << k;
      }
      EXPECT_TRUE(std::is_sorted(spectrum.values.rbegin(), spectrum.values.rend()));
    }
  }
}

TEST(VonNeumannEntropy, Examples) {
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(von_neumann_entropy(CovarianceMatrix::vacuum(n)), 0.0);
  }
  EXPECT_LT(von_neumann_entropy(epr_state(5.0, 0.0)), 1e-9);
  EXPECT_NEAR(von_neumann_entropy(CovarianceMatrix(Eigen::MatrixXd::Identity(2, 2) * 3.0)), 2.0,
              1e-12);
}

TEST(VonNeumannEntropy, PurityAndNonNegativity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu(1.0, 200.0);
  for (int i = 0; i < 100; ++i) {
    EXPECT_LT(von_neumann_entropy(epr_state(mu(rng), 0.0)), 1e-9);
    EXPECT_LT(von_neumann_entropy(eve_epr_state(mu(rng))), 1e-9);
  }
  for (int i = 0; i < 200; ++i) {
    const auto state = random_physical_state(3, rng);
    const CovarianceMatrix gamma(state.gamma);
    EXPECT_TRUE(is_physical(gamma));
    EXPECT_GE(von_neumann_entropy(gamma), 0.0);
  }
}

TEST(EprState, Construction) {
  EXPECT_TRUE(epr_state(1.0, 0.0).entries().isIdentity());
  const auto gamma = epr_state(3.0, 2.0);
  const double c = std::sqrt(8.0);
  EXPECT_TRUE(gamma.block(0, 0).isApprox(3.0 * Eigen::Matrix2d::Identity()));
  EXPECT_TRUE(gamma.block(1, 1).isApprox(5.0 * Eigen::Matrix2d::Identity()));
  EXPECT_TRUE(gamma.block(0, 1).isApprox(c * pauli_z()));
  EXPECT_TRUE(gamma.block(1, 0).isApprox(c * pauli_z()));
  EXPECT_THROW((void)epr_state(0.99, 0.0), DomainError);
  EXPECT_THROW((void)epr_state(2.0, -0.1), DomainError);
}

TEST(EveEprState, Construction) {
  EXPECT_TRUE(eve_epr_state(1.0).entries().isIdentity());
  const auto gamma = eve_epr_state(1.11);
  // sqrt(1.11^2 - 1) = 0.48176757881783618... (mpmath)
  EXPECT_NEAR(gamma(0, 2), 0.48176757881783618, 1e-15);
  EXPECT_NEAR(gamma(1, 3), -0.48176757881783618, 1e-15);
  const auto spectrum = symplectic_spectrum(eve_epr_state(3.0));
  EXPECT_NEAR(spectrum[0], 1.0, 1e-12);
  EXPECT_NEAR(spectrum[1], 1.0, 1e-12);
  EXPECT_THROW((void)eve_epr_state(0.9), DomainError);
}

TEST(Beamsplitter, UnityTransmissionFlipsSecondPort) {
  // b' = -b at T = 1: a pi phase shift on port b, nothing else.
  const auto gamma = CovarianceMatrix::direct_sum(epr_state(4.0, 1.0), eve_epr_state(1.5));
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(8);
  signs.segment(4, 2).setConstant(-1.0);
  const Eigen::MatrixXd expected = signs.asDiagonal() * gamma.entries() * signs.asDiagonal();
  EXPECT_TRUE(beamsplitter(gamma, 1, 2, 1.0).entries().isApprox(expected, 1e-15));
}

TEST(Beamsplitter, ZeroTransmissionSwapsModes) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = 3.0;
  m(2, 2) = 5.0;
  m(3, 3) = 7.0;
  const auto out = beamsplitter(CovarianceMatrix(m), 0, 1, 0.0);
  EXPECT_DOUBLE_EQ(out(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(out(1, 1), 7.0);
  EXPECT_DOUBLE_EQ(out(2, 2), 2.0);
  EXPECT_DOUBLE_EQ(out(3, 3), 3.0);
}

TEST(Beamsplitter, VacuumIsFixedPoint) {
  for (double t : {0.0, 0.1, 0.5, 0.79, 1.0}) {
    EXPECT_TRUE(beamsplitter(CovarianceMatrix::vacuum(3), 0, 2, t).entries().isIdentity(1e-15));
  }
}

TEST(Beamsplitter, PreservesSymplecticSpectrum) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> t_dist(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const auto state = random_physical_state(3, rng);
    const CovarianceMatrix gamma(state.gamma);
    const auto before = symplectic_spectrum(gamma);
    const auto after = symplectic_spectrum(beamsplitter(gamma, i % 3, (i + 1) % 3, t_dist(rng)));
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(before[k], after[k], 1e-9);
    }
  }
}

TEST(Beamsplitter, RejectsBadArguments) {
  const auto gamma = CovarianceMatrix::vacuum(2);
  EXPECT_THROW((void)beamsplitter(gamma, 0, 1, 1.01), DomainError);
  EXPECT_THROW((void)beamsplitter(gamma, 0, 1, -0.01), DomainError);
  EXPECT_THROW((void)beamsplitter(gamma, 0, 0, 0.5), ValidationError);
  EXPECT_THROW((void)beamsplitter(gamma, 0, 2, 0.5), ValidationError);
}

TEST(ConditionOnHeterodyne, ProductStateUnchanged) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m.topLeftCorner(2, 2) *= 4.0;
  m.bottomRightCorner(2, 2) *= 2.5;
  const auto rest = condition_on_heterodyne(CovarianceMatrix(m), 0);
  EXPECT_TRUE(rest.entries().isApprox(2.5 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST(ConditionOnHeterodyne, PureEprCollapsesToCoherentState) {
  for (double mu : {1.5, 2.0, 33.0, 1000.0}) {
    for (int mode : {0, 1}) {
      EXPECT_TRUE(condition_on_heterodyne(epr_state(mu, 0.0), mode)
                      .entries()
                      .isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-9));
    }
  }
}

TEST(ConditionOnHeterodyne, NoisyEprHandComputation) {
  // rest = 3 I, C = sqrt(3) Z, (G_m + I)^-1 = I/3  =>  3 - 3/3 = 2
  const auto rest = condition_on_heterodyne(epr_state(2.0, 1.0), 0);
  EXPECT_TRUE(rest.entries().isApprox(2.0 * Eigen::MatrixXd::Identity(2, 2), 1e-14));
  // Conditioning on Alice leaves V_0 = 1 + kappa in the sent mode.
  const auto prepared = condition_on_heterodyne(epr_state(33.0, 18.0), 0);
  EXPECT_NEAR(prepared(0, 0), 19.0, 1e-10);
}

TEST(ConditionOnHeterodyne, MatchesSchurOracleOnRandomStates) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto state = random_physical_state(4, rng);
    const int measured = i % 4;
    const auto rest = condition_on_heterodyne(CovarianceMatrix(state.gamma), measured);
    const Eigen::MatrixXd oracle = testing::schur_heterodyne(state.gamma, measured);
    EXPECT_TRUE(rest.entries().isApprox(oracle, 1e-11));
  }
}

TEST(ConditionOnHeterodyne, NeverIncreasesEntropyOfRemainingModes) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto state = random_physical_state(3, rng);
    const CovarianceMatrix gamma(state.gamma);
    const int measured = i % 3;
    std::vector<int> keep;
    for (int k = 0; k < 3; ++k) {
      if (k != measured) keep.push_back(k);
    }
    const double reduced = von_neumann_entropy(partial_state(gamma, keep));
    const double conditional = von_neumann_entropy(condition_on_heterodyne(gamma, measured));
    EXPECT_LE(conditional, reduced + 1e-9);
  }
}

TEST(ConditionOnHeterodyne, RejectsBadMode) {
  EXPECT_THROW((void)condition_on_heterodyne(CovarianceMatrix::vacuum(2), 2), ValidationError);
  EXPECT_THROW((void)condition_on_heterodyne(CovarianceMatrix::vacuum(1), 0), ValidationError);
}

TEST(PartialState, SelectsBlocksInOrder) {
  const auto gamma = epr_state(4.0, 3.0);
  EXPECT_TRUE(partial_state(gamma, {0, 1}).entries().isApprox(gamma.entries()));
  EXPECT_TRUE(partial_state(gamma, {1}).entries().isApprox(7.0 * Eigen::MatrixXd::Identity(2, 2)));
  const auto swapped = partial_state(gamma, {1, 0});
  EXPECT_DOUBLE_EQ(swapped(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(swapped(2, 2), 4.0);
  EXPECT_THROW((void)partial_state(gamma, {2}), ValidationError);
  EXPECT_THROW((void)partial_state(gamma, std::span<const int>{}), ValidationError);
}

} // namespace
} // namespace cvqkd
