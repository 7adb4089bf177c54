#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "cvqkd/errors.hpp"
#include "cvqkd/scanner.hpp"

namespace cvqkd {
namespace {

ProtocolParams nominal(double kappa, Direction d = Direction::Direct) {
  ProtocolParams p;
  p.preparation_noise = kappa;
  p.direction = d;
  return p;  // defaults: V_S = 32, W = 1.11, beta = 0.95
}

ProtocolParams ideal(double vs, double kappa = 0.0) {
  ProtocolParams p;
  p.modulation_variance = vs;
  p.preparation_noise = kappa;
  p.eve_variance = 1.0;
  p.reconciliation_efficiency = 1.0;
  return p;
}

/// Linear interpolation of the first sign change of a rate curve, in dB.
std::optional<double> zero_crossing(const std::vector<CurvePoint>& curve) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    if (a.rate > 0.0 && b.rate <= 0.0) {
      return a.loss_db + (b.loss_db - a.loss_db) * a.rate / (a.rate - b.rate);
    }
  }
  return std::nullopt;
}

void expect_bracket(const ProtocolParams& p, const ThresholdResult& r) {
  ASSERT_TRUE(r.converged);
  if (r.t_min + 1e-4 <= 1.0) {
    EXPECT_GT(key_rate(p.with_transmission(r.t_min + 1e-4)).key_rate, 0.0);
  }
  if (r.t_min - 1e-4 > 0.0) {
    EXPECT_LT(key_rate(p.with_transmission(r.t_min - 1e-4)).key_rate, 0.0);
  }
}

TEST(ThresholdTransmission, DirectReconciliationWithoutNoise) {
  const auto r0 = threshold_transmission(nominal(0.0));
  EXPECT_NEAR(r0.t_min, 0.79, 0.01);
  EXPECT_NEAR(r0.t_min, 0.79108316, 2e-5);  // regression
  EXPECT_NEAR(r0.loss_db, -10.0 * std::log10(r0.t_min), 1e-12);
  EXPECT_LE(r0.iterations, 60);
  expect_bracket(nominal(0.0), r0);

  const auto r2 = threshold_transmission(nominal(2.0));
  EXPECT_NEAR(r2.t_min, 0.77, 0.01);
  expect_bracket(nominal(2.0), r2);
}

TEST(ThresholdTransmission, BracketInvariantAcrossParameters) {
  for (double kappa : {0.0, 1.0, 5.0, 18.0, 30.0}) {
    for (Direction d : {Direction::Direct, Direction::Reverse}) {
      const auto p = nominal(kappa, d);
      expect_bracket(p, threshold_transmission(p));
    }
  }
}

TEST(ThresholdTransmission, IdealHighModulationLimit) {
  // Pinned high-V_S limit at kappa = 0; numerically 1 / (1 + 1/e) = 0.7310585786...
  const auto r6 = threshold_transmission(ideal(1e6));
  const auto r5 = threshold_transmission(ideal(1e5));
  EXPECT_NEAR(r6.t_min, 0.7310588, 1e-5);
  EXPECT_LT(std::abs(r6.t_min - r5.t_min), 1e-3);
}

TEST(ThresholdTransmission, InsecureAtUnityTransmission) {
  auto p = nominal(0.0);
  p.modulation_variance = 0.0;
  EXPECT_THROW((void)threshold_transmission(p), InsecureError);
}

TEST(ThresholdTransmission, ReportsNonConvergenceWhenAlwaysSecure) {
  // Reverse reconciliation over a pure-loss channel has no loss limit.
  auto p = ideal(32.0);
  p.direction = Direction::Reverse;
  const auto r = threshold_transmission(p);
  EXPECT_FALSE(r.converged);
}

TEST(OptimalPreparationNoise, DirectReconciliationOptimumNearThreeSnu) {
  const auto best = optimal_preparation_noise(nominal(0.0), {0.0, 30.0});
  EXPECT_NEAR(1.0 + best.kappa, 3.0, 0.5);
  EXPECT_NEAR(best.kappa, 1.9569, 2e-3);  // regression
  EXPECT_NEAR(best.threshold.t_min, 0.77, 0.01);
  EXPECT_LT(best.threshold.t_min, threshold_transmission(nominal(0.0)).t_min);
}

TEST(OptimalPreparationNoise, ReverseReconciliationPrefersNoNoise) {
  const auto best = optimal_preparation_noise(nominal(0.0, Direction::Reverse), {0.0, 30.0});
  EXPECT_EQ(best.kappa, 0.0);
}

TEST(OptimalPreparationNoise, IdealCaseImprovesMonotonically) {
  const auto base = ideal(1e5);
  double prev = 1.0;
  for (double kappa : linspace(0.0, 30.0, 16)) {
    const double t = threshold_transmission(base.with_preparation_noise(kappa)).t_min;
    EXPECT_LE(t, prev + 1e-5) << "kappa=" << kappa;
    prev = t;
  }
  const auto best = optimal_preparation_noise(base, {0.0, 30.0});
  EXPECT_EQ(best.kappa, 30.0);
}

TEST(OptimalPreparationNoise, RejectsBadRange) {
  EXPECT_THROW((void)optimal_preparation_noise(nominal(0.0), {5.0, 1.0}), ValidationError);
  EXPECT_THROW((void)optimal_preparation_noise(nominal(0.0), {-1.0, 1.0}), ValidationError);
}

TEST(ScanGrid, SingleCell) {
  const std::vector<double> k{3.0}, t{0.85};
  const auto grid = scan_grid(nominal(0.0), k, t);
  ASSERT_EQ(grid.rates.size(), 1u);
  EXPECT_EQ(grid.rate(0, 0), key_rate(nominal(3.0).with_transmission(0.85)).key_rate);
  EXPECT_NO_THROW(grid.validate());
}

TEST(ScanGrid, DirectRowWithoutNoiseChangesSignNear79Percent) {
  const std::vector<double> k{0.0}, t{0.78, 0.80};
  const auto grid = scan_grid(nominal(0.0), k, t);
  EXPECT_LT(grid.rate(0, 0), 0.0);
  EXPECT_GT(grid.rate(0, 1), 0.0);
}

TEST(ScanGrid, ReverseSignChangeMovesTowardUnityWithNoise) {
  const auto kappas = linspace(0.0, 30.0, 31);
  const auto ts = linspace(0.01, 1.0, 100);
  const auto grid = scan_grid(nominal(0.0, Direction::Reverse), kappas, ts);
  std::size_t prev = 0;
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    std::size_t first_positive = ts.size();
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (grid.rate(i, j) > 0.0) {
        first_positive = j;
        break;
      }
    }
    EXPECT_GE(first_positive, prev) << "kappa=" << kappas[i];
    prev = first_positive;
  }
}

TEST(ScanGrid, RejectsBadAxes) {
  const std::vector<double> empty, unsorted{0.9, 0.8}, ok{0.5};
  EXPECT_THROW((void)scan_grid(nominal(0.0), empty, ok), ValidationError);
  EXPECT_THROW((void)scan_grid(nominal(0.0), ok, unsorted), ValidationError);
}

TEST(RateVsLossCurve, ZeroLossIsUnityTransmission) {
  const std::vector<double> losses{0.0};
  const auto curve = rate_vs_loss_curve(nominal(2.0), losses);
  EXPECT_EQ(curve[0].rate, key_rate(nominal(2.0).with_transmission(1.0)).key_rate);
}

TEST(RateVsLossCurve, ZeroCrossingsForDirectReconciliation) {
  const auto losses = linspace(0.0, 2.0, 401);
  const auto c0 = zero_crossing(rate_vs_loss_curve(nominal(0.0), losses));
  const auto c2 = zero_crossing(rate_vs_loss_curve(nominal(2.0), losses));
  const auto c18 = zero_crossing(rate_vs_loss_curve(nominal(18.0), losses));
  ASSERT_TRUE(c0 && c2 && c18);
  EXPECT_NEAR(*c0, 1.0, 0.05);
  EXPECT_NEAR(*c2, 1.1, 0.05);
  EXPECT_NEAR(*c18, 0.9044, 1e-3);  // regression value of the model
}

TEST(RateVsLossCurve, AgreesWithThresholdInDecibels) {
  const auto losses = linspace(0.0, 4.0, 801);
  for (double kappa : {0.0, 2.0, 18.0}) {
    for (Direction d : {Direction::Direct, Direction::Reverse}) {
      const auto p = nominal(kappa, d);
      const auto crossing = zero_crossing(rate_vs_loss_curve(p, losses));
      ASSERT_TRUE(crossing);
      EXPECT_NEAR(*crossing, threshold_transmission(p).loss_db, 0.02);
    }
  }
}

TEST(RegionScanner, DirectReverseCrossover) {
  EXPECT_LT(threshold_transmission(nominal(18.0)).t_min,
            threshold_transmission(nominal(18.0, Direction::Reverse)).t_min);
  EXPECT_LT(threshold_transmission(nominal(0.0, Direction::Reverse)).t_min,
            threshold_transmission(nominal(0.0)).t_min);
}

TEST(Linspace, EndpointsAndCount) {
  const auto v = linspace(0.0, 1.0, 101);
  ASSERT_EQ(v.size(), 101u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 1.0);
  EXPECT_NEAR(v[79], 0.79, 1e-15);
  EXPECT_EQ(linspace(2.0, 5.0, 1), std::vector<double>{2.0});
  EXPECT_THROW((void)linspace(0.0, 1.0, 0), ValidationError);
}

} // namespace
} // namespace cvqkd
