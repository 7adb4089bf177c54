#pragma once

// Security thresholds, optimal preparation noise and parameter scans.

#include <cstddef>
#include <span>
#include <vector>

#include "cvqkd/security.hpp"

namespace cvqkd {

/// Smallest transmission with a positive key rate.
struct ThresholdResult {
  double t_min = 1.0;
  double loss_db = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ThresholdOptions {
  double lower = 1e-6;      // left end of the initial bracket
  double tolerance = 1e-5;  // absolute, in T
  int max_iterations = 60;
  int panels = 64;          // subdivision when [lower, 1] does not bracket
};

/// Bisection for the zero of R(T) on (0, 1]; p.transmission is ignored.
/// Throws InsecureError when R(1) <= 0. When no sign change is found the
/// result has converged == false and t_min at the lower bracket end.
[[nodiscard]] ThresholdResult threshold_transmission(const ProtocolParams& p,
                                                     const ThresholdOptions& options = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct OptimalNoise {
  double kappa = 0.0;
  ThresholdResult threshold;
};

/// Golden-section minimization of t_min over kappa in `range`, tolerance
/// `kappa_tolerance`. Endpoints are also evaluated, so boundary minima are
/// reported exactly at the boundary.
[[nodiscard]] OptimalNoise optimal_preparation_noise(const ProtocolParams& p, Interval range,
                                                     double kappa_tolerance = 1e-3);

/// Key rates over a (kappa, T) grid; rates are row-major by kappa.
struct ContourGrid {
  std::vector<double> kappa_axis;
  std::vector<double> t_axis;
  std::vector<double> rates;
  ProtocolParams params_base;

  [[nodiscard]] double rate(std::size_t kappa_index, std::size_t t_index) const {
    return rates.at(kappa_index * t_axis.size() + t_index);
  }
  /// Throws ValidationError when the dimensions disagree or axes are unsorted.
  void validate() const;
};

[[nodiscard]] ContourGrid scan_grid(const ProtocolParams& base,
                                    std::span<const double> kappa_axis,
                                    std::span<const double> t_axis);

struct CurvePoint {
  double loss_db = 0.0;
  double rate = 0.0;
};

[[nodiscard]] std::vector<CurvePoint> rate_vs_loss_curve(const ProtocolParams& base,
                                                         std::span<const double> loss_db_axis);

/// n evenly spaced points from lo to hi inclusive (n == 1 gives {lo}).
[[nodiscard]] std::vector<double> linspace(double lo, double hi, std::size_t n);

} // namespace cvqkd
