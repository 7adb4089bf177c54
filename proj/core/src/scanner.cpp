#include "cvqkd/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

double rate_at(const ProtocolParams& p, double t) {
  return key_rate(p.with_transmission(t)).key_rate;
}

void require_sorted(std::span<const double> axis, const char* name) {
  if (axis.empty()) {
    throw ValidationError(std::string(name) + " must not be empty");
  }
  if (!std::is_sorted(axis.begin(), axis.end())) {
    throw ValidationError(std::string(name) + " must be sorted ascending");
  }
  for (double v : axis) {
    if (!std::isfinite(v)) throw ValidationError(std::string(name) + " has non-finite values");
  }
}

} // namespace

ThresholdResult threshold_transmission(const ProtocolParams& p,
                                       const ThresholdOptions& options) {
  p.with_transmission(1.0).validate();
  if (!(options.lower > 0.0 && options.lower < 1.0) || !(options.tolerance > 0.0) ||
      options.panels < 1) {
    throw ValidationError("threshold_transmission: invalid options");
  }
  const double r_one = rate_at(p, 1.0);
  if (!(r_one > 0.0)) {
    throw InsecureError("insecure at unity transmission (key rate " +
                        std::to_string(r_one) + " <= 0)");
  }

  double lo = options.lower;
  double hi = 1.0;
  ThresholdResult result;
  if (rate_at(p, lo) > 0.0) {
    // No sign change over the full bracket: look for an interior crossing,
    // walking down from T = 1.
    std::optional<double> bracket_lo;
    double upper = 1.0;
    for (int k = options.panels - 1; k >= 0; --k) {
      const double lower = lo + (1.0 - lo) * k / options.panels;
      if (rate_at(p, lower) <= 0.0) {
        bracket_lo = lower;
        break;
      }
      upper = lower;
    }
    if (!bracket_lo) {
      result.t_min = lo;
      result.loss_db = transmission_to_loss_db(lo);
      result.converged = false;
      return result;
    }
    lo = *bracket_lo;
    hi = upper;
  }

  // invariant: R(lo) <= 0 < R(hi)
  int it = 0;
  while (hi - lo > options.tolerance && it < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(p, mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++it;
  }
  result.t_min = 0.5 * (lo + hi);
  result.loss_db = transmission_to_loss_db(result.t_min);
  result.converged = hi - lo <= options.tolerance;
  result.iterations = it;
  return result;
}

OptimalNoise optimal_preparation_noise(const ProtocolParams& p, Interval range,
                                       double kappa_tolerance) {
  if (!(range.lo >= 0.0 && range.hi >= range.lo) || !std::isfinite(range.hi)) {
    throw ValidationError("optimal_preparation_noise: invalid kappa range");
  }
  if (!(kappa_tolerance > 0.0)) {
    throw ValidationError("optimal_preparation_noise: tolerance must be positive");
  }
  // The objective must resolve differences far below the default 1e-5
  // bisection tolerance, otherwise it is piecewise constant near the optimum.
  ThresholdOptions fine;
  fine.tolerance = 1e-11;
  auto evaluate = [&](double kappa) {
    return OptimalNoise{kappa, threshold_transmission(p.with_preparation_noise(kappa), fine)};
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = range.lo;
  double b = range.hi;
  OptimalNoise c = evaluate(b - inv_phi * (b - a));
  OptimalNoise d = evaluate(a + inv_phi * (b - a));
  while (b - a > kappa_tolerance) {
    if (c.threshold.t_min < d.threshold.t_min) {
      b = d.kappa;
      d = c;
      c = evaluate(b - inv_phi * (b - a));
    } else {
      a = c.kappa;
      c = d;
      d = evaluate(a + inv_phi * (b - a));
    }
  }

  OptimalNoise best = c.threshold.t_min < d.threshold.t_min ? c : d;
  for (double edge : {range.lo, range.hi}) {
    OptimalNoise candidate = evaluate(edge);
    if (candidate.threshold.t_min <= best.threshold.t_min) {
      best = candidate;
    }
  }
  return best;
}

void ContourGrid::validate() const {
  require_sorted(kappa_axis, "kappa_axis");
  require_sorted(t_axis, "t_axis");
  if (rates.size() != kappa_axis.size() * t_axis.size()) {
    throw ValidationError("contour grid: rate matrix does not match axis lengths");
  }
  params_base.validate();
}

ContourGrid scan_grid(const ProtocolParams& base, std::span<const double> kappa_axis,
                      std::span<const double> t_axis) {
  require_sorted(kappa_axis, "kappa_axis");
  require_sorted(t_axis, "t_axis");
  ContourGrid grid;
  grid.kappa_axis.assign(kappa_axis.begin(), kappa_axis.end());
  grid.t_axis.assign(t_axis.begin(), t_axis.end());
  grid.params_base = base;
  grid.rates.reserve(kappa_axis.size() * t_axis.size());
  for (double kappa : kappa_axis) {
    const ProtocolParams row = base.with_preparation_noise(kappa);
    for (double t : t_axis) {
      grid.rates.push_back(rate_at(row, t));
    }
  }
  return grid;
}

std::vector<CurvePoint> rate_vs_loss_curve(const ProtocolParams& base,
                                           std::span<const double> loss_db_axis) {
  std::vector<CurvePoint> curve;
  curve.reserve(loss_db_axis.size());
  for (double loss : loss_db_axis) {
    curve.push_back({loss, rate_at(base, loss_db_to_transmission(loss))});
  }
  return curve;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) {
    throw ValidationError("linspace: need at least one point");
  }
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

} // namespace cvqkd
