#pragma once

// Monte-Carlo prepare-and-measure simulation with Gaussian modulation,
// heterodyne detection and the channel estimators applied to raw data.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cvqkd/security.hpp"

namespace cvqkd {

/// How channel loss is produced in the simulation.
///  - ExplicitBeamsplitter: the prepared state is mixed with Eve's mode.
///  - ScaledModulation: modulation and preparation noise are scaled by
///    sqrt(T) and the remaining channel noise is synthesized to the same
///    total variance (loss simulated by attenuating the modulation).
enum class ChannelMode { ScaledModulation, ExplicitBeamsplitter };

[[nodiscard]] std::string_view to_string(ChannelMode m) noexcept;
[[nodiscard]] ChannelMode parse_channel_mode(std::string_view text);

struct RunConfig {
  ProtocolParams params;
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  ChannelMode channel_mode = ChannelMode::ExplicitBeamsplitter;

  void validate() const;

  /// Same configuration at unity transmission with a different seed:
  /// the calibration measurement that defines T = 1.
  [[nodiscard]] RunConfig calibration(std::uint64_t calibration_seed) const;
};

/// Alice's modulation (a_x, a_p) and Bob's heterodyne outcomes (y_x, y_p).
struct QuadratureRecord {
  double a_x = 0.0;
  double a_p = 0.0;
  double y_x = 0.0;
  double y_p = 0.0;

  friend bool operator==(const QuadratureRecord&, const QuadratureRecord&) = default;
};

struct EstimationResult {
  double t_hat = 0.0;  // estimated transmission
  double w_hat = 0.0;  // estimated Eve variance; NaN when undefined (t_hat ~ 1)
  double i_hat = 0.0;  // empirical mutual information, bits
  std::size_t n_used = 0;
  /// The rate was evaluated with (t_hat, w_hat) projected onto the
  /// physical domain T <= 1, W >= 1.
  bool projected = false;
};

struct EndToEndResult {
  EstimationResult estimate;
  KeyRateBreakdown breakdown;
};

/// Deterministic in cfg.seed. Per sample and quadrature the draws are
/// consumed in a fixed order, so equal configs give identical records.
[[nodiscard]] std::vector<QuadratureRecord> simulate_run(const RunConfig& cfg);

/// T_hat = (cov(y,a)_signal / cov(y,a)_calibration)^2 averaged over x and p.
[[nodiscard]] double estimate_transmission(std::span<const QuadratureRecord> signal,
                                           std::span<const QuadratureRecord> calibration);

/// Least-squares residual variance inverted for Eve's variance W, with
/// preparation noise kappa_known treated as trusted. May return W < 1 on
/// noisy or synthetic data; callers decide how to handle that.
[[nodiscard]] double estimate_excess_noise(std::span<const QuadratureRecord> signal,
                                           double t_hat, double kappa_known);

/// Sum over quadratures of 1/2 log2(1 / (1 - rho^2)).
[[nodiscard]] double empirical_mutual_information(std::span<const QuadratureRecord> signal);

/// Simulate cfg, estimate (T, W, I) against `calibration`, and evaluate the
/// key rate with beta * I_hat in place of beta * I.
[[nodiscard]] EndToEndResult end_to_end_rate(const RunConfig& cfg,
                                             std::span<const QuadratureRecord> calibration);

/// Same as end_to_end_rate but on records that were already simulated.
[[nodiscard]] EndToEndResult estimate_rate(const ProtocolParams& params,
                                           std::span<const QuadratureRecord> signal,
                                           std::span<const QuadratureRecord> calibration);

/// CSV with header `a_x,a_p,y_x,y_p`, 17 significant digits.
void write_records_csv(std::ostream& out, std::span<const QuadratureRecord> records);
[[nodiscard]] std::vector<QuadratureRecord> read_records_csv(std::istream& in);

} // namespace cvqkd
