#pragma once

// Entangling-cloner channel and asymptotic key rates for heterodyne
// detection with direct or reverse reconciliation.

#include <string_view>
#include <utility>

#include "cvqkd/gaussian.hpp"

namespace cvqkd {

enum class Direction { Direct, Reverse };

[[nodiscard]] std::string_view to_string(Direction d) noexcept;
/// Accepts "direct"/"dr" and "reverse"/"rr". Throws ValidationError otherwise.
[[nodiscard]] Direction parse_direction(std::string_view text);

/// One protocol instance. All variances are in shot-noise units.
struct ProtocolParams {
  double modulation_variance = 32.0;      // V_S
  double preparation_noise = 0.0;         // kappa
  double transmission = 1.0;              // T
  double eve_variance = 1.11;             // W
  double reconciliation_efficiency = 0.95; // beta
  Direction direction = Direction::Direct;

  /// Variance of the mode Alice keeps in the entanglement-based picture.
  [[nodiscard]] double mu() const noexcept { return modulation_variance + 1.0; }
  /// Noise carried by each prepared state, 1 + kappa.
  [[nodiscard]] double v0() const noexcept { return 1.0 + preparation_noise; }
  /// Total variance of the mode sent to Bob, mu + kappa.
  [[nodiscard]] double sent_variance() const noexcept { return mu() + preparation_noise; }

  /// Throws DomainError naming the offending field.
  void validate() const;

  [[nodiscard]] ProtocolParams with_transmission(double t) const {
    ProtocolParams p = *this;
    p.transmission = t;
    return p;
  }
  [[nodiscard]] ProtocolParams with_preparation_noise(double kappa) const {
    ProtocolParams p = *this;
    p.preparation_noise = kappa;
    return p;
  }
  [[nodiscard]] ProtocolParams with_direction(Direction d) const {
    ProtocolParams p = *this;
    p.direction = d;
    return p;
  }

  friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

/// Mode slots of the four-mode state after the channel.
enum JointMode : int { kAlice = 0, kBob = 1, kEveOut = 2, kEveMemory = 3 };

struct KeyRateBreakdown {
  double mutual_info = 0.0;  // I(A:B), bits
  double holevo = 0.0;       // chi(E:X), bits
  double key_rate = 0.0;     // beta * I - chi, bits per channel use
  std::pair<double, double> eve_spectrum{1.0, 1.0};
  std::pair<double, double> conditional_spectrum{1.0, 1.0};
};

/// Heterodyne mutual information (both quadratures), bits per use:
///   log2( ((1-T)W + T V_S + T V_0 + 1) / ((1-T)W + T V_0 + 1) )
[[nodiscard]] double mutual_information(const ProtocolParams& p);

/// Noisy EPR (A, B) plus Eve's EPR (E1, E2); B and E1 mixed on a
/// beamsplitter of transmittance T. Output order (A, B, E1', E2).
[[nodiscard]] CovarianceMatrix joint_state_after_channel(const ProtocolParams& p);

/// Closed-form symplectic spectrum (nu_E+, nu_E-) of Eve's two modes,
/// with e_V = (1-T) V + T W and V = V_S + 1 + kappa.
[[nodiscard]] std::pair<double, double> eve_spectrum_analytic(const ProtocolParams& p);

/// chi(E:X) = S(E) - S(E|X); X is Alice (direct) or Bob (reverse), both
/// measured by heterodyne.
[[nodiscard]] double holevo(const ProtocolParams& p);

[[nodiscard]] KeyRateBreakdown key_rate(const ProtocolParams& p);

/// Channel loss in dB for transmission t, and back.
[[nodiscard]] double transmission_to_loss_db(double t);
[[nodiscard]] double loss_db_to_transmission(double loss_db);

} // namespace cvqkd
