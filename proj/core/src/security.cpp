#include "cvqkd/security.hpp"

#include <cmath>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

struct HolevoParts {
  double chi;
  SymplecticSpectrum eve;
  SymplecticSpectrum conditional;
};

HolevoParts holevo_parts(const ProtocolParams& p) {
  const CovarianceMatrix joint = joint_state_after_channel(p);
  const CovarianceMatrix eve = partial_state(joint, {kEveOut, kEveMemory});

  const int measured = p.direction == Direction::Direct ? kAlice : kBob;
  // After conditioning three modes remain; Eve's pair is always the last two.
  const CovarianceMatrix conditioned = condition_on_heterodyne(joint, measured);
  const CovarianceMatrix eve_given_x = partial_state(conditioned, {1, 2});

  HolevoParts parts{0.0, symplectic_spectrum(eve), symplectic_spectrum(eve_given_x)};
  double s_eve = 0.0;
  for (double nu : parts.eve.values) s_eve += entropy_g(nu);
  double s_cond = 0.0;
  for (double nu : parts.conditional.values) s_cond += entropy_g(nu);
  parts.chi = s_eve - s_cond;
  return parts;
}

} // namespace

std::string_view to_string(Direction d) noexcept {
  return d == Direction::Direct ? "direct" : "reverse";
}

Direction parse_direction(std::string_view text) {
  if (text == "direct" || text == "dr" || text == "Direct") return Direction::Direct;
  if (text == "reverse" || text == "rr" || text == "Reverse") return Direction::Reverse;
  throw ValidationError("unknown reconciliation direction '" + std::string(text) + "'");
}

void ProtocolParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  };
  require(std::isfinite(modulation_variance) && modulation_variance >= 0.0,
          "modulation_variance must be finite and >= 0");
  require(std::isfinite(preparation_noise) && preparation_noise >= 0.0,
          "preparation_noise must be finite and >= 0");
  require(transmission >= 0.0 && transmission <= 1.0,
          "transmission must lie in [0, 1]");
  require(std::isfinite(eve_variance) && eve_variance >= 1.0,
          "eve_variance must be finite and >= 1");
  require(reconciliation_efficiency > 0.0 && reconciliation_efficiency <= 1.0,
          "reconciliation_efficiency must lie in (0, 1]");
}

double mutual_information(const ProtocolParams& p) {
  p.validate();
  const double t = p.transmission;
  const double channel = (1.0 - t) * p.eve_variance;
  const double noise = channel + t * p.v0() + 1.0;
  return std::log2((noise + t * p.modulation_variance) / noise);
}

CovarianceMatrix joint_state_after_channel(const ProtocolParams& p) {
  p.validate();
  const CovarianceMatrix input = CovarianceMatrix::direct_sum(
      epr_state(p.mu(), p.preparation_noise), eve_epr_state(p.eve_variance));
  return beamsplitter(input, kBob, kEveOut, p.transmission);
}

std::pair<double, double> eve_spectrum_analytic(const ProtocolParams& p) {
  p.validate();
  const double t = p.transmission;
  const double w = p.eve_variance;
  const double e_v = (1.0 - t) * p.sent_variance() + t * w;
  const double root = std::sqrt((e_v + w) * (e_v + w) - 4.0 * t * (w * w - 1.0));
  return {0.5 * (root + (e_v - w)), 0.5 * (root - (e_v - w))};
}

double holevo(const ProtocolParams& p) {
  return holevo_parts(p).chi;
}

KeyRateBreakdown key_rate(const ProtocolParams& p) {
  const HolevoParts parts = holevo_parts(p);
  KeyRateBreakdown out;
  out.mutual_info = mutual_information(p);
  out.holevo = parts.chi;
  out.key_rate = p.reconciliation_efficiency * out.mutual_info - out.holevo;
  out.eve_spectrum = {parts.eve[0], parts.eve[1]};
  out.conditional_spectrum = {parts.conditional[0], parts.conditional[1]};
  return out;
}

double transmission_to_loss_db(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw DomainError("transmission_to_loss_db: transmission must lie in (0, 1]");
  }
  return -10.0 * std::log10(t);
}

double loss_db_to_transmission(double loss_db) {
  if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
    throw DomainError("loss_db_to_transmission: loss must be finite and >= 0");
  }
  return std::pow(10.0, -loss_db / 10.0);
}

} // namespace cvqkd
