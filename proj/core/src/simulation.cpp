#include "cvqkd/simulation.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

constexpr double kUnitTransmissionGuard = 1e-6;

/// Sample second moments of (a, y) for one quadrature, n - 1 normalization.
struct Moments {
  double var_a = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
};

template <typename GetA, typename GetY>
Moments moments(std::span<const QuadratureRecord> records, GetA get_a, GetY get_y) {
  const auto n = static_cast<double>(records.size());
  double mean_a = 0.0;
  double mean_y = 0.0;
  for (const auto& r : records) {
    mean_a += get_a(r);
    mean_y += get_y(r);
  }
  mean_a /= n;
  mean_y /= n;
  Moments m;
  for (const auto& r : records) {
    const double da = get_a(r) - mean_a;
    const double dy = get_y(r) - mean_y;
    m.var_a += da * da;
    m.var_y += dy * dy;
    m.cov += da * dy;
  }
  m.var_a /= n - 1.0;
  m.var_y /= n - 1.0;
  m.cov /= n - 1.0;
  return m;
}

Moments x_moments(std::span<const QuadratureRecord> records) {
  return moments(records, [](const QuadratureRecord& r) { return r.a_x; },
                 [](const QuadratureRecord& r) { return r.y_x; });
}

Moments p_moments(std::span<const QuadratureRecord> records) {
  return moments(records, [](const QuadratureRecord& r) { return r.a_p; },
                 [](const QuadratureRecord& r) { return r.y_p; });
}

void require_records(std::span<const QuadratureRecord> records, std::size_t minimum,
                     const char* what) {
  if (records.size() < minimum) {
    throw EstimationError(std::string(what) + ": not enough records");
  }
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("records csv: malformed number on line " + std::to_string(line_no));
  }
  return value;
}

} // namespace

std::string_view to_string(ChannelMode m) noexcept {
  return m == ChannelMode::ScaledModulation ? "scaled" : "explicit";
}

ChannelMode parse_channel_mode(std::string_view text) {
  if (text == "scaled" || text == "scaled-modulation") return ChannelMode::ScaledModulation;
  if (text == "explicit" || text == "beamsplitter") return ChannelMode::ExplicitBeamsplitter;
  throw ValidationError("unknown channel mode '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  params.validate();
  if (n_samples < 2) {
    throw DomainError("n_samples must be >= 2");
  }
}

RunConfig RunConfig::calibration(std::uint64_t calibration_seed) const {
  RunConfig cal = *this;
  cal.params.transmission = 1.0;
  cal.seed = calibration_seed;
  return cal;
}

std::vector<QuadratureRecord> simulate_run(const RunConfig& cfg) {
  cfg.validate();
  const ProtocolParams& p = cfg.params;
  const double t = p.transmission;
  const double sd_mod = std::sqrt(p.modulation_variance);
  const double sd_prep = std::sqrt(p.preparation_noise);
  const double signal_gain = std::sqrt(t / 2.0);
  const double eve_gain = std::sqrt((1.0 - t) * p.eve_variance / 2.0);
  // vacuum of the prepared state plus Eve's contribution, merged
  const double channel_gain = std::sqrt((t + (1.0 - t) * p.eve_variance) / 2.0);
  const double det_gain = std::sqrt(0.5);
  const bool explicit_bs = cfg.channel_mode == ChannelMode::ExplicitBeamsplitter;

  std::mt19937_64 engine(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto quadrature = [&](double& a, double& y) {
    a = sd_mod * normal(engine);
    const double prep = sd_prep * normal(engine);
    if (explicit_bs) {
      const double vac = normal(engine);
      const double eve = normal(engine);
      const double det = normal(engine);
      y = signal_gain * (a + prep + vac) + eve_gain * eve + det_gain * det;
    } else {
      const double channel = normal(engine);
      const double det = normal(engine);
      y = signal_gain * (a + prep) + channel_gain * channel + det_gain * det;
    }
  };

  std::vector<QuadratureRecord> records(cfg.n_samples);
  for (auto& r : records) {
    quadrature(r.a_x, r.y_x);
    quadrature(r.a_p, r.y_p);
  }
  return records;
}

double estimate_transmission(std::span<const QuadratureRecord> signal,
                             std::span<const QuadratureRecord> calibration) {
  require_records(signal, 2, "estimate_transmission");
  require_records(calibration, 2, "estimate_transmission");
  const Moments sig[2] = {x_moments(signal), p_moments(signal)};
  const Moments cal[2] = {x_moments(calibration), p_moments(calibration)};
  double sum = 0.0;
  for (int q = 0; q < 2; ++q) {
    if (std::abs(cal[q].cov) < 1e-12) {
      throw EstimationError("estimate_transmission: calibration has no modulation");
    }
    const double ratio = sig[q].cov / cal[q].cov;
    sum += ratio * ratio;
  }
  return 0.5 * sum;
}

double estimate_excess_noise(std::span<const QuadratureRecord> signal, double t_hat,
                             double kappa_known) {
  require_records(signal, 2, "estimate_excess_noise");
  if (!(t_hat > 0.0)) {
    throw EstimationError("estimate_excess_noise: transmission estimate must be positive");
  }
  if (t_hat >= 1.0 - kUnitTransmissionGuard) {
    throw EstimationError(
        "estimate_excess_noise: excess noise is undefined at unity transmission");
  }
  if (!(kappa_known >= 0.0)) {
    throw DomainError("estimate_excess_noise: preparation noise must be >= 0");
  }
  double sum = 0.0;
  for (const Moments& m : {x_moments(signal), p_moments(signal)}) {
    if (m.var_a < 1e-12) {
      throw EstimationError("estimate_excess_noise: no modulation in signal");
    }
    // var(y - g a) at the least-squares gain g = cov / var_a
    const double residual = m.var_y - m.cov * m.cov / m.var_a;
    sum += (2.0 * residual - 1.0 - t_hat * (1.0 + kappa_known)) / (1.0 - t_hat);
  }
  return 0.5 * sum;
}

double empirical_mutual_information(std::span<const QuadratureRecord> signal) {
  require_records(signal, 100, "empirical_mutual_information");
  double total = 0.0;
  for (const Moments& m : {x_moments(signal), p_moments(signal)}) {
    if (!(m.var_a > 0.0 && m.var_y > 0.0)) {
      throw EstimationError("empirical_mutual_information: zero-variance data");
    }
    const double rho = m.cov / std::sqrt(m.var_a * m.var_y);
    if (!(std::abs(rho) < 1.0)) {
      throw EstimationError("empirical_mutual_information: perfectly correlated data");
    }
    total += -0.5 * std::log2(1.0 - rho * rho);
  }
  return total;
}

EndToEndResult estimate_rate(const ProtocolParams& params,
                             std::span<const QuadratureRecord> signal,
                             std::span<const QuadratureRecord> calibration) {
  params.validate();
  EndToEndResult out;
  EstimationResult& est = out.estimate;
  est.n_used = signal.size();
  est.t_hat = estimate_transmission(signal, calibration);
  est.i_hat = empirical_mutual_information(signal);

  ProtocolParams assumed = params;
  if (est.t_hat >= 1.0 - kUnitTransmissionGuard) {
    // Eve has no access to an identity channel; W is irrelevant.
    est.w_hat = std::numeric_limits<double>::quiet_NaN();
    assumed.transmission = 1.0;
    assumed.eve_variance = 1.0;
    est.projected = true;
  } else {
    est.w_hat = estimate_excess_noise(signal, est.t_hat, params.preparation_noise);
    assumed.transmission = est.t_hat;
    assumed.eve_variance = std::max(est.w_hat, 1.0);
    est.projected = est.w_hat < 1.0;
  }

  out.breakdown = key_rate(assumed);
  out.breakdown.mutual_info = est.i_hat;
  out.breakdown.key_rate = params.reconciliation_efficiency * est.i_hat - out.breakdown.holevo;
  return out;
}

EndToEndResult end_to_end_rate(const RunConfig& cfg,
                               std::span<const QuadratureRecord> calibration) {
  const auto signal = simulate_run(cfg);
  return estimate_rate(cfg.params, signal, calibration);
}

void write_records_csv(std::ostream& out, std::span<const QuadratureRecord> records) {
  const auto old_precision = out.precision(17);
  out << "a_x,a_p,y_x,y_p\n";
  for (const auto& r : records) {
    out << r.a_x << ',' << r.a_p << ',' << r.y_x << ',' << r.y_p << '\n';
  }
  out.precision(old_precision);
}

std::vector<QuadratureRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "a_x,a_p,y_x,y_p") {
    throw ValidationError("records csv: expected header 'a_x,a_p,y_x,y_p'");
  }
  std::vector<QuadratureRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double fields[4];
    std::string_view rest = line;
    for (int k = 0; k < 4; ++k) {
      const auto comma = rest.find(',');
      if ((k < 3) == (comma == std::string_view::npos)) {
        throw ValidationError("records csv: expected 4 fields on line " + std::to_string(line_no));
      }
      fields[k] = parse_double(rest.substr(0, comma), line_no);
      if (!std::isfinite(fields[k])) {
        throw ValidationError("records csv: non-finite value on line " + std::to_string(line_no));
      }
      rest = k < 3 ? rest.substr(comma + 1) : std::string_view{};
    }
    records.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return records;
}

} // namespace cvqkd
