#include "cvqkd/serialize.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

using nlohmann::json;

constexpr int kCsvDigits = 17;

class PrecisionGuard {
public:
  explicit PrecisionGuard(std::ostream& out) : out_(out), old_(out.precision(kCsvDigits)) {}
  ~PrecisionGuard() { out_.precision(old_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
  std::ostream& out_;
  std::streamsize old_;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("result document: " + what);
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

json header(std::string_view kind) {
  return json{{"schema_version", kSchemaVersion}, {"kind", kind}};
}

json parse_document(std::string_view text, std::string_view kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("result document: malformed JSON: ") + e.what());
  }
  check(doc.is_object(), "top level must be an object");
  check(doc.value("schema_version", 0) == kSchemaVersion, "unsupported schema_version");
  check(doc.value("kind", std::string{}) == kind,
        "expected kind '" + std::string(kind) + "'");
  return doc;
}

// Wraps nlohmann type/lookup errors so callers only see ValidationError.
template <typename F>
auto decode(F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("result document: ") + e.what());
  }
}

json params_to_json(const ProtocolParams& p) {
  return json{{"modulation_variance", p.modulation_variance},
              {"preparation_noise", p.preparation_noise},
              {"transmission", p.transmission},
              {"eve_variance", p.eve_variance},
              {"reconciliation_efficiency", p.reconciliation_efficiency},
              {"direction", to_string(p.direction)}};
}

ProtocolParams params_from_json(const json& j) {
  ProtocolParams p;
  p.modulation_variance = j.at("modulation_variance").get<double>();
  p.preparation_noise = j.at("preparation_noise").get<double>();
  p.transmission = j.at("transmission").get<double>();
  p.eve_variance = j.at("eve_variance").get<double>();
  p.reconciliation_efficiency = j.at("reconciliation_efficiency").get<double>();
  p.direction = parse_direction(j.at("direction").get<std::string>());
  p.validate();
  return p;
}

json pair_to_json(const std::pair<double, double>& v) {
  return json::array({v.first, v.second});
}

std::pair<double, double> pair_from_json(const json& j) {
  check(j.is_array() && j.size() == 2, "spectrum must be a pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json breakdown_to_json(const KeyRateBreakdown& b) {
  return json{{"mutual_info", b.mutual_info},
              {"holevo", b.holevo},
              {"key_rate", b.key_rate},
              {"eve_spectrum", pair_to_json(b.eve_spectrum)},
              {"conditional_spectrum", pair_to_json(b.conditional_spectrum)}};
}

KeyRateBreakdown breakdown_from_json(const json& j, double beta) {
  KeyRateBreakdown b;
  b.mutual_info = j.at("mutual_info").get<double>();
  b.holevo = j.at("holevo").get<double>();
  b.key_rate = j.at("key_rate").get<double>();
  b.eve_spectrum = pair_from_json(j.at("eve_spectrum"));
  b.conditional_spectrum = pair_from_json(j.at("conditional_spectrum"));
  check(b.mutual_info >= 0.0, "mutual_info must be >= 0");
  check(b.holevo >= -1e-9, "holevo must be >= 0");
  check(close(b.key_rate, beta * b.mutual_info - b.holevo),
        "key_rate must equal beta * mutual_info - holevo");
  for (double nu : {b.eve_spectrum.first, b.eve_spectrum.second,
                    b.conditional_spectrum.first, b.conditional_spectrum.second}) {
    check(nu >= 1.0 - kPhysicalSlack, "symplectic eigenvalue below 1");
  }
  return b;
}

json threshold_to_json(const ThresholdResult& t) {
  return json{{"t_min", t.t_min},
              {"loss_db", t.loss_db},
              {"converged", t.converged},
              {"iterations", t.iterations}};
}

ThresholdResult threshold_from_json(const json& j) {
  ThresholdResult t;
  t.t_min = j.at("t_min").get<double>();
  t.loss_db = j.at("loss_db").get<double>();
  t.converged = j.at("converged").get<bool>();
  t.iterations = j.at("iterations").get<int>();
  check(t.t_min > 0.0 && t.t_min <= 1.0, "t_min must lie in (0, 1]");
  check(t.loss_db >= 0.0, "loss_db must be >= 0");
  check(std::abs(t.loss_db - transmission_to_loss_db(t.t_min)) < 1e-9,
        "loss_db inconsistent with t_min");
  check(t.iterations >= 0, "iterations must be >= 0");
  return t;
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

std::vector<double> axis_from_json(const json& j) {
  check(j.is_array(), "axis must be an array");
  return j.get<std::vector<double>>();
}

} // namespace

std::string to_json(const RateReport& r) {
  json doc = header("rate");
  doc["params"] = params_to_json(r.params);
  doc["breakdown"] = breakdown_to_json(r.breakdown);
  return doc.dump(2);
}

std::string to_json(const ThresholdReport& r) {
  json doc = header("threshold");
  doc["params"] = params_to_json(r.params);
  doc["threshold"] = threshold_to_json(r.threshold);
  return doc.dump(2);
}

std::string to_json(const OptimalNoiseReport& r) {
  json doc = header("optimal-kappa");
  doc["params"] = params_to_json(r.params);
  doc["kappa_range"] = json::array({r.kappa_range.lo, r.kappa_range.hi});
  doc["kappa"] = r.optimum.kappa;
  doc["threshold"] = threshold_to_json(r.optimum.threshold);
  return doc.dump(2);
}

std::string to_json(const CurveReport& r) {
  json doc = header("curve");
  doc["params"] = params_to_json(r.params);
  json points = json::array();
  for (const auto& pt : r.points) {
    points.push_back(json{{"loss_db", pt.loss_db}, {"rate", pt.rate}});
  }
  doc["points"] = std::move(points);
  return doc.dump(2);
}

std::string to_json(const ContourGrid& g) {
  json doc = header("grid");
  doc["params"] = params_to_json(g.params_base);
  doc["kappa_axis"] = g.kappa_axis;
  doc["t_axis"] = g.t_axis;
  json rows = json::array();
  for (std::size_t i = 0; i < g.kappa_axis.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < g.t_axis.size(); ++k) row.push_back(g.rate(i, k));
    rows.push_back(std::move(row));
  }
  doc["rates"] = std::move(rows);
  return doc.dump(2);
}

std::string to_json(const SimulationReport& r) {
  json doc = header("simulation");
  doc["config"] = json{{"params", params_to_json(r.config.params)},
                       {"n_samples", r.config.n_samples},
                       {"seed", r.config.seed},
                       {"channel_mode", to_string(r.config.channel_mode)}};
  doc["calibration_seed"] = r.calibration_seed;
  const EstimationResult& e = r.result.estimate;
  doc["estimate"] = json{{"t_hat", e.t_hat},
                         {"w_hat", number_or_null(e.w_hat)},
                         {"i_hat", e.i_hat},
                         {"n_used", e.n_used},
                         {"projected", e.projected}};
  doc["breakdown"] = breakdown_to_json(r.result.breakdown);
  return doc.dump(2);
}

template <>
RateReport from_json<RateReport>(std::string_view text) {
  const json doc = parse_document(text, "rate");
  return decode([&] {
    RateReport r;
    r.params = params_from_json(doc.at("params"));
    r.breakdown = breakdown_from_json(doc.at("breakdown"), r.params.reconciliation_efficiency);
    return r;
  });
}

template <>
ThresholdReport from_json<ThresholdReport>(std::string_view text) {
  const json doc = parse_document(text, "threshold");
  return decode([&] {
    return ThresholdReport{params_from_json(doc.at("params")),
                           threshold_from_json(doc.at("threshold"))};
  });
}

template <>
OptimalNoiseReport from_json<OptimalNoiseReport>(std::string_view text) {
  const json doc = parse_document(text, "optimal-kappa");
  return decode([&] {
    OptimalNoiseReport r;
    r.params = params_from_json(doc.at("params"));
    const auto range = axis_from_json(doc.at("kappa_range"));
    check(range.size() == 2 && range[0] >= 0.0 && range[1] >= range[0], "invalid kappa_range");
    r.kappa_range = {range[0], range[1]};
    r.optimum.kappa = doc.at("kappa").get<double>();
    check(r.optimum.kappa >= r.kappa_range.lo && r.optimum.kappa <= r.kappa_range.hi,
          "kappa outside kappa_range");
    r.optimum.threshold = threshold_from_json(doc.at("threshold"));
    return r;
  });
}

template <>
CurveReport from_json<CurveReport>(std::string_view text) {
  const json doc = parse_document(text, "curve");
  return decode([&] {
    CurveReport r;
    r.params = params_from_json(doc.at("params"));
    const json& points = doc.at("points");
    check(points.is_array(), "points must be an array");
    for (const json& pt : points) {
      CurvePoint c{pt.at("loss_db").get<double>(), pt.at("rate").get<double>()};
      check(c.loss_db >= 0.0 && std::isfinite(c.loss_db), "loss_db must be >= 0");
      check(std::isfinite(c.rate), "rate must be finite");
      r.points.push_back(c);
    }
    return r;
  });
}

template <>
ContourGrid from_json<ContourGrid>(std::string_view text) {
  const json doc = parse_document(text, "grid");
  return decode([&] {
    ContourGrid g;
    g.params_base = params_from_json(doc.at("params"));
    g.kappa_axis = axis_from_json(doc.at("kappa_axis"));
    g.t_axis = axis_from_json(doc.at("t_axis"));
    const json& rows = doc.at("rates");
    check(rows.is_array() && rows.size() == g.kappa_axis.size(),
          "rates must have one row per kappa");
    for (const json& row : rows) {
      check(row.is_array() && row.size() == g.t_axis.size(),
            "each rates row must have one entry per transmission");
      for (const json& v : row) g.rates.push_back(v.get<double>());
    }
    g.validate();
    return g;
  });
}

template <>
SimulationReport from_json<SimulationReport>(std::string_view text) {
  const json doc = parse_document(text, "simulation");
  return decode([&] {
    SimulationReport r;
    const json& cfg = doc.at("config");
    r.config.params = params_from_json(cfg.at("params"));
    r.config.n_samples = cfg.at("n_samples").get<std::size_t>();
    r.config.seed = cfg.at("seed").get<std::uint64_t>();
    r.config.channel_mode = parse_channel_mode(cfg.at("channel_mode").get<std::string>());
    r.config.validate();
    r.calibration_seed = doc.at("calibration_seed").get<std::uint64_t>();

    const json& est = doc.at("estimate");
    EstimationResult& e = r.result.estimate;
    e.t_hat = est.at("t_hat").get<double>();
    e.w_hat = est.at("w_hat").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                        : est.at("w_hat").get<double>();
    e.i_hat = est.at("i_hat").get<double>();
    e.n_used = est.at("n_used").get<std::size_t>();
    e.projected = est.at("projected").get<bool>();
    check(e.t_hat >= 0.0, "t_hat must be >= 0");
    check(e.i_hat >= 0.0, "i_hat must be >= 0");
    check(e.n_used == r.config.n_samples, "n_used must equal n_samples");
    r.result.breakdown = breakdown_from_json(doc.at("breakdown"),
                                             r.config.params.reconciliation_efficiency);
    check(close(r.result.breakdown.mutual_info, e.i_hat),
          "breakdown mutual_info must equal i_hat");
    return r;
  });
}

void write_csv(std::ostream& out, const ContourGrid& grid) {
  PrecisionGuard guard(out);
  out << "kappa,transmission,rate\n";
  for (std::size_t i = 0; i < grid.kappa_axis.size(); ++i) {
    for (std::size_t k = 0; k < grid.t_axis.size(); ++k) {
      out << grid.kappa_axis[i] << ',' << grid.t_axis[k] << ',' << grid.rate(i, k) << '\n';
    }
  }
}

void write_csv(std::ostream& out, const CurveReport& report) {
  PrecisionGuard guard(out);
  out << "loss_db,transmission,rate\n";
  for (const auto& pt : report.points) {
    out << pt.loss_db << ',' << loss_db_to_transmission(pt.loss_db) << ',' << pt.rate << '\n';
  }
}

void write_csv(std::ostream& out, const RateReport& report) {
  PrecisionGuard guard(out);
  const auto& b = report.breakdown;
  out << "mutual_info,holevo,key_rate,nu_e_plus,nu_e_minus,nu_cond_plus,nu_cond_minus\n"
      << b.mutual_info << ',' << b.holevo << ',' << b.key_rate << ',' << b.eve_spectrum.first
      << ',' << b.eve_spectrum.second << ',' << b.conditional_spectrum.first << ','
      << b.conditional_spectrum.second << '\n';
}

void write_csv(std::ostream& out, const ThresholdReport& report) {
  PrecisionGuard guard(out);
  const auto& t = report.threshold;
  out << "t_min,loss_db,converged,iterations\n"
      << t.t_min << ',' << t.loss_db << ',' << (t.converged ? 1 : 0) << ',' << t.iterations
      << '\n';
}

void write_csv(std::ostream& out, const OptimalNoiseReport& report) {
  PrecisionGuard guard(out);
  const auto& o = report.optimum;
  out << "kappa,v0,t_min,loss_db,converged\n"
      << o.kappa << ',' << 1.0 + o.kappa << ',' << o.threshold.t_min << ','
      << o.threshold.loss_db << ',' << (o.threshold.converged ? 1 : 0) << '\n';
}

ContourGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "kappa,transmission,rate") {
    throw ValidationError("grid csv: expected header 'kappa,transmission,rate'");
  }
  ContourGrid grid;
  std::vector<double> row_t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    double kappa = 0.0, t = 0.0, rate = 0.0;
    char c1 = 0, c2 = 0;
    if (!(fields >> kappa >> c1 >> t >> c2 >> rate) || c1 != ',' || c2 != ',') {
      throw ValidationError("grid csv: malformed line '" + line + "'");
    }
    if (grid.kappa_axis.empty() || grid.kappa_axis.back() != kappa) {
      if (!grid.kappa_axis.empty()) {
        if (grid.t_axis.empty()) grid.t_axis = row_t;
        if (row_t != grid.t_axis) throw ValidationError("grid csv: ragged rows");
      }
      grid.kappa_axis.push_back(kappa);
      row_t.clear();
    }
    row_t.push_back(t);
    grid.rates.push_back(rate);
  }
  if (grid.t_axis.empty()) grid.t_axis = row_t;
  if (row_t != grid.t_axis) throw ValidationError("grid csv: ragged rows");
  grid.validate();
  return grid;
}

} // namespace cvqkd
