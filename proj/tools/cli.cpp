#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cvqkd/errors.hpp"
#include "cvqkd/scanner.hpp"
#include "cvqkd/security.hpp"
#include "cvqkd/serialize.hpp"
#include "cvqkd/simulation.hpp"

namespace cvqkd::cli {

namespace {

enum class OutputFormat { Csv, Json };

/// Thrown for option values that pass parsing but not their domain.
class FlagError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

CLI::Validator open_closed(double lo, double hi) {
  return CLI::Validator(
      [lo, hi](std::string& input) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(input, v) || !(v > lo && v <= hi)) {
          std::ostringstream msg;
          msg << "Value " << input << " not in range (" << lo << ", " << hi << "]";
          return msg.str();
        }
        return {};
      },
      "(" + std::to_string(lo) + "," + std::to_string(hi) + "]");
}

struct ParamFlags {
  double vs = 32.0;
  double kappa = 0.0;
  double v0 = 1.0;
  double t = 1.0;
  double loss_db = 0.0;
  double w = 1.11;
  double beta = 0.95;
  std::string direction = "direct";
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* v0_opt = nullptr;
  CLI::Option* t_opt = nullptr;
  CLI::Option* loss_opt = nullptr;

  void attach(CLI::App& app, bool with_transmission) {
    app.add_option("--vs", vs, "Modulation variance V_S (SNU)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1e12));
    kappa_opt = app.add_option("--kappa", kappa, "Preparation noise kappa (SNU)")
                    ->capture_default_str()
                    ->check(CLI::Range(0.0, 1e12));
    v0_opt = app.add_option("--v0", v0, "Preparation noise as V_0 = 1 + kappa (SNU)")
                 ->check(CLI::Range(1.0, 1e12));
    kappa_opt->excludes(v0_opt);
    if (with_transmission) {
      t_opt = app.add_option("--t", t, "Channel transmission T")
                  ->capture_default_str()
                  ->check(open_closed(0.0, 1.0));
      loss_opt = app.add_option("--loss-db", loss_db, "Channel loss in dB, -10 log10 T")
                     ->check(CLI::Range(0.0, 1e6));
      t_opt->excludes(loss_opt);
    }
    app.add_option("--w", w, "Eve's EPR variance W (SNU)")
        ->capture_default_str()
        ->check(CLI::Range(1.0, 1e12));
    app.add_option("--beta", beta, "Reconciliation efficiency")
        ->capture_default_str()
        ->check(open_closed(0.0, 1.0));
    app.add_option("--direction", direction, "Reconciliation direction")
        ->capture_default_str()
        ->check(CLI::IsMember({"direct", "reverse"}));
  }

  ProtocolParams resolve() const {
    ProtocolParams p;
    p.modulation_variance = vs;
    p.preparation_noise = v0_opt != nullptr && v0_opt->count() > 0 ? v0 - 1.0 : kappa;
    p.transmission = 1.0;
    if (loss_opt != nullptr && loss_opt->count() > 0) {
      p.transmission = loss_db_to_transmission(loss_db);
      if (!(p.transmission > 0.0)) throw FlagError("--loss-db: loss too large");
    } else if (t_opt != nullptr) {
      p.transmission = t;
    }
    p.eve_variance = w;
    p.reconciliation_efficiency = beta;
    p.direction = parse_direction(direction);
    p.validate();
    return p;
  }
};

struct OutputFlags {
  std::string path;
  std::string format = "csv";

  void attach(CLI::App& app) {
    app.add_option("--out", path, "Write results to this file");
    app.add_option("--format", format, "Output file format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
  }

  [[nodiscard]] OutputFormat kind() const {
    return format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  }

  /// Opens the output file up front so an unwritable path is reported as a
  /// flag error before any computation.
  [[nodiscard]] std::unique_ptr<std::ofstream> open() const {
    if (path.empty()) return nullptr;
    auto file = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
    if (!*file) throw FlagError("--out: cannot open '" + path + "' for writing");
    return file;
  }
};

template <typename Report>
void emit(std::ofstream* file, OutputFormat format, const Report& report) {
  if (file == nullptr) return;
  if (format == OutputFormat::Json) {
    *file << to_json(report) << '\n';
  } else {
    write_csv(*file, report);
  }
  file->flush();
  if (!*file) throw Error("failed while writing output file");
}

void print_params(std::ostream& out, const ProtocolParams& p, bool with_t) {
  out << "params: V_S=" << p.modulation_variance << " kappa=" << p.preparation_noise
      << " (V_0=" << p.v0() << ")";
  if (with_t) {
    out << " T=" << p.transmission;
  }
  out << " W=" << p.eve_variance << " beta=" << p.reconciliation_efficiency
      << " direction=" << to_string(p.direction) << '\n';
}

void print_threshold(std::ostream& out, const ThresholdResult& t) {
  out << "t_min      = " << t.t_min << '\n'
      << "loss_db    = " << t.loss_db << '\n'
      << "converged  = " << (t.converged ? "yes" : "no") << " (" << t.iterations
      << " iterations)\n";
}

struct Subcommands {
  CLI::App* rate = nullptr;
  CLI::App* threshold = nullptr;
  CLI::App* optimal = nullptr;
  CLI::App* scan = nullptr;
  CLI::App* curve = nullptr;
  CLI::App* simulate = nullptr;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secret key rates and simulation for CV-QKD with noisy preparation", "cvqkd"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Subcommands sub;
  ParamFlags rate_params, threshold_params, optimal_params, scan_params, curve_params,
      sim_params;
  OutputFlags rate_out, threshold_out, optimal_out, scan_out, curve_out, sim_out;

  sub.rate = app.add_subcommand("rate", "Key rate breakdown at one parameter point");
  rate_params.attach(*sub.rate, true);
  rate_out.attach(*sub.rate);

  sub.threshold = app.add_subcommand("threshold", "Minimal transmission with a positive rate");
  threshold_params.attach(*sub.threshold, false);
  threshold_out.attach(*sub.threshold);

  double kappa_min = 0.0, kappa_max = 30.0, kappa_tol = 1e-3;
  sub.optimal = app.add_subcommand("optimal-kappa",
                                   "Preparation noise that minimizes the threshold");
  optimal_params.attach(*sub.optimal, false);
  optimal_out.attach(*sub.optimal);
  sub.optimal->add_option("--kappa-min", kappa_min)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.optimal->add_option("--kappa-max", kappa_max)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.optimal->add_option("--kappa-tol", kappa_tol)->capture_default_str()->check(CLI::PositiveNumber);

  double scan_kmin = 0.0, scan_kmax = 30.0, scan_tmin = 0.01, scan_tmax = 1.0;
  std::size_t scan_ksteps = 101, scan_tsteps = 101;
  sub.scan = app.add_subcommand("scan", "Key rate over a (kappa, T) grid");
  scan_params.attach(*sub.scan, false);
  scan_out.attach(*sub.scan);
  sub.scan->add_option("--kappa-min", scan_kmin)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.scan->add_option("--kappa-max", scan_kmax)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.scan->add_option("--kappa-steps", scan_ksteps)->capture_default_str()->check(CLI::Range(1, 100000));
  sub.scan->add_option("--t-min", scan_tmin)->capture_default_str()->check(open_closed(0.0, 1.0));
  sub.scan->add_option("--t-max", scan_tmax)->capture_default_str()->check(open_closed(0.0, 1.0));
  sub.scan->add_option("--t-steps", scan_tsteps)->capture_default_str()->check(CLI::Range(1, 100000));

  double loss_min = 0.0, loss_max = 2.0;
  std::size_t loss_steps = 41;
  sub.curve = app.add_subcommand("curve", "Key rate versus channel loss");
  curve_params.attach(*sub.curve, false);
  curve_out.attach(*sub.curve);
  sub.curve->add_option("--loss-min", loss_min)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.curve->add_option("--loss-max", loss_max)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.curve->add_option("--loss-steps", loss_steps)->capture_default_str()->check(CLI::Range(1, 1000000));

  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> calibration_seed;
  std::string channel_mode = "explicit";
  sub.simulate = app.add_subcommand("simulate",
                                    "Monte-Carlo prepare-and-measure run with estimation");
  sim_params.attach(*sub.simulate, true);
  sim_out.attach(*sub.simulate);
  sub.simulate->add_option("--n", n_samples, "Number of samples")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{100}, std::size_t{1'000'000'000}));
  sub.simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sub.simulate->add_option("--calibration-seed", calibration_seed,
                           "Seed of the T=1 calibration run (default: seed + 1)");
  sub.simulate->add_option("--channel-mode", channel_mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"explicit", "scaled"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? kExitOk : kExitValidation;
  }

  out << std::setprecision(10);
  try {
    if (sub.rate->parsed()) {
      const ProtocolParams p = rate_params.resolve();
      auto file = rate_out.open();
      const RateReport report{p, key_rate(p)};
      print_params(out, p, true);
      const auto& b = report.breakdown;
      out << "I(A:B)     = " << b.mutual_info << " bits\n"
          << "chi(E:X)   = " << b.holevo << " bits\n"
          << "R          = " << b.key_rate << " bits/use\n"
          << "nu_E       = (" << b.eve_spectrum.first << ", " << b.eve_spectrum.second << ")\n"
          << "nu_E|X     = (" << b.conditional_spectrum.first << ", "
          << b.conditional_spectrum.second << ")\n";
      emit(file.get(), rate_out.kind(), report);
    } else if (sub.threshold->parsed()) {
      const ProtocolParams p = threshold_params.resolve();
      auto file = threshold_out.open();
      const ThresholdReport report{p, threshold_transmission(p)};
      print_params(out, p, false);
      print_threshold(out, report.threshold);
      emit(file.get(), threshold_out.kind(), report);
    } else if (sub.optimal->parsed()) {
      const ProtocolParams p = optimal_params.resolve();
      if (kappa_max < kappa_min) throw FlagError("--kappa-max: must be >= --kappa-min");
      auto file = optimal_out.open();
      const Interval range{kappa_min, kappa_max};
      const OptimalNoiseReport report{p, range, optimal_preparation_noise(p, range, kappa_tol)};
      print_params(out, p, false);
      out << "kappa*     = " << report.optimum.kappa << " (V_0 = " << 1.0 + report.optimum.kappa
          << ")\n";
      print_threshold(out, report.optimum.threshold);
      emit(file.get(), optimal_out.kind(), report);
    } else if (sub.scan->parsed()) {
      const ProtocolParams p = scan_params.resolve();
      if (scan_kmax < scan_kmin) throw FlagError("--kappa-max: must be >= --kappa-min");
      if (scan_tmax < scan_tmin) throw FlagError("--t-max: must be >= --t-min");
      auto file = scan_out.open();
      const auto kappas = linspace(scan_kmin, scan_kmax, scan_ksteps);
      const auto ts = linspace(scan_tmin, scan_tmax, scan_tsteps);
      const ContourGrid grid = scan_grid(p, kappas, ts);
      print_params(out, p, false);
      const auto [lo, hi] = std::minmax_element(grid.rates.begin(), grid.rates.end());
      out << "grid       = " << kappas.size() << " x " << ts.size() << '\n'
          << "rate range = [" << *lo << ", " << *hi << "] bits/use\n";
      emit(file.get(), scan_out.kind(), grid);
    } else if (sub.curve->parsed()) {
      const ProtocolParams p = curve_params.resolve();
      if (loss_max < loss_min) throw FlagError("--loss-max: must be >= --loss-min");
      auto file = curve_out.open();
      const auto losses = linspace(loss_min, loss_max, loss_steps);
      const CurveReport report{p, rate_vs_loss_curve(p, losses)};
      print_params(out, p, false);
      out << "loss_db  rate\n";
      for (const auto& pt : report.points) out << pt.loss_db << "  " << pt.rate << '\n';
      emit(file.get(), curve_out.kind(), report);
    } else if (sub.simulate->parsed()) {
      RunConfig cfg;
      cfg.params = sim_params.resolve();
      cfg.n_samples = n_samples;
      cfg.seed = seed;
      cfg.channel_mode = parse_channel_mode(channel_mode);
      cfg.validate();
      auto file = sim_out.open();
      const std::uint64_t cal_seed = calibration_seed.value_or(seed + 1);
      const auto calibration = simulate_run(cfg.calibration(cal_seed));
      const auto signal = simulate_run(cfg);
      const SimulationReport report{cfg, cal_seed,
                                    estimate_rate(cfg.params, signal, calibration)};
      const auto& e = report.result.estimate;
      const auto& b = report.result.breakdown;
      print_params(out, cfg.params, true);
      out << "samples    = " << e.n_used << " (seed " << cfg.seed << ", calibration seed "
          << cal_seed << ", " << to_string(cfg.channel_mode) << " channel)\n"
          << "T_hat      = " << e.t_hat << '\n'
          << "W_hat      = " << e.w_hat << '\n'
          << "I_hat      = " << e.i_hat << " bits (model " << mutual_information(cfg.params)
          << ")\n"
          << "chi(E:X)   = " << b.holevo << " bits\n"
          << "R          = " << b.key_rate << " bits/use (model "
          << key_rate(cfg.params).key_rate << ")\n";
      if (e.projected) {
        err << "warning: estimated channel is unphysical (W_hat < 1 or T_hat ~ 1); "
               "rate evaluated on the projected parameters\n";
      }
      if (file) {
        if (sim_out.kind() == OutputFormat::Json) {
          *file << to_json(report) << '\n';
        } else {
          write_records_csv(*file, signal);
        }
        file->flush();
        if (!*file) throw Error("failed while writing output file");
      }
    }
  } catch (const FlagError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: invalid parameters: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}

} // namespace cvqkd::cli
