#pragma once

// CSV and JSON emission for results. JSON documents carry
// `schema_version: 1` and a `kind` tag; parsing re-validates every
// invariant of the decoded value and throws ValidationError on mismatch.
// CSV floating-point fields use 17 significant digits.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cvqkd/scanner.hpp"
#include "cvqkd/security.hpp"
#include "cvqkd/simulation.hpp"

namespace cvqkd {

inline constexpr int kSchemaVersion = 1;

struct RateReport {
  ProtocolParams params;
  KeyRateBreakdown breakdown;
};

struct ThresholdReport {
  ProtocolParams params;
  ThresholdResult threshold;
};

struct OptimalNoiseReport {
  ProtocolParams params;
  Interval kappa_range;
  OptimalNoise optimum;
};

struct CurveReport {
  ProtocolParams params;
  std::vector<CurvePoint> points;
};

struct SimulationReport {
  RunConfig config;
  std::uint64_t calibration_seed = 0;
  EndToEndResult result;
};

[[nodiscard]] std::string to_json(const RateReport& report);
[[nodiscard]] std::string to_json(const ThresholdReport& report);
[[nodiscard]] std::string to_json(const OptimalNoiseReport& report);
[[nodiscard]] std::string to_json(const CurveReport& report);
[[nodiscard]] std::string to_json(const ContourGrid& grid);
[[nodiscard]] std::string to_json(const SimulationReport& report);

template <typename T>
[[nodiscard]] T from_json(std::string_view text);

template <> RateReport from_json<RateReport>(std::string_view text);
template <> ThresholdReport from_json<ThresholdReport>(std::string_view text);
template <> OptimalNoiseReport from_json<OptimalNoiseReport>(std::string_view text);
template <> CurveReport from_json<CurveReport>(std::string_view text);
template <> ContourGrid from_json<ContourGrid>(std::string_view text);
template <> SimulationReport from_json<SimulationReport>(std::string_view text);

/// Long form, header `kappa,transmission,rate`, kappa-major order.
void write_csv(std::ostream& out, const ContourGrid& grid);
/// Header `loss_db,transmission,rate`.
void write_csv(std::ostream& out, const CurveReport& report);
void write_csv(std::ostream& out, const RateReport& report);
void write_csv(std::ostream& out, const ThresholdReport& report);
void write_csv(std::ostream& out, const OptimalNoiseReport& report);

/// Reads the long-form grid CSV back; params_base is left at defaults.
[[nodiscard]] ContourGrid read_grid_csv(std::istream& in);

} // namespace cvqkd
