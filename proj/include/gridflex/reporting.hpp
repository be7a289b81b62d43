#pragma once

// Rendering of study results: energy activated, cost comparison, sensitivity
// surfaces and generation mix, as byte-stable CSV (LF, dot decimal) and JSON.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridflex/markets.hpp"
#include "gridflex/study.hpp"

namespace gridflex {

/// Rounds half away from zero to `decimals` places and prints without
/// exponent; negative zero prints as zero.
std::string format_fixed(double value, int decimals);

// ---- energy activated ----

struct EnergyRow {
  std::string so, market, product;  // product "All" marks the market row
  std::string direction;            // Up, Down or Total
  std::vector<double> gwh;          // per column; the last column is the annual total
};

struct EnergyActivatedTable {
  std::vector<std::string> columns;  // day labels, then "total"
  std::vector<EnergyRow> rows;
};

/// One market row, one product row and Up/Down rows per market of the scheme.
EnergyActivatedTable emit_energy_activated(const SchemeResult& scheme, const std::vector<DayInfo>& days);
void write_csv(const EnergyActivatedTable& table, std::ostream& out, int decimals = 2);
void write_json(const EnergyActivatedTable& table, std::ostream& out);

// ---- cost comparison ----

struct CostScenario {
  std::string name;
  std::vector<CostReport> costs;  // annual EUR, one per scheme
};

struct CostRow {
  std::string label;               // Common Joint, ML-OPF Local, ...
  std::vector<double> keur;        // per scenario
  std::optional<double> delta_pct; // (last - first) / first in percent, with two scenarios
};

struct CostComparisonTable {
  std::vector<std::string> scenarios;
  std::vector<CostRow> rows;
};

/// Rows for every scheme of the first scenario. Throws Error(MissingScheme)
/// when a scenario lacks one of them or no scheme is given.
CostComparisonTable emit_cost_comparison(const std::vector<CostScenario>& scenarios);
/// Rounds the delta half away from zero at one decimal; empty when the base is zero.
std::optional<double> percent_delta(double base, double value);
void write_csv(const CostComparisonTable& table, std::ostream& out);
void write_json(const CostComparisonTable& table, std::ostream& out);

// ---- sensitivity surface ----

enum class SurfaceMetric { DsoCost, Nsf };
std::string to_string(SurfaceMetric m);
SurfaceMetric parse_surface_metric(const std::string& s);

struct SurfaceData {
  std::string x_name, y_name, metric;
  std::vector<double> xs, ys;
  std::vector<std::vector<std::optional<double>>> values;  // [x][y], empty for holes
  /// Per x: the first y (ascending) whose value exceeds the threshold.
  std::vector<std::optional<double>> boundary;
  bool flat = false;  // no value anywhere exceeds the threshold

  static constexpr double kThreshold = 1e-6;
};

/// Throws Error(EmptyGrid) when either axis is empty.
SurfaceData make_surface(std::string x_name, std::string y_name, std::string metric, std::vector<double> xs,
                         std::vector<double> ys, std::vector<std::vector<std::optional<double>>> values);

/// Axis names are fsp_size, fsp_bid or demand; the remaining factor must
/// take a single value among the scenario's points.
SurfaceData emit_surface(const StudyResult& result, SurfaceMetric metric, Scheme scheme, const std::string& x_name,
                         const std::string& y_name, const std::string& scenario = "base");
void write_long_csv(const SurfaceData& s, std::ostream& out, int decimals = 6);
void write_gnuplot_matrix(const SurfaceData& s, std::ostream& out, int decimals = 6);
void write_boundary_csv(const SurfaceData& s, std::ostream& out);

// ---- generation mix ----

struct MixRow {
  std::string technology;
  double twh = 0.0;
  int percent = 0;
};

struct MixTable {
  std::vector<MixRow> rows;
  double total_twh = 0.0;
  int total_percent = 0;
};

/// Percentages of the listed total by largest remainder, so they add to 100.
/// Known technologies come first in a fixed order, others alphabetically.
MixTable emit_mix_report(const std::map<std::string, double>& twh_by_technology);
/// Day-ahead energy weighted by day, grouped by the generators' technology.
MixTable emit_mix_report(const std::vector<DayAheadOutcome>& days, const std::vector<double>& weights,
                         const std::map<std::string, std::string>& technology_of_generator);
void write_csv(const MixTable& table, std::ostream& out, int decimals = 0);
void write_json(const MixTable& table, std::ostream& out);

}  // namespace gridflex
