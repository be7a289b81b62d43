#pragma once

// Study orchestration: a sensitivity grid over representative days and
// coordination schemes, annualized by day weights.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridflex/markets.hpp"
#include "gridflex/netmodel.hpp"
#include "gridflex/scenario.hpp"

namespace gridflex {

struct StudyScenario {
  std::string name = "base";
  Replication replication;
};

struct StudyConfig {
  std::string network;      // path to the network document
  std::string results_dir;  // every output goes here
  std::string demand_csv;   // empty: synthetic year built from the network's own demand
  int synthetic_year = 2023;
  std::uint64_t seed = 1;
  std::optional<double> annual_imbalance_mwh;  // default: imbalance_share of annual DA energy
  double imbalance_share = 0.02;
  ImbalancePattern imbalance_pattern = ImbalancePattern::Alternating;
  std::vector<Scheme> schemes = all_schemes();
  std::vector<StudyScenario> scenarios = {StudyScenario{}};
  std::vector<double> fsp_size{1.0}, fsp_bid{1.0}, demand{1.0};
  ClusterOptions clustering;
  MarketOptions market;
  unsigned workers = 0;  // 0: one per hardware thread
  std::optional<bool> market_documents;  // default: only for single-point studies
  bool export_lp = false;  // day-ahead programs of the first grid point in LP format
  std::optional<double> annual_cm_reference_mwh;  // echoed for comparison, not calibrated against
  std::optional<double> annual_cm_reference_eur;
};

/// Relative paths resolve against `base_dir`. Throws Error(InvalidInput).
StudyConfig read_study_config(std::istream& in, const std::string& base_dir = ".");
StudyConfig load_study_config(const std::string& path);

struct DayInfo {
  std::string label;
  Season season = Season::Winter;
  LoadLevel level = LoadLevel::High;
  double weight = 0.0;
};

/// Activated energy of one market for each representative day, MWh per day.
struct MarketEnergy {
  std::string so;
  std::string market;  // market name, with "@<dso>" for DSO markets
  Product product = Product::Joint;
  std::vector<double> up_mwh, down_mwh;  // one entry per representative day
};

struct SchemeResult {
  Scheme scheme = Scheme::CommonJoint;
  CostReport annual;                  // EUR/year
  double annual_subscription = 0.0;   // EUR/year
  double annual_local_objective = 0.0;  // DSO market objectives, EUR/year
  double annual_nsf_mwh = 0.0;
  double annual_dso_nsf_mwh = 0.0;    // at DSO nodes
  std::vector<CostReport> daily;      // EUR per representative day
  std::vector<MarketEnergy> energy;
};

struct GridPoint {
  std::string scenario;
  SensitivityFactors factors;
  bool ok = false;
  std::string error;  // diagnostics when the point is a hole
  std::map<std::string, double> generation_mwh;  // annual DA energy by technology
  std::vector<SchemeResult> schemes;

  const SchemeResult* find(Scheme s) const;
};

struct StudyResult {
  std::uint64_t seed = 0;
  std::string network;
  double annual_imbalance_mwh = 0.0;
  std::vector<DayInfo> days;
  std::vector<Scheme> schemes;
  std::vector<GridPoint> points;
  std::optional<double> annual_cm_reference_mwh;
  std::optional<double> annual_cm_reference_eur;

  std::size_t holes() const;
};

/// Runs every scenario x fsp_size x fsp_bid x demand point on a worker pool.
/// A failing point becomes a hole; the others are unaffected.
StudyResult run_study(const StudyConfig& config, const Network& net, const std::vector<RepresentativeDay>& days);

/// Loads the network and demand named by the config, clusters the days, runs
/// the study and writes study.json (plus day and market documents) to the
/// results directory.
StudyResult run_study(const StudyConfig& config);

void write_study_json(const StudyResult& result, std::ostream& out);
StudyResult read_study_json(std::istream& in);
StudyResult load_study_json(const std::string& path);

}  // namespace gridflex
