#pragma once

// Input synthesis for studies: representative days, imbalance series,
// sensitivity factors and replication injections.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridflex/markets.hpp"
#include "gridflex/netmodel.hpp"

namespace gridflex {

enum class Season { Winter, Spring, Summer, Autumn };
enum class LoadLevel { High, Low };

std::string to_string(Season s);
std::string to_string(LoadLevel l);
Season season_of_month(int month);  // DJF, MAM, JJA, SON

/// Hourly demand per node for consecutive calendar days.
struct DemandData {
  int first_year = 0, first_month = 1, first_day = 1;  // calendar date of hour 0
  std::vector<int> nodes;
  Table mw;  // node x hour
  std::size_t hours() const { return mw.empty() ? 0 : mw.front().size(); }
};

/// Reads "timestamp,node,mw" rows (ISO timestamps "YYYY-MM-DDTHH[:MM[:SS]]",
/// hourly and contiguous). Throws Error(InvalidInput).
DemandData read_demand_csv(std::istream& in);
DemandData load_demand_csv(const std::string& path);

struct RepresentativeDay {
  std::string label;  // e.g. winter_high
  Season season = Season::Winter;
  LoadLevel level = LoadLevel::High;
  double weight = 0.0;       // days per year represented
  std::vector<int> nodes;
  Table profile;             // node x 24, p.u. of the node's annual peak
  Table mw;                  // node x 24, cluster mean in MW
};

struct ClusterOptions {
  bool split_by_day_type = false;  // cluster weekdays and weekends separately, then keep high/low
};

/// Eight days: per season, 2-means over the 24-dimensional total-load vectors.
/// Throws Error(InsufficientData) for less than 365 complete days.
std::vector<RepresentativeDay> cluster_representative_days(const DemandData& data, const ClusterOptions& opts = {});

/// Sets every node's demand to the representative day's MW profile (nodes
/// absent from the day keep their demand).
Network with_day_demand(const Network& net, const RepresentativeDay& day);

enum class ImbalancePattern { Alternating, Random };

/// Per-generator imbalances proportional to the day-ahead dispatch, scaled so
/// that sum_d weight_d * sum |Imb| equals the annual volume. Throws
/// Error(ZeroDispatch) when the volume is positive but nothing is dispatched.
std::vector<ImbalanceSeries> synthesize_imbalances(const Network& net, const std::vector<DayAheadOutcome>& days,
                                                   const std::vector<double>& weights, double annual_volume_mwh,
                                                   std::uint64_t seed,
                                                   ImbalancePattern pattern = ImbalancePattern::Alternating);

struct SensitivityFactors {
  double fsp_size = 1.0;  // distribution FSP capacities
  double fsp_bid = 1.0;   // distribution FSP bids
  double demand = 1.0;    // load at DSO nodes
};

/// Default sensitivity ranges.
std::vector<double> default_fsp_size_grid();  // 0, 0.2, ..., 3
std::vector<double> default_fsp_bid_grid();   // 0, 0.2, ..., 3
std::vector<double> default_demand_grid();    // 0.8, 0.9, ..., 2

Network apply_sensitivity(const Network& net, const SensitivityFactors& f);

struct Replication {
  std::vector<Generator> generators;  // appended as RES units
  std::vector<Fsp> fsps;
};

/// Throws Error(UnknownNode) when an addition targets a missing or non-DSO node.
Network inject_replication(const Network& net, const Replication& add);

}  // namespace gridflex
