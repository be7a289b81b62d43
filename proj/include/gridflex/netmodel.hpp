#pragma once

// Static grid world: nodes, lines, bidding zones, operators, interface
// substations, generators and flexibility service providers.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridflex {

inline constexpr int kDefaultHorizon = 24;

enum class OperatorType { TSO, DSO };

std::string to_string(OperatorType type);

struct Operator {
  std::string id;
  OperatorType type = OperatorType::TSO;
};

struct BiddingZone {
  std::string id;
};

/// Transfer capacity between two zones; tc(from, to) lies in [lower, upper] MW.
struct Ntc {
  std::string from;
  std::string to;
  double lower = 0.0;
  double upper = 0.0;
};

struct Node {
  int id = 0;
  std::string zone;
  std::string operator_id;
  std::vector<double> demand;  // MW per hour
  double theta_min = -3.141592653589793;  // rad
  double theta_max = 3.141592653589793;   // rad
};

/// Flow p is measured from `from` to `to`; p = SB * (theta_from - theta_to) / X.
struct Line {
  std::string id;
  int from = 0;
  int to = 0;
  double reactance = 0.0;  // p.u. on base_power
  double p_min = 0.0;      // MW, <= 0
  double p_max = 0.0;      // MW, >= 0
};

struct SubscriptionLevel {
  double width = std::numeric_limits<double>::infinity();  // MW
  double cost = 0.0;                                        // EUR/MWh
};

/// A TSO-DSO coupling point. The boundary line joins the TSO-side node to the
/// DSO-side node; import means flow from the TSO side into the DSO side.
struct InterfaceSubstation {
  std::string id;
  int tso_node = 0;
  int dso_node = 0;
  std::string line;
  std::vector<SubscriptionLevel> levels;
  double impact = 0.0;  // p.u., filled by dcflow
};

struct Generator {
  std::string id;
  int node = 0;
  std::string zone;
  std::string technology;  // thermal, hydro, nuclear, wind, solar, ...
  double capacity = 0.0;   // MW
  double bid = 0.0;        // EUR/MWh
  double cycling_cost = 0.0;  // EUR/MW per start-up
  int min_uptime = 0;      // hours
  double min_dispatch = 0.0;  // p.u. of capacity
  bool is_res = false;
  std::vector<double> profile;  // p.u. availability per hour, RES only
  bool must_run = false;
  std::optional<bool> initial_on;  // commitment before hour 1; free when unset
  bool offers_flexibility = false;  // offer headroom and turn-down as an FSP "gen:<id>"

  double available(int hour) const;
  /// False when no commitment constraint applies (no must-run, cycling cost, minimum dispatch or uptime).
  bool needs_commitment() const;
};

enum class FspKind { DR, RES, ESS, GENERIC };

std::string to_string(FspKind kind);

struct Fsp {
  std::string id;
  int node = 0;
  FspKind kind = FspKind::GENERIC;
  std::vector<double> cap_up;    // MW per hour, or a single value for all hours
  std::vector<double> cap_down;  // MW per hour (magnitude), or a single value
  double bid = 0.0;              // EUR/MWh
  double dr_max_hours = 0.0;     // DR only
  double max_flex_up = 1.0;      // RES only, p.u. of QDA
  double max_flex_down = 1.0;    // RES only, p.u. of QDA
  std::vector<double> qda;       // RES only, MW per hour
  std::string generator;         // RES only: take QDA from this generator's DA dispatch
  double soc_init = 0.5;         // ESS, p.u. of energy capacity
  double soc_min = 0.0;
  double soc_max = 1.0;
  double efficiency = 1.0;
  double energy = 0.0;           // ESS energy capacity, MWh

  double up(int hour) const;
  double down(int hour) const;
};

struct Network {
  std::string name;
  int horizon = kDefaultHorizon;
  double base_power = 100.0;  // MW
  std::vector<Node> nodes;
  std::vector<Line> lines;
  std::vector<BiddingZone> zones;
  std::vector<Ntc> ntc;
  std::vector<Operator> operators;
  std::vector<InterfaceSubstation> interfaces;
  std::vector<Generator> generators;
  std::vector<Fsp> fsps;

  /// Lookups throw Error(UnknownNode) or Error(InvalidInput) when absent.
  const Node& node(int id) const;
  std::size_t node_index(int id) const;
  bool has_node(int id) const;
  const Line& line(const std::string& id) const;
  std::size_t line_index(const std::string& id) const;
  const Operator& op(const std::string& id) const;
  const InterfaceSubstation& interface(const std::string& id) const;
  const Generator& generator(const std::string& id) const;
  const std::string& operator_of(int node_id) const;
  OperatorType operator_type_of(int node_id) const;
  bool is_dso_node(int node_id) const;
  std::vector<int> node_ids() const;
  std::vector<std::string> dso_ids() const;
  std::vector<const InterfaceSubstation*> interfaces_of(const std::string& dso_id) const;
};

struct Finding {
  std::string kind;     // short machine-readable category
  std::string subject;  // offending element id
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const noexcept { return findings.empty(); }
  std::size_t count(const std::string& kind) const;
};

ValidationReport validate_network(const Network& net);

struct SubGrid {
  std::string operator_id;
  OperatorType type = OperatorType::TSO;
  std::vector<int> nodes;
  std::vector<std::string> lines;           // both endpoints inside
  std::vector<std::string> boundary_lines;  // interface lines, shared with the neighbour
};

/// Throws Error(UnvalidatedNetwork) when validate_network reports findings.
std::map<std::string, SubGrid> partition_by_operator(const Network& net);

/// Every node and every line of the network as one grid.
SubGrid combined_grid(const Network& net);

/// Cumulative subscription cost (EUR/h) of drawing `power` MW through the schedule.
double subscription_cost(const std::vector<SubscriptionLevel>& levels, double power);

Network read_network(std::istream& in);
Network load_network(const std::string& path);
void write_network(const Network& net, std::ostream& out);
void save_network(const Network& net, const std::string& path);

}  // namespace gridflex
