#pragma once

// Day-ahead clearing with unit commitment and the flexibility markets of the
// four TSO-DSO coordination schemes, including the data handed between them.

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gridflex/mpbuilder.hpp"
#include "gridflex/netmodel.hpp"

namespace gridflex {

using Series = std::vector<double>;
using Table = std::vector<Series>;  // element x hour

/// How energy storage state of charge responds to activations.
enum class EssModel {
  BothLegs,  // efficiency multiplies charge and discharge legs, auxiliary pdis/pcha terms
  RoundTrip,  // discharge divides by sqrt(EF), charge multiplies by sqrt(EF)
};

enum class Product { CM, B, Joint };
std::string to_string(Product p);

struct MarketOptions {
  double cnsf = 10000.0;        // EUR/MWh of non-supplied flexibility
  double min_bid_size = 0.1;    // MW
  EssModel ess_model = EssModel::BothLegs;
  double wind_max_flex_up = 0.05;   // p.u. of DA schedule
  double solar_max_flex_up = 0.0;
  bool allow_nsf = true;
  mp::SolverOptions solver;
};

struct DayAheadOutcome {
  int horizon = kDefaultHorizon;
  std::vector<std::string> generators;
  Table qda, uc, su, sd;  // generator x hour
  std::vector<int> nodes;
  Table dispatch;  // node x hour, aggregated qda
  std::vector<std::string> zones;
  Table price;  // zone x hour, EUR/MWh
  std::vector<Ntc> ntc;
  Table transfer;  // ntc x hour, MW
  double energy_cost = 0.0;
  double startup_cost = 0.0;
  double total_cost = 0.0;
  std::size_t binaries = 0;

  double qda_of(const std::string& generator, int hour) const;
  double dispatch_at(int node, int hour) const;
};

/// Throws Error(InfeasibleMarket) when demand cannot be met.
DayAheadOutcome clear_day_ahead(const Network& net, const MarketOptions& opts = {});

/// The day-ahead program itself, exposed for cross-checks and LP export.
mp::MathProgram build_day_ahead_program(const Network& net);

/// Imb > 0 is a deficit (upward flexibility needed); Imb < 0 a surplus.
struct ImbalanceSeries {
  std::vector<std::string> generators;
  Table by_generator;
  std::vector<int> nodes;
  Table by_node;

  double at_node(int node, int hour) const;
  double total(int hour) const;
};

ImbalanceSeries make_imbalances(const Network& net, const DayAheadOutcome& da, const Table& by_generator);
ImbalanceSeries zero_imbalances(const Network& net, const DayAheadOutcome& da);

/// Flexibility one FSP offers to one market, after every earlier handoff.
struct FspOffer {
  Fsp fsp;                 // static data used for ESS equations, node and bid
  bool distribution = false;
  Series up, down;         // MW limits per hour
  double dr_budget_up = std::numeric_limits<double>::infinity();    // MWh
  double dr_budget_down = std::numeric_limits<double>::infinity();  // MWh
  Series soc_delta;        // MWh change of state of charge already scheduled per hour
  Series dis_used, cha_used;  // discharge / charge logic already consumed per hour
};

using OfferSet = std::vector<FspOffer>;

/// Declared FSPs plus one FSP per generator that cleared in the day-ahead market.
OfferSet build_offers(const Network& net, const DayAheadOutcome& da, const MarketOptions& opts = {});

struct FspResult {
  std::string id;
  int node = 0;
  FspKind kind = FspKind::GENERIC;
  bool distribution = false;
  double bid = 0.0;
  Series up, down, net, uc_up, uc_down;
  Series soc, pcha, pdis, bcha, bdis, flexess_up, flexess_down;  // ESS only
  Series dis_logic, cha_logic;  // share of bdis / bcha consumed, ESS only
  Series up_limit, down_limit;  // limits offered to this market
  double dr_budget_up = std::numeric_limits<double>::infinity();
  double dr_budget_down = std::numeric_limits<double>::infinity();
  double soc_min = 0.0, soc_max = 0.0;  // MWh, ESS only
};

struct InterfaceResult {
  std::string id;
  double impact = 0.0;  // share of the owning DSO's virtual demand
  Series p_subs;   // import, TSO side to DSO side, MW
  Series pimport;  // multi-level TSO market only
  Series pexport;  // multi-level TSO market only
  Table qsubs;     // level x hour
  Series subscost; // EUR per hour
};

struct CostBreakdown {
  double tso_activation = 0.0;
  double dso_activation = 0.0;
  double subscription = 0.0;
  double nsf_penalty = 0.0;

  double total() const { return tso_activation + dso_activation + subscription; }
  double total_with_penalty() const { return total() + nsf_penalty; }
};

struct FlexOutcome {
  std::string market;  // common-joint, common-cm, common-b, lfm-opf, lfm-ptdf, tso-joint, tso-cm, tso-b
  std::string so;      // TSO or DSO
  std::string scope;   // operator id, or "all"
  Product product = Product::Joint;
  int horizon = kDefaultHorizon;
  std::vector<FspResult> fsps;
  std::vector<int> nodes;
  std::vector<char> balanced;  // 1 when the node has its own balance row
  Table nsf_p, nsf_n;        // MW, nsf_p absorbs surplus, nsf_n covers deficit
  Table requirement;         // right-hand side of each nodal balance
  Table exchange;            // interface power injected at the node
  std::vector<std::string> lines;
  Table flow, flow_min, flow_max;  // MW, with the limits the market enforced
  Table theta;               // node x hour, rad (empty for PTDF markets)
  std::vector<InterfaceResult> interfaces;
  std::map<std::string, Series> virtual_demand;  // DSO id -> MW per hour
  CostBreakdown cost;
  double objective = 0.0;
  std::string status;
  double mip_gap = 0.0;
  std::size_t bb_nodes = 0;
  std::size_t binaries = 0;

  const FspResult* find_fsp(const std::string& id) const;
  double activated_energy(bool distribution, bool upward) const;
};

FlexOutcome run_common_joint(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                             const ImbalanceSeries& imb, const MarketOptions& opts = {});

struct SeparateOutcome {
  FlexOutcome cm;
  FlexOutcome bal;
  double cost() const { return cm.cost.total() + bal.cost.total(); }
};

SeparateOutcome run_common_separate(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                                    const ImbalanceSeries& imb, const MarketOptions& opts = {});

/// Residual offers after a market cleared: up = up - q, down = down + q with q
/// the net activation of each FSP-hour.
OfferSet residual_offers(const OfferSet& offers, const FlexOutcome& cleared);

/// The network must carry impact factors (assign_impact_factors).
FlexOutcome run_lfm_opf(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                        const std::string& dso, const MarketOptions& opts = {});

FlexOutcome run_lfm_ptdf(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                         const std::string& dso, const MarketOptions& opts = {});

struct ForwardedBids {
  OfferSet residual;
  std::map<std::string, Series> dispatch_fsp;  // net activation cleared by the DSO, MW
  double dispatch_at(int node, int hour, const OfferSet& offers) const;
};

/// Offers left for the TSO after an LFM. An FSP activated in one direction
/// keeps only its unused capacity in that direction.
ForwardedBids forward_bids(const FlexOutcome& lfm, const OfferSet& offers);

enum class TsoMode { Joint, Separate };

/// One outcome in joint mode, congestion management then balancing in separate mode.
std::vector<FlexOutcome> run_tso_multilevel(const Network& net, const DayAheadOutcome& da, const ForwardedBids& bids,
                                            const ImbalanceSeries& imb, TsoMode mode, const MarketOptions& opts = {});

enum class Scheme { CommonJoint, CommonSeparate, MLOpfJoint, MLOpfSeparate, MLPtdfJoint, MLPtdfSeparate };
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);
std::vector<Scheme> all_schemes();

struct CostReport {
  Scheme scheme = Scheme::CommonJoint;
  double local = 0.0;  // DSO markets
  double tso = 0.0;    // TSO and common markets
  double nsf_penalty = 0.0;
  double total() const { return local + tso; }
  double total_with_penalty() const { return total() + nsf_penalty; }
};

CostReport account_costs(Scheme scheme, const std::vector<FlexOutcome>& outcomes);

struct SchemeRun {
  Scheme scheme = Scheme::CommonJoint;
  std::vector<FlexOutcome> markets;  // in clearing order
  CostReport costs;
};

/// Full pipeline of one scheme for one day. Impact factors are recomputed on a copy of `net`.
SchemeRun run_scheme(Scheme scheme, const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                     const ImbalanceSeries& imb, const MarketOptions& opts = {});

/// Invariant checks on a solved outcome; one message per violation.
std::vector<std::string> check_outcome(const Network& net, const FlexOutcome& out, const MarketOptions& opts,
                                       double tol = 1e-6);

void write_day_ahead_json(const DayAheadOutcome& da, std::ostream& out);
void write_outcome_json(const FlexOutcome& out, std::ostream& os);

}  // namespace gridflex
