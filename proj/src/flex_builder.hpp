#pragma once

// Shared assembly of flexibility market programs: FSP activation variables,
// non-supplied flexibility, the DC network and nodal injection bookkeeping.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridflex/markets.hpp"

namespace gridflex::detail {

struct OfferVars {
  const FspOffer* offer = nullptr;
  std::vector<mp::VarId> q_up, q_dw;
  std::vector<std::optional<mp::VarId>> uc_up, uc_dw;
  std::vector<mp::VarId> soc, pcha, pdis, bcha, bdis, fe_up, fe_dw;  // ESS only
};

struct NetworkScope {
  std::vector<int> nodes;
  std::vector<std::string> lines;
  int reference = 0;
  Table flow_lo, flow_hi;    // line x hour
  Table theta_lo, theta_hi;  // node x hour
};

class FlexModel {
 public:
  FlexModel(const Network& net, int horizon, const MarketOptions& opts);

  mp::MathProgram& program() { return prog_; }
  int horizon() const { return hours_; }

  void add_offers(const OfferSet& offers);
  void add_nsf(const std::vector<int>& nodes);
  void add_network(NetworkScope scope);

  /// Extra injection term at a node, e.g. interface power.
  void add_injection(int node, int hour, mp::VarId var, double coef);

  /// sum over the node's injection terms = requirement, one row per hour.
  void add_balances(const std::vector<int>& nodes, const Table& requirement);

  /// sum_j weight_j * injection terms(j) + extra = rhs for one hour.
  mp::RowId add_aggregate_row(const std::string& name, const std::map<int, double>& weights, int hour,
                              std::vector<mp::Term> extra, double rhs);

  /// Solves the program; throws InfeasibleMarket or SolverFailure.
  mp::Solution solve() const;

  /// Fills FSP, NSF, flow and activation cost fields of `out`.
  void extract(const mp::Solution& sol, FlexOutcome& out) const;

 private:
  std::vector<mp::Term> injection_terms(int node, int hour) const;

  const Network& net_;
  int hours_;
  MarketOptions opts_;
  mp::MathProgram prog_;
  std::vector<OfferVars> offers_;
  std::vector<int> nsf_nodes_;
  std::vector<std::vector<mp::VarId>> nsf_p_, nsf_n_;
  std::optional<NetworkScope> scope_;
  std::vector<std::vector<mp::VarId>> theta_, flow_;
  std::map<std::pair<int, int>, std::vector<mp::Term>> injections_;
};

std::string hour_tag(const std::string& id, int hour);

}  // namespace gridflex::detail
