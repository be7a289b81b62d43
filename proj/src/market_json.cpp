#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridflex/markets.hpp"
#include "json_util.hpp"

namespace gridflex {
namespace {

using json::Ordered;

Ordered numbers(const Series& s) {
  Ordered a = Ordered::array();
  for (double v : s) a.push_back(json::inf_or_number(v));
  return a;
}

Ordered rows(const Table& t) {
  Ordered a = Ordered::array();
  for (const auto& s : t) a.push_back(numbers(s));
  return a;
}

double sum(const Series& s) {
  double total = 0.0;
  for (double v : s) total += v;
  return total;
}

}  // namespace

void write_day_ahead_json(const DayAheadOutcome& da, std::ostream& out) {
  Ordered j;
  j["schema"] = "gridflex.day_ahead/1";
  j["horizon_h"] = da.horizon;
  j["cost_eur"] = Ordered{{"energy", da.energy_cost}, {"startup", da.startup_cost}, {"total", da.total_cost}};
  j["binaries"] = da.binaries;
  Ordered gens = Ordered::array();
  for (std::size_t g = 0; g < da.generators.size(); ++g)
    gens.push_back(Ordered{{"id", da.generators[g]},
                           {"qda_mw", numbers(da.qda[g])},
                           {"uc", numbers(da.uc[g])},
                           {"startup", numbers(da.su[g])},
                           {"shutdown", numbers(da.sd[g])}});
  j["generators"] = std::move(gens);
  Ordered nodes = Ordered::array();
  for (std::size_t n = 0; n < da.nodes.size(); ++n)
    nodes.push_back(Ordered{{"id", da.nodes[n]}, {"dispatch_mw", numbers(da.dispatch[n])}});
  j["nodes"] = std::move(nodes);
  Ordered zones = Ordered::array();
  for (std::size_t z = 0; z < da.zones.size(); ++z)
    zones.push_back(Ordered{{"id", da.zones[z]}, {"price_eur_per_mwh", numbers(da.price[z])}});
  j["zones"] = std::move(zones);
  Ordered ntc = Ordered::array();
  for (std::size_t k = 0; k < da.ntc.size(); ++k)
    ntc.push_back(Ordered{{"from", da.ntc[k].from}, {"to", da.ntc[k].to}, {"transfer_mw", numbers(da.transfer[k])}});
  j["ntc"] = std::move(ntc);
  out << j.dump(2) << '\n';
}

void write_outcome_json(const FlexOutcome& o, std::ostream& os) {
  Ordered j;
  j["schema"] = "gridflex.market/1";
  j["market"] = o.market;
  j["so"] = o.so;
  j["scope"] = o.scope;
  j["product"] = to_string(o.product);
  j["horizon_h"] = o.horizon;
  j["status"] = o.status;
  j["mip_gap"] = o.mip_gap;
  j["bb_nodes"] = o.bb_nodes;
  j["binaries"] = o.binaries;
  j["objective_eur"] = o.objective;
  j["cost_eur"] = Ordered{{"tso_activation", o.cost.tso_activation},
                          {"dso_activation", o.cost.dso_activation},
                          {"subscription", o.cost.subscription},
                          {"nsf_penalty", o.cost.nsf_penalty},
                          {"total", o.cost.total()}};

  Ordered fsps = Ordered::array();
  for (const auto& f : o.fsps) {
    Ordered e{{"id", f.id},
              {"node", f.node},
              {"kind", to_string(f.kind)},
              {"distribution", f.distribution},
              {"bid_eur_per_mwh", f.bid},
              {"up_mw", numbers(f.up)},
              {"down_mw", numbers(f.down)},
              {"net_mw", numbers(f.net)},
              {"energy_up_mwh", sum(f.up)},
              {"energy_down_mwh", sum(f.down)}};
    if (f.kind == FspKind::ESS) e["soc_mwh"] = numbers(f.soc);
    fsps.push_back(std::move(e));
  }
  j["fsps"] = std::move(fsps);

  Ordered lines = Ordered::array();
  for (std::size_t l = 0; l < o.lines.size(); ++l) {
    double loading = 0.0;
    for (std::size_t h = 0; h < o.flow[l].size(); ++h) {
      const double v = o.flow[l][h];
      const double lim = v >= 0.0 ? o.flow_max[l][h] : -o.flow_min[l][h];
      if (std::isfinite(lim) && lim > 0.0) loading = std::max(loading, std::abs(v) / lim);
    }
    lines.push_back(Ordered{{"id", o.lines[l]},
                            {"flow_mw", numbers(o.flow[l])},
                            {"max_loading_pu", loading}});
  }
  j["lines"] = std::move(lines);

  Ordered ifaces = Ordered::array();
  for (const auto& s : o.interfaces) {
    Ordered e{{"id", s.id}, {"impact_pu", s.impact}, {"p_subs_mw", numbers(s.p_subs)}};
    if (!s.pimport.empty()) e["pimport_mw"] = numbers(s.pimport);
    if (!s.pexport.empty()) e["pexport_mw"] = numbers(s.pexport);
    e["qsubs_mw"] = rows(s.qsubs);
    e["subscription_cost_eur"] = numbers(s.subscost);
    ifaces.push_back(std::move(e));
  }
  j["interfaces"] = std::move(ifaces);

  Ordered nsf = Ordered::array();
  double total_nsf = 0.0;
  for (std::size_t n = 0; n < o.nodes.size(); ++n) {
    const double e = sum(o.nsf_p[n]) + sum(o.nsf_n[n]);
    total_nsf += e;
    if (e > 0.0)
      nsf.push_back(Ordered{{"node", o.nodes[n]}, {"surplus_mw", numbers(o.nsf_p[n])}, {"deficit_mw", numbers(o.nsf_n[n])}});
  }
  j["nsf_mwh"] = total_nsf;
  j["nsf"] = std::move(nsf);

  Ordered vd = Ordered::object();
  for (const auto& [dso, s] : o.virtual_demand) vd[dso] = numbers(s);
  j["virtual_demand_mw"] = std::move(vd);
  os << j.dump(2) << '\n';
}

}  // namespace gridflex
