#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "flex_builder.hpp"
#include "gridflex/dcflow.hpp"
#include "gridflex/error.hpp"
#include "gridflex/markets.hpp"

namespace gridflex {

using detail::FlexModel;
using detail::hour_tag;
using detail::NetworkScope;
using mp::RowSense;
using mp::Term;
using mp::VarId;

std::string to_string(Product p) {
  switch (p) {
    case Product::CM: return "CM";
    case Product::B: return "B";
    case Product::Joint: return "Joint";
  }
  return "?";
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::CommonJoint: return "common-joint";
    case Scheme::CommonSeparate: return "common-separate";
    case Scheme::MLOpfJoint: return "ml-opf-joint";
    case Scheme::MLOpfSeparate: return "ml-opf-separate";
    case Scheme::MLPtdfJoint: return "ml-ptdf-joint";
    case Scheme::MLPtdfSeparate: return "ml-ptdf-separate";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  for (const Scheme k : all_schemes())
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::MissingScheme, "unknown coordination scheme '" + s + "'");
}

std::vector<Scheme> all_schemes() {
  return {Scheme::CommonJoint, Scheme::CommonSeparate, Scheme::MLOpfJoint,
          Scheme::MLOpfSeparate, Scheme::MLPtdfJoint, Scheme::MLPtdfSeparate};
}

const FspResult* FlexOutcome::find_fsp(const std::string& id) const {
  for (const auto& f : fsps)
    if (f.id == id) return &f;
  return nullptr;
}

double FlexOutcome::activated_energy(bool distribution, bool upward) const {
  double s = 0.0;
  for (const auto& f : fsps)
    if (f.distribution == distribution)
      for (const double q : upward ? f.up : f.down) s += q;
  return s;
}

namespace {

constexpr double kActivationTol = 1e-9;

double hourly_value(const std::vector<double>& s, int h, double fallback) {
  if (s.empty()) return fallback;
  if (s.size() == 1) return s.front();
  return s.at(static_cast<std::size_t>(h));
}

double res_up_share(const Generator& g, const MarketOptions& opts) {
  if (g.technology == "wind") return opts.wind_max_flex_up;
  if (g.technology == "solar") return opts.solar_max_flex_up;
  return 1.0;
}

std::vector<int> nodes_where(const Network& net, const std::function<bool(const Node&)>& pred) {
  std::vector<int> ids;
  for (const auto& n : net.nodes)
    if (pred(n)) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> lines_within(const Network& net, const std::vector<int>& nodes) {
  const std::set<int> inside(nodes.begin(), nodes.end());
  std::vector<std::string> ids;
  for (const auto& l : net.lines)
    if (inside.count(l.from) && inside.count(l.to)) ids.push_back(l.id);
  return ids;
}

enum class Need { CongestionOnly, ImbalanceOnly, Both };

Need need_of(Product p) {
  return p == Product::CM ? Need::CongestionOnly : p == Product::B ? Need::ImbalanceOnly : Need::Both;
}

Table requirement(const Network& net, const DayAheadOutcome& da, const ImbalanceSeries& imb,
                  const std::vector<int>& nodes, Need need) {
  Table r;
  for (const int id : nodes) {
    const Node& n = net.node(id);
    Series s;
    for (int h = 0; h < net.horizon; ++h) {
      double v = 0.0;
      if (need != Need::ImbalanceOnly) v += n.demand[static_cast<std::size_t>(h)] - da.dispatch_at(id, h);
      if (need != Need::CongestionOnly) v += imb.at_node(id, h);
      s.push_back(v);
    }
    r.push_back(std::move(s));
  }
  return r;
}

// +1 when the interface line runs from the TSO node to the DSO node.
double orientation(const Network& net, const InterfaceSubstation& sub) {
  return net.line(sub.line).from == sub.tso_node ? 1.0 : -1.0;
}

std::pair<double, double> import_limits(const Network& net, const InterfaceSubstation& sub) {
  const Line& l = net.line(sub.line);
  return orientation(net, sub) > 0 ? std::pair{l.p_min, l.p_max} : std::pair{-l.p_max, -l.p_min};
}

const Series* series_of(const std::vector<std::string>& ids, const Table& t, const std::string& id) {
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (ids[k] == id) return &t[k];
  return nullptr;
}

const Series* node_series(const FlexOutcome& o, const Table& t, int node) {
  for (std::size_t k = 0; k < o.nodes.size(); ++k)
    if (o.nodes[k] == node) return &t[k];
  return nullptr;
}

const InterfaceResult* find_interface(const FlexOutcome& o, const std::string& id) {
  for (const auto& i : o.interfaces)
    if (i.id == id) return &i;
  return nullptr;
}

// Line and angle limits for a market; with `prior`, the room left after it.
NetworkScope make_scope(const Network& net, const std::vector<int>& nodes, const FlexOutcome* prior) {
  NetworkScope s;
  s.nodes = nodes;
  s.lines = lines_within(net, nodes);
  s.reference = nodes.empty() ? 0 : *std::min_element(nodes.begin(), nodes.end());
  const auto hours = static_cast<std::size_t>(net.horizon);
  for (const auto& id : s.lines) {
    const Line& l = net.line(id);
    Series lo(hours, l.p_min), hi(hours, l.p_max);
    if (prior)
      if (const Series* p = series_of(prior->lines, prior->flow, id))
        for (std::size_t h = 0; h < hours; ++h) {
          lo[h] -= (*p)[h];
          hi[h] -= (*p)[h];
        }
    s.flow_lo.push_back(std::move(lo));
    s.flow_hi.push_back(std::move(hi));
  }
  for (const int id : nodes) {
    const Node& n = net.node(id);
    Series lo(hours, n.theta_min), hi(hours, n.theta_max);
    if (prior && !prior->theta.empty())
      if (const Series* t = node_series(*prior, prior->theta, id))
        for (std::size_t h = 0; h < hours; ++h) {
          lo[h] -= (*t)[h];
          hi[h] -= (*t)[h];
        }
    s.theta_lo.push_back(std::move(lo));
    s.theta_hi.push_back(std::move(hi));
  }
  return s;
}

void set_requirement(FlexOutcome& out, const std::vector<int>& nodes, const Table& req, bool balanced) {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto it = std::find(out.nodes.begin(), out.nodes.end(), nodes[k]);
    const auto pos = static_cast<std::size_t>(it - out.nodes.begin());
    out.requirement[pos] = req[k];
    out.balanced[pos] = balanced ? 1 : 0;
  }
}

void add_exchange(FlexOutcome& out, int node, const Series& power, double sign) {
  const auto it = std::find(out.nodes.begin(), out.nodes.end(), node);
  if (it == out.nodes.end()) return;
  auto& row = out.exchange[static_cast<std::size_t>(it - out.nodes.begin())];
  for (std::size_t h = 0; h < row.size(); ++h) row[h] += sign * power[h];
}

OfferSet offers_at(const OfferSet& offers, const std::set<int>& nodes) {
  OfferSet sub;
  for (const auto& o : offers)
    if (nodes.count(o.fsp.node)) sub.push_back(o);
  return sub;
}

void require_impact(const Network& net, const std::string& dso) {
  double sum = 0.0;
  for (const auto* s : net.interfaces_of(dso)) sum += std::abs(s->impact);
  if (sum == 0.0) throw Error(ErrorCode::InvalidInput, "DSO " + dso + " has no impact factors; assign them first");
}

FlexOutcome common_market(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                          const ImbalanceSeries& imb, Product product, const FlexOutcome* prior,
                          const MarketOptions& opts) {
  const std::vector<int> nodes = nodes_where(net, [](const Node&) { return true; });
  const Table req = requirement(net, da, imb, nodes, need_of(product));
  FlexModel model(net, net.horizon, opts);
  model.add_offers(offers);
  model.add_nsf(nodes);
  model.add_network(make_scope(net, nodes, prior));
  model.add_balances(nodes, req);
  const auto sol = model.solve();

  FlexOutcome out;
  out.market = product == Product::Joint ? "common-joint" : product == Product::CM ? "common-cm" : "common-b";
  out.so = "TSO";
  out.scope = "all";
  out.product = product;
  model.extract(sol, out);
  set_requirement(out, nodes, req, true);
  for (const auto& sub : net.interfaces) {
    InterfaceResult r;
    r.id = sub.id;
    const Series* f = series_of(out.lines, out.flow, sub.line);
    for (int h = 0; h < net.horizon; ++h) r.p_subs.push_back(f ? orientation(net, sub) * (*f)[h] : 0.0);
    out.interfaces.push_back(std::move(r));
  }
  return out;
}

struct SubscriptionVars {
  std::vector<std::vector<VarId>> levels;  // level x hour
};

// Interface import variables of an LFM with their subscription schedule.
std::vector<VarId> add_import(FlexModel& m, const Network& net, const InterfaceSubstation& sub,
                              SubscriptionVars& subs) {
  auto& prog = m.program();
  const auto [lo, hi] = import_limits(net, sub);
  std::vector<VarId> p;
  for (int h = 0; h < m.horizon(); ++h) p.push_back(prog.add_continuous("p_subs[" + hour_tag(sub.id, h) + "]", lo, hi));
  for (std::size_t lv = 0; lv < sub.levels.size(); ++lv) {
    std::vector<VarId> row;
    for (int h = 0; h < m.horizon(); ++h)
      row.push_back(prog.add_continuous("qsubs[" + sub.id + "," + std::to_string(lv + 1) + "," + std::to_string(h + 1) +
                                            "]",
                                        0.0, sub.levels[lv].width, sub.levels[lv].cost));
    subs.levels.push_back(std::move(row));
  }
  if (!sub.levels.empty())
    for (int h = 0; h < m.horizon(); ++h) {
      std::vector<Term> terms{{p[h], -1.0}};
      for (const auto& row : subs.levels) terms.push_back({row[h], 1.0});
      prog.add_constraint("subscription[" + hour_tag(sub.id, h) + "]", std::move(terms), RowSense::GreaterEqual, 0.0);
    }
  return p;
}

InterfaceResult import_result(const InterfaceSubstation& sub, const std::vector<VarId>& p, const mp::Solution& sol) {
  InterfaceResult r;
  r.id = sub.id;
  r.impact = sub.impact;
  r.qsubs.assign(sub.levels.size(), Series{});
  for (const auto v : p) {
    const double power = sol.value(v);
    r.p_subs.push_back(power);
    double left = std::max(0.0, power);
    for (std::size_t lv = 0; lv < sub.levels.size(); ++lv) {
      const double used = std::min(left, sub.levels[lv].width);
      r.qsubs[lv].push_back(used);
      left -= used;
    }
    r.subscost.push_back(subscription_cost(sub.levels, power));
  }
  return r;
}

std::vector<int> dso_nodes(const Network& net, const std::string& dso) {
  return nodes_where(net, [&](const Node& n) { return n.operator_id == dso; });
}

void check_dso(const Network& net, const std::string& dso) {
  if (net.op(dso).type != OperatorType::DSO)
    throw Error(ErrorCode::InvalidInput, "operator " + dso + " is not a DSO");
}

FlexOutcome finish_lfm(FlexModel& model, const Network& net, const std::string& dso, const std::vector<int>& nodes,
                       const Table& req, const std::vector<const InterfaceSubstation*>& subs,
                       const std::vector<std::vector<VarId>>& imports, const std::vector<VarId>& vd_vars,
                       const std::string& market, bool balanced) {
  const auto sol = model.solve();
  FlexOutcome out;
  out.market = market;
  out.so = "DSO";
  out.scope = dso;
  out.product = Product::CM;
  model.extract(sol, out);
  set_requirement(out, nodes, req, balanced);
  Series vd(static_cast<std::size_t>(net.horizon), 0.0);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    InterfaceResult r = import_result(*subs[i], imports[i], sol);
    for (int h = 0; h < net.horizon; ++h) {
      vd[h] += r.p_subs[h];
      out.cost.subscription += r.subscost[h];
    }
    if (balanced) add_exchange(out, subs[i]->dso_node, r.p_subs, 1.0);
    out.interfaces.push_back(std::move(r));
  }
  if (!vd_vars.empty())
    for (int h = 0; h < net.horizon; ++h) vd[h] = sol.value(vd_vars[h]);
  out.virtual_demand[dso] = vd;
  return out;
}

}  // namespace

OfferSet build_offers(const Network& net, const DayAheadOutcome& da, const MarketOptions& opts) {
  const int hours = net.horizon;
  OfferSet offers;
  for (const auto& f : net.fsps) {
    FspOffer o;
    o.fsp = f;
    o.distribution = net.is_dso_node(f.node);
    for (int h = 0; h < hours; ++h) {
      double up = f.up(h), dw = f.down(h);
      if (f.kind == FspKind::RES) {
        const double qda = f.generator.empty() ? hourly_value(f.qda, h, 0.0) : da.qda_of(f.generator, h);
        up = std::min(hourly_value(f.cap_up, h, mp::kInf), qda * f.max_flex_up);
        dw = std::min(hourly_value(f.cap_down, h, mp::kInf), qda * f.max_flex_down);
      }
      o.up.push_back(std::max(0.0, up));
      o.down.push_back(std::max(0.0, dw));
    }
    if (f.kind == FspKind::DR) {
      const double mean_up = std::accumulate(o.up.begin(), o.up.end(), 0.0) / hours;
      const double mean_dw = std::accumulate(o.down.begin(), o.down.end(), 0.0) / hours;
      o.dr_budget_up = mean_up * f.dr_max_hours;
      o.dr_budget_down = mean_dw * f.dr_max_hours;
    }
    if (f.kind == FspKind::ESS) {
      o.soc_delta.assign(static_cast<std::size_t>(hours), 0.0);
      o.dis_used = o.soc_delta;
      o.cha_used = o.soc_delta;
    }
    offers.push_back(std::move(o));
  }
  for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.offers_flexibility) continue;
    FspOffer o;
    o.fsp.id = "gen:" + g.id;
    o.fsp.node = g.node;
    o.fsp.kind = g.is_res ? FspKind::RES : FspKind::GENERIC;
    o.fsp.bid = g.bid;
    o.fsp.generator = g.id;
    o.distribution = net.is_dso_node(g.node);
    for (int h = 0; h < hours; ++h) {
      const double qda = da.qda_of(g.id, h);
      const double avail = g.available(h);
      double up = 0.0, dw = 0.0;
      if (g.is_res) {
        up = qda * res_up_share(g, opts);
        dw = qda;
      } else if (da.uc[gi][h] > 0.5 || !g.needs_commitment()) {
        up = avail - qda;
        dw = qda - g.min_dispatch * g.capacity;
      }
      o.up.push_back(std::max(0.0, up));
      o.down.push_back(std::max(0.0, dw));
    }
    o.fsp.cap_up = o.up;
    o.fsp.cap_down = o.down;
    offers.push_back(std::move(o));
  }
  return offers;
}

FlexOutcome run_common_joint(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                             const ImbalanceSeries& imb, const MarketOptions& opts) {
  return common_market(net, da, offers, imb, Product::Joint, nullptr, opts);
}

SeparateOutcome run_common_separate(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                                    const ImbalanceSeries& imb, const MarketOptions& opts) {
  SeparateOutcome s;
  s.cm = common_market(net, da, offers, imb, Product::CM, nullptr, opts);
  const OfferSet residual = residual_offers(offers, s.cm);
  s.bal = common_market(net, da, residual, imb, Product::B, &s.cm, opts);
  return s;
}

namespace {

// Carries state of charge and charge/discharge usage of ESS offers into the next market.
void carry_storage(FspOffer& o, const FspResult& r) {
  if (o.fsp.kind != FspKind::ESS) return;
  const std::size_t hours = r.soc.size();
  double prev = o.fsp.soc_init * o.fsp.energy;
  for (std::size_t h = 0; h < hours; ++h) {
    o.soc_delta[h] = r.soc[h] - prev;
    prev = r.soc[h];
    o.dis_used[h] = std::min(1.0, o.dis_used[h] + r.dis_logic[h]);
    o.cha_used[h] = std::min(1.0, o.cha_used[h] + r.cha_logic[h]);
  }
}

void spend_budget(FspOffer& o, const FspResult& r) {
  o.dr_budget_up -= std::accumulate(r.up.begin(), r.up.end(), 0.0);
  o.dr_budget_down -= std::accumulate(r.down.begin(), r.down.end(), 0.0);
}

}  // namespace

OfferSet residual_offers(const OfferSet& offers, const FlexOutcome& cleared) {
  OfferSet out = offers;
  for (auto& o : out) {
    const FspResult* r = cleared.find_fsp(o.fsp.id);
    if (!r) continue;
    for (std::size_t h = 0; h < o.up.size(); ++h) {
      o.up[h] = std::max(0.0, o.up[h] - r->net[h]);
      o.down[h] = std::max(0.0, o.down[h] + r->net[h]);
    }
    spend_budget(o, *r);
    carry_storage(o, *r);
  }
  return out;
}

FlexOutcome run_lfm_opf(const Network& net, const DayAheadOutcome& da, const OfferSet& offers, const std::string& dso,
                        const MarketOptions& opts) {
  check_dso(net, dso);
  require_impact(net, dso);
  const std::vector<int> nodes = dso_nodes(net, dso);
  const OfferSet local = offers_at(offers, {nodes.begin(), nodes.end()});
  const Table req = requirement(net, da, zero_imbalances(net, da), nodes, Need::CongestionOnly);
  FlexModel model(net, net.horizon, opts);
  model.add_offers(local);
  model.add_nsf(nodes);
  model.add_network(make_scope(net, nodes, nullptr));
  auto& prog = model.program();
  std::vector<VarId> vd;
  for (int h = 0; h < net.horizon; ++h) vd.push_back(prog.add_continuous("vd[" + hour_tag(dso, h) + "]", -mp::kInf, mp::kInf));
  const auto subs = net.interfaces_of(dso);
  std::vector<std::vector<VarId>> imports;
  for (const auto* sub : subs) {
    SubscriptionVars sv;
    auto p = add_import(model, net, *sub, sv);
    for (int h = 0; h < net.horizon; ++h) {
      model.add_injection(sub->dso_node, h, p[h], 1.0);
      prog.add_constraint("impact[" + hour_tag(sub->id, h) + "]", {{p[h], 1.0}, {vd[h], -sub->impact}},
                          RowSense::Equal, 0.0);
    }
    imports.push_back(std::move(p));
  }
  model.add_balances(nodes, req);
  return finish_lfm(model, net, dso, nodes, req, subs, imports, vd, "lfm-opf", true);
}

FlexOutcome run_lfm_ptdf(const Network& net, const DayAheadOutcome& da, const OfferSet& offers, const std::string& dso,
                         const MarketOptions& opts) {
  check_dso(net, dso);
  const std::vector<int> nodes = dso_nodes(net, dso);
  const OfferSet local = offers_at(offers, {nodes.begin(), nodes.end()});
  const Table req = requirement(net, da, zero_imbalances(net, da), nodes, Need::CongestionOnly);
  const PtdfMatrix ptdf = compute_system_ptdf(net);
  FlexModel model(net, net.horizon, opts);
  model.add_offers(local);
  model.add_nsf(nodes);
  const auto subs = net.interfaces_of(dso);
  std::vector<std::vector<VarId>> imports;
  for (const auto* sub : subs) {
    SubscriptionVars sv;
    auto p = add_import(model, net, *sub, sv);
    std::map<int, double> weights;
    for (const int j : nodes) weights[j] = -import_sensitivity(ptdf, *sub, j);
    for (int h = 0; h < net.horizon; ++h) {
      double rhs = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) rhs += weights[nodes[k]] * req[k][h];
      model.add_aggregate_row("ptdf_import[" + hour_tag(sub->id, h) + "]", weights, h, {{p[h], 1.0}}, rhs);
    }
    imports.push_back(std::move(p));
  }
  return finish_lfm(model, net, dso, nodes, req, subs, imports, {}, "lfm-ptdf", false);
}

double ForwardedBids::dispatch_at(int node, int hour, const OfferSet& offers) const {
  double s = 0.0;
  for (const auto& o : offers)
    if (o.fsp.node == node)
      if (const auto it = dispatch_fsp.find(o.fsp.id); it != dispatch_fsp.end())
        s += it->second.at(static_cast<std::size_t>(hour));
  return s;
}

ForwardedBids forward_bids(const FlexOutcome& lfm, const OfferSet& offers) {
  ForwardedBids fb;
  fb.residual = offers;
  for (auto& o : fb.residual) {
    const FspResult* r = lfm.find_fsp(o.fsp.id);
    if (!r) continue;
    for (std::size_t h = 0; h < o.up.size(); ++h) {
      if (r->up[h] > kActivationTol) {
        o.up[h] = std::max(0.0, o.up[h] - r->up[h]);
        o.down[h] = 0.0;
      } else if (r->down[h] > kActivationTol) {
        o.down[h] = std::max(0.0, o.down[h] - r->down[h]);
        o.up[h] = 0.0;
      }
    }
    spend_budget(o, *r);
    carry_storage(o, *r);
    fb.dispatch_fsp[o.fsp.id] = r->net;
  }
  return fb;
}

namespace {

FlexOutcome tso_market(const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                       const ForwardedBids& bids, const ImbalanceSeries& imb, Product product,
                       const FlexOutcome* prior, const MarketOptions& opts) {
  const auto tso_nodes = nodes_where(net, [&](const Node& n) { return !net.is_dso_node(n.id); });
  const Need need = need_of(product);
  const Table tso_req = requirement(net, da, imb, tso_nodes, need);
  FlexModel model(net, net.horizon, opts);
  model.add_offers(offers);
  model.add_nsf(nodes_where(net, [](const Node&) { return true; }));
  model.add_network(make_scope(net, tso_nodes, prior));
  auto& prog = model.program();

  struct DsoVars {
    std::string id;
    std::vector<int> nodes;
    Table req;
    std::vector<VarId> vd;
    std::vector<const InterfaceSubstation*> subs;
    std::vector<std::vector<VarId>> pimport, pexport;
  };
  std::vector<DsoVars> dsos;
  for (const auto& op : net.operators) {
    if (op.type != OperatorType::DSO) continue;
    DsoVars d;
    d.id = op.id;
    d.nodes = dso_nodes(net, op.id);
    d.req = requirement(net, da, imb, d.nodes, need);
    if (need != Need::ImbalanceOnly)
      for (std::size_t k = 0; k < d.nodes.size(); ++k)
        for (int h = 0; h < net.horizon; ++h) d.req[k][h] -= bids.dispatch_at(d.nodes[k], h, offers);
    for (int h = 0; h < net.horizon; ++h)
      d.vd.push_back(prog.add_continuous("vd[" + hour_tag(op.id, h) + "]", -mp::kInf, mp::kInf));
    d.subs = net.interfaces_of(op.id);
    for (const auto* sub : d.subs) {
      auto [lo, hi] = import_limits(net, *sub);
      const InterfaceResult* before = prior ? find_interface(*prior, sub->id) : nullptr;
      std::vector<VarId> pi, pe;
      for (int h = 0; h < net.horizon; ++h) {
        const double shift = before ? before->pimport[h] : 0.0;
        const std::string tag = hour_tag(sub->id, h);
        pi.push_back(prog.add_continuous("pimport[" + tag + "]", lo - shift, hi - shift));
        pe.push_back(prog.add_continuous("pexport[" + tag + "]", -mp::kInf, mp::kInf));
        prog.add_constraint("impact[" + tag + "]", {{pi[h], 1.0}, {d.vd[h], -sub->impact}}, RowSense::Equal, 0.0);
        prog.add_constraint("interface[" + tag + "]", {{pi[h], 1.0}, {pe[h], -1.0}}, RowSense::Equal, 0.0);
        model.add_injection(sub->tso_node, h, pe[h], -1.0);
      }
      d.pimport.push_back(std::move(pi));
      d.pexport.push_back(std::move(pe));
    }
    dsos.push_back(std::move(d));
  }
  for (const auto& d : dsos) {
    std::map<int, double> weights;
    for (const int j : d.nodes) weights[j] = 1.0;
    for (int h = 0; h < net.horizon; ++h) {
      double rhs = 0.0;
      for (const auto& row : d.req) rhs += row[h];
      model.add_aggregate_row("virtual_demand[" + hour_tag(d.id, h) + "]", weights, h, {{d.vd[h], 1.0}}, rhs);
    }
  }
  model.add_balances(tso_nodes, tso_req);
  const auto sol = model.solve();

  FlexOutcome out;
  out.market = product == Product::Joint ? "tso-joint" : product == Product::CM ? "tso-cm" : "tso-b";
  out.so = "TSO";
  out.scope = "tso";
  out.product = product;
  model.extract(sol, out);
  set_requirement(out, tso_nodes, tso_req, true);
  for (const auto& d : dsos) {
    set_requirement(out, d.nodes, d.req, false);
    Series vd;
    for (const auto v : d.vd) vd.push_back(sol.value(v));
    out.virtual_demand[d.id] = vd;
    for (std::size_t i = 0; i < d.subs.size(); ++i) {
      InterfaceResult r;
      r.id = d.subs[i]->id;
      r.impact = d.subs[i]->impact;
      for (int h = 0; h < net.horizon; ++h) {
        r.pimport.push_back(sol.value(d.pimport[i][h]));
        r.pexport.push_back(sol.value(d.pexport[i][h]));
      }
      r.p_subs = r.pimport;
      add_exchange(out, d.subs[i]->tso_node, r.pexport, -1.0);
      out.interfaces.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

std::vector<FlexOutcome> run_tso_multilevel(const Network& net, const DayAheadOutcome& da, const ForwardedBids& bids,
                                            const ImbalanceSeries& imb, TsoMode mode, const MarketOptions& opts) {
  for (const auto& op : net.operators)
    if (op.type == OperatorType::DSO) require_impact(net, op.id);
  if (mode == TsoMode::Joint) return {tso_market(net, da, bids.residual, bids, imb, Product::Joint, nullptr, opts)};
  std::vector<FlexOutcome> out;
  out.push_back(tso_market(net, da, bids.residual, bids, imb, Product::CM, nullptr, opts));
  const OfferSet residual = residual_offers(bids.residual, out.front());
  out.push_back(tso_market(net, da, residual, bids, imb, Product::B, &out.front(), opts));
  return out;
}

CostReport account_costs(Scheme scheme, const std::vector<FlexOutcome>& outcomes) {
  CostReport r;
  r.scheme = scheme;
  for (const auto& o : outcomes) {
    (o.so == "DSO" ? r.local : r.tso) += o.cost.total();
    r.nsf_penalty += o.cost.nsf_penalty;
  }
  return r;
}

SchemeRun run_scheme(Scheme scheme, const Network& net, const DayAheadOutcome& da, const OfferSet& offers,
                     const ImbalanceSeries& imb, const MarketOptions& opts) {
  SchemeRun run;
  run.scheme = scheme;
  if (scheme == Scheme::CommonJoint) {
    run.markets.push_back(run_common_joint(net, da, offers, imb, opts));
  } else if (scheme == Scheme::CommonSeparate) {
    auto s = run_common_separate(net, da, offers, imb, opts);
    run.markets.push_back(std::move(s.cm));
    run.markets.push_back(std::move(s.bal));
  } else {
    Network work = net;
    assign_impact_factors(work);
    const bool ptdf = scheme == Scheme::MLPtdfJoint || scheme == Scheme::MLPtdfSeparate;
    ForwardedBids bids;
    bids.residual = offers;
    for (const auto& op : work.operators) {
      if (op.type != OperatorType::DSO) continue;
      FlexOutcome lfm = ptdf ? run_lfm_ptdf(work, da, bids.residual, op.id, opts)
                             : run_lfm_opf(work, da, bids.residual, op.id, opts);
      ForwardedBids step = forward_bids(lfm, bids.residual);
      bids.residual = std::move(step.residual);
      for (auto& [id, s] : step.dispatch_fsp) bids.dispatch_fsp[id] = std::move(s);
      run.markets.push_back(std::move(lfm));
    }
    const TsoMode mode =
        scheme == Scheme::MLOpfJoint || scheme == Scheme::MLPtdfJoint ? TsoMode::Joint : TsoMode::Separate;
    for (auto& m : run_tso_multilevel(work, da, bids, imb, mode, opts)) run.markets.push_back(std::move(m));
  }
  run.costs = account_costs(scheme, run.markets);
  return run;
}

std::vector<std::string> check_outcome(const Network& net, const FlexOutcome& out, const MarketOptions& opts,
                                       double tol) {
  std::vector<std::string> issues;
  auto report = [&](const std::string& what) { issues.push_back(out.market + ": " + what); };
  const int hours = out.horizon;

  auto injection = [&](int node, int h) {
    double s = 0.0;
    for (const auto& f : out.fsps)
      if (f.node == node) s += f.net[h];
    if (const Series* p = node_series(out, out.nsf_p, node)) s -= (*p)[h];
    if (const Series* n = node_series(out, out.nsf_n, node)) s += (*n)[h];
    return s;
  };

  for (std::size_t k = 0; k < out.nodes.size(); ++k) {
    if (!out.balanced[k]) continue;
    const int node = out.nodes[k];
    for (int h = 0; h < hours; ++h) {
      double s = injection(node, h) + out.exchange[k][h];
      for (std::size_t l = 0; l < out.lines.size(); ++l) {
        const Line& line = net.line(out.lines[l]);
        if (line.from == node) s -= out.flow[l][h];
        if (line.to == node) s += out.flow[l][h];
      }
      if (std::abs(s - out.requirement[k][h]) > tol)
        report("balance residual " + std::to_string(s - out.requirement[k][h]) + " at node " + std::to_string(node) +
               " hour " + std::to_string(h + 1));
    }
  }

  for (std::size_t k = 0; k < out.nodes.size(); ++k)
    for (int h = 0; h < hours; ++h)
      if (out.nsf_p[k][h] < -tol || out.nsf_n[k][h] < -tol) report("negative nsf at node " + std::to_string(out.nodes[k]));

  for (const auto& f : out.fsps) {
    double up_sum = 0.0, dw_sum = 0.0;
    for (int h = 0; h < hours; ++h) {
      const std::string at = f.id + " hour " + std::to_string(h + 1);
      if (f.uc_up[h] + f.uc_down[h] > 1.0 + tol) report("both directions committed for " + at);
      if (f.up[h] > tol && f.down[h] > tol) report("simultaneous up and down activation for " + at);
      if (std::abs(f.net[h] - (f.up[h] - f.down[h])) > tol) report("net activation mismatch for " + at);
      for (const double q : {f.up[h], f.down[h]})
        if (q > tol && q < opts.min_bid_size - tol) report("activation below the minimum bid size for " + at);
      if (f.up[h] > f.up_limit[h] + tol) report("upward activation above the offer for " + at);
      if (f.down[h] > f.down_limit[h] + tol) report("downward activation above the offer for " + at);
      if (f.up[h] < -tol || f.down[h] < -tol) report("negative activation for " + at);
      up_sum += f.up[h];
      dw_sum += f.down[h];
      if (f.kind == FspKind::ESS) {
        if (f.soc[h] < f.soc_min - tol || f.soc[h] > f.soc_max + tol) report("state of charge out of range for " + at);
        if (f.bcha[h] + f.bdis[h] > 1.0 + tol) report("charging and discharging together for " + at);
      }
    }
    if (f.kind == FspKind::DR) {
      if (up_sum > f.dr_budget_up + tol) report("upward DR budget exceeded for " + f.id);
      if (dw_sum > f.dr_budget_down + tol) report("downward DR budget exceeded for " + f.id);
    }
  }

  for (std::size_t l = 0; l < out.lines.size(); ++l) {
    const Line& line = net.line(out.lines[l]);
    const Series* ti = node_series(out, out.theta, line.from);
    const Series* tj = node_series(out, out.theta, line.to);
    for (int h = 0; h < hours; ++h) {
      const double p = out.flow[l][h];
      if (p < out.flow_min[l][h] - tol || p > out.flow_max[l][h] + tol)
        report("flow limit violated on " + line.id + " hour " + std::to_string(h + 1));
      if (ti && tj && std::abs(p - flow_from_angles(line, (*ti)[h], (*tj)[h], net.base_power)) > tol)
        report("flow does not match angles on " + line.id + " hour " + std::to_string(h + 1));
    }
  }

  for (const auto& r : out.interfaces) {
    const InterfaceSubstation& sub = net.interface(r.id);
    for (int h = 0; h < hours; ++h) {
      const std::string at = r.id + " hour " + std::to_string(h + 1);
      if (!r.pimport.empty() && std::abs(r.pimport[h] - r.pexport[h]) > tol) report("import differs from export at " + at);
      if (!r.qsubs.empty()) {
        double q = 0.0;
        for (const auto& lv : r.qsubs) q += lv[h];
        if (std::abs(q - std::max(0.0, r.p_subs[h])) > tol) report("subscription usage differs from import at " + at);
      }
      const auto it = out.virtual_demand.find(net.node(sub.dso_node).operator_id);
      if (out.market != "lfm-ptdf" && it != out.virtual_demand.end() && std::abs(r.p_subs[h] - r.impact * it->second[h]) > tol)
        report("interface power not split by impact at " + at);
    }
  }

  // Aggregate conservation for nodes without their own balance row.
  std::map<std::string, std::vector<std::size_t>> unbalanced;
  for (std::size_t k = 0; k < out.nodes.size(); ++k)
    if (!out.balanced[k]) unbalanced[net.node(out.nodes[k]).operator_id].push_back(k);
  for (const auto& [dso, idx] : unbalanced) {
    const auto it = out.virtual_demand.find(dso);
    if (it == out.virtual_demand.end()) continue;
    for (int h = 0; h < hours; ++h) {
      double s = it->second[h];
      for (const auto k : idx) s += injection(out.nodes[k], h) - out.requirement[k][h];
      if (std::abs(s) > tol)
        report("DSO " + dso + " aggregate balance residual " + std::to_string(s) + " hour " + std::to_string(h + 1));
    }
  }
  return issues;
}

}  // namespace gridflex
