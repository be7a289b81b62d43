#include "flex_builder.hpp"

#include <algorithm>
#include <cmath>

#include "gridflex/error.hpp"

namespace gridflex::detail {

using mp::RowSense;
using mp::Term;
using mp::VarId;

std::string hour_tag(const std::string& id, int hour) { return id + ',' + std::to_string(hour + 1); }

FlexModel::FlexModel(const Network& net, int horizon, const MarketOptions& opts)
    : net_(net), hours_(horizon), opts_(opts) {}

void FlexModel::add_injection(int node, int hour, VarId var, double coef) {
  injections_[{node, hour}].push_back({var, coef});
}

void FlexModel::add_offers(const OfferSet& offers) {
  const double min_bid = opts_.min_bid_size;
  for (const auto& offer : offers) {
    const Fsp& f = offer.fsp;
    OfferVars v;
    v.offer = &offer;
    for (int h = 0; h < hours_; ++h) {
      const std::string tag = hour_tag(f.id, h);
      const double up = std::max(0.0, offer.up.at(h));
      const double dw = std::max(0.0, offer.down.at(h));
      const bool up_open = up > 0.0 && up >= min_bid;
      const bool dw_open = dw > 0.0 && dw >= min_bid;
      const VarId q_up = prog_.add_continuous("q_up[" + tag + "]", 0.0, up_open ? up : 0.0, f.bid);
      const VarId q_dw = prog_.add_continuous("q_dw[" + tag + "]", 0.0, dw_open ? dw : 0.0, f.bid);
      std::optional<VarId> uc_up, uc_dw;
      if (up_open) {
        uc_up = prog_.add_binary("uc_up[" + tag + "]");
        prog_.add_constraint("up_cap[" + tag + "]", {{q_up, 1.0}, {*uc_up, -up}}, RowSense::LessEqual, 0.0);
        if (min_bid > 0.0)
          prog_.add_constraint("up_min[" + tag + "]", {{q_up, 1.0}, {*uc_up, -min_bid}}, RowSense::GreaterEqual, 0.0);
      }
      if (dw_open) {
        uc_dw = prog_.add_binary("uc_dw[" + tag + "]");
        prog_.add_constraint("dw_cap[" + tag + "]", {{q_dw, 1.0}, {*uc_dw, -dw}}, RowSense::LessEqual, 0.0);
        if (min_bid > 0.0)
          prog_.add_constraint("dw_min[" + tag + "]", {{q_dw, 1.0}, {*uc_dw, -min_bid}}, RowSense::GreaterEqual, 0.0);
      }
      if (uc_up && uc_dw)
        prog_.add_constraint("one_direction[" + tag + "]", {{*uc_up, 1.0}, {*uc_dw, 1.0}}, RowSense::LessEqual, 1.0);
      v.q_up.push_back(q_up);
      v.q_dw.push_back(q_dw);
      v.uc_up.push_back(uc_up);
      v.uc_dw.push_back(uc_dw);
      add_injection(f.node, h, q_up, 1.0);
      add_injection(f.node, h, q_dw, -1.0);
    }

    if (f.kind == FspKind::DR) {
      std::vector<Term> up_terms, dw_terms;
      for (int h = 0; h < hours_; ++h) {
        up_terms.push_back({v.q_up[h], 1.0});
        dw_terms.push_back({v.q_dw[h], 1.0});
      }
      if (std::isfinite(offer.dr_budget_up))
        prog_.add_constraint("dr_budget_up[" + f.id + "]", std::move(up_terms), RowSense::LessEqual,
                             std::max(0.0, offer.dr_budget_up));
      if (std::isfinite(offer.dr_budget_down))
        prog_.add_constraint("dr_budget_dw[" + f.id + "]", std::move(dw_terms), RowSense::LessEqual,
                             std::max(0.0, offer.dr_budget_down));
    }

    if (f.kind == FspKind::ESS) {
      const double e = f.energy;
      const double ef = f.efficiency;
      for (int h = 0; h < hours_; ++h) {
        const std::string tag = hour_tag(f.id, h);
        const double qp = f.up(h), qm = f.down(h);
        const double delta = offer.soc_delta.empty() ? 0.0 : offer.soc_delta.at(h);
        const double dis_used = offer.dis_used.empty() ? 0.0 : offer.dis_used.at(h);
        const double cha_used = offer.cha_used.empty() ? 0.0 : offer.cha_used.at(h);
        const VarId soc = prog_.add_continuous("soc[" + tag + "]", f.soc_min * e, f.soc_max * e);
        const VarId bcha = prog_.add_binary("bcha[" + tag + "]");
        const VarId bdis = prog_.add_binary("bdis[" + tag + "]");
        prog_.add_constraint("ess_mode[" + tag + "]", {{bcha, 1.0}, {bdis, 1.0}}, RowSense::LessEqual, 1.0);
        std::vector<Term> soc_terms{{soc, 1.0}};
        if (h > 0) soc_terms.push_back({v.soc.back(), -1.0});
        const double rhs = delta + (h == 0 ? f.soc_init * e : 0.0);
        if (opts_.ess_model == EssModel::BothLegs) {
          const VarId pcha = prog_.add_continuous("pcha[" + tag + "]", 0.0, 1.0);
          const VarId pdis = prog_.add_continuous("pdis[" + tag + "]", 0.0, 1.0);
          const VarId fe_up = prog_.add_continuous("flexess_up[" + tag + "]", 0.0, 1.0);
          const VarId fe_dw = prog_.add_continuous("flexess_dw[" + tag + "]", 0.0, 1.0);
          soc_terms.push_back({pdis, qp * ef});
          soc_terms.push_back({v.q_up[h], 1.0});
          soc_terms.push_back({pcha, -qm * ef});
          soc_terms.push_back({v.q_dw[h], -1.0});
          prog_.add_constraint("soc[" + tag + "]", std::move(soc_terms), RowSense::Equal, rhs);
          prog_.add_constraint("ess_dw[" + tag + "]", {{v.q_dw[h], 1.0}, {fe_dw, -qp * ef}}, RowSense::Equal, 0.0);
          prog_.add_constraint("ess_up[" + tag + "]", {{v.q_up[h], 1.0}, {fe_up, -qp * ef}}, RowSense::Equal, 0.0);
          prog_.add_constraint("ess_dis[" + tag + "]", {{pdis, 1.0}, {fe_dw, 1.0}, {bdis, -1.0}}, RowSense::LessEqual,
                               -dis_used);
          prog_.add_constraint("ess_cha[" + tag + "]", {{pcha, 1.0}, {fe_up, 1.0}, {bcha, -1.0}}, RowSense::LessEqual,
                               -cha_used);
          v.pcha.push_back(pcha);
          v.pdis.push_back(pdis);
          v.fe_up.push_back(fe_up);
          v.fe_dw.push_back(fe_dw);
        } else {
          const double root = std::sqrt(ef);
          soc_terms.push_back({v.q_up[h], 1.0 / root});
          soc_terms.push_back({v.q_dw[h], -root});
          prog_.add_constraint("soc[" + tag + "]", std::move(soc_terms), RowSense::Equal, rhs);
          prog_.add_constraint("ess_dis[" + tag + "]", {{v.q_up[h], 1.0}, {bdis, -qp}}, RowSense::LessEqual,
                               -qp * dis_used);
          prog_.add_constraint("ess_cha[" + tag + "]", {{v.q_dw[h], 1.0}, {bcha, -qm}}, RowSense::LessEqual,
                               -qm * cha_used);
        }
        v.soc.push_back(soc);
        v.bcha.push_back(bcha);
        v.bdis.push_back(bdis);
      }
    }
    offers_.push_back(std::move(v));
  }
}

void FlexModel::add_nsf(const std::vector<int>& nodes) {
  const double ub = opts_.allow_nsf ? mp::kInf : 0.0;
  for (const int n : nodes) {
    nsf_nodes_.push_back(n);
    std::vector<VarId> p, m;
    for (int h = 0; h < hours_; ++h) {
      const std::string tag = hour_tag(std::to_string(n), h);
      p.push_back(prog_.add_continuous("nsf_p[" + tag + "]", 0.0, ub, opts_.cnsf));
      m.push_back(prog_.add_continuous("nsf_n[" + tag + "]", 0.0, ub, opts_.cnsf));
      add_injection(n, h, p.back(), -1.0);
      add_injection(n, h, m.back(), 1.0);
    }
    nsf_p_.push_back(std::move(p));
    nsf_n_.push_back(std::move(m));
  }
}

void FlexModel::add_network(NetworkScope scope) {
  for (std::size_t k = 0; k < scope.nodes.size(); ++k) {
    const int n = scope.nodes[k];
    std::vector<VarId> th;
    for (int h = 0; h < hours_; ++h) {
      const double lo = n == scope.reference ? 0.0 : scope.theta_lo[k][h];
      const double hi = n == scope.reference ? 0.0 : scope.theta_hi[k][h];
      th.push_back(prog_.add_continuous("theta[" + hour_tag(std::to_string(n), h) + "]", lo, hi));
    }
    theta_.push_back(std::move(th));
  }
  auto theta_of = [&](int node, int h) {
    const auto it = std::find(scope.nodes.begin(), scope.nodes.end(), node);
    return theta_[static_cast<std::size_t>(it - scope.nodes.begin())][h];
  };
  for (std::size_t k = 0; k < scope.lines.size(); ++k) {
    const Line& l = net_.line(scope.lines[k]);
    if (!(l.reactance > 0.0)) throw Error(ErrorCode::ZeroReactance, "line " + l.id + " has no positive reactance");
    const double b = net_.base_power / l.reactance;
    std::vector<VarId> fl;
    for (int h = 0; h < hours_; ++h) {
      const std::string tag = hour_tag(l.id, h);
      const VarId p = prog_.add_continuous("p[" + tag + "]", scope.flow_lo[k][h], scope.flow_hi[k][h]);
      prog_.add_constraint("dc_flow[" + tag + "]", {{p, 1.0}, {theta_of(l.from, h), -b}, {theta_of(l.to, h), b}},
                           RowSense::Equal, 0.0);
      add_injection(l.from, h, p, -1.0);
      add_injection(l.to, h, p, 1.0);
      fl.push_back(p);
    }
    flow_.push_back(std::move(fl));
  }
  scope_ = std::move(scope);
}

std::vector<Term> FlexModel::injection_terms(int node, int hour) const {
  const auto it = injections_.find({node, hour});
  return it == injections_.end() ? std::vector<Term>{} : it->second;
}

void FlexModel::add_balances(const std::vector<int>& nodes, const Table& requirement) {
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (int h = 0; h < hours_; ++h)
      prog_.add_constraint("balance[" + hour_tag(std::to_string(nodes[k]), h) + "]", injection_terms(nodes[k], h),
                           RowSense::Equal, requirement[k][h]);
}

mp::RowId FlexModel::add_aggregate_row(const std::string& name, const std::map<int, double>& weights, int hour,
                                       std::vector<Term> extra, double rhs) {
  std::map<std::uint32_t, double> merged;
  for (const auto& [node, w] : weights) {
    if (w == 0.0) continue;
    for (const auto& t : injection_terms(node, hour)) merged[t.var.index] += w * t.coef;
  }
  for (const auto& t : extra) merged[t.var.index] += t.coef;
  std::vector<Term> terms;
  for (const auto& [idx, c] : merged)
    if (c != 0.0) terms.push_back({VarId{idx}, c});
  return prog_.add_constraint(name, std::move(terms), RowSense::Equal, rhs);
}

mp::Solution FlexModel::solve() const {
  const mp::Solution sol = mp::solve(prog_, opts_.solver);
  if (sol.status == mp::SolveStatus::Infeasible)
    throw Error(ErrorCode::InfeasibleMarket, "flexibility market has no feasible activation");
  if (!sol.ok()) throw Error(ErrorCode::SolverFailure, "flexibility market solve ended " + mp::to_string(sol.status));
  return sol;
}

void FlexModel::extract(const mp::Solution& sol, FlexOutcome& out) const {
  out.horizon = hours_;
  out.objective = sol.objective;
  out.status = mp::to_string(sol.status);
  out.mip_gap = sol.mip_gap;
  out.bb_nodes = sol.nodes;
  out.binaries = prog_.num_binaries();
  auto val = [&](VarId v) { return sol.value(v); };
  auto bin = [&](const std::optional<VarId>& v) { return v ? std::round(sol.value(*v)) : 0.0; };

  for (const auto& v : offers_) {
    const FspOffer& o = *v.offer;
    FspResult r;
    r.id = o.fsp.id;
    r.node = o.fsp.node;
    r.kind = o.fsp.kind;
    r.distribution = o.distribution;
    r.bid = o.fsp.bid;
    r.up_limit = o.up;
    r.down_limit = o.down;
    r.dr_budget_up = o.dr_budget_up;
    r.dr_budget_down = o.dr_budget_down;
    for (int h = 0; h < hours_; ++h) {
      const double up = val(v.q_up[h]), dw = val(v.q_dw[h]);
      r.up.push_back(up);
      r.down.push_back(dw);
      r.net.push_back(up - dw);
      r.uc_up.push_back(bin(v.uc_up[h]));
      r.uc_down.push_back(bin(v.uc_dw[h]));
      const double activation = o.fsp.bid * (up + dw);
      (o.distribution ? out.cost.dso_activation : out.cost.tso_activation) += activation;
    }
    if (o.fsp.kind == FspKind::ESS) {
      r.soc_min = o.fsp.soc_min * o.fsp.energy;
      r.soc_max = o.fsp.soc_max * o.fsp.energy;
      for (int h = 0; h < hours_; ++h) {
        r.soc.push_back(val(v.soc[h]));
        r.bcha.push_back(std::round(val(v.bcha[h])));
        r.bdis.push_back(std::round(val(v.bdis[h])));
        if (!v.pcha.empty()) {
          r.pcha.push_back(val(v.pcha[h]));
          r.pdis.push_back(val(v.pdis[h]));
          r.flexess_up.push_back(val(v.fe_up[h]));
          r.flexess_down.push_back(val(v.fe_dw[h]));
          r.dis_logic.push_back(r.pdis[h] + r.flexess_down[h]);
          r.cha_logic.push_back(r.pcha[h] + r.flexess_up[h]);
        } else {
          const double qp = o.fsp.up(h), qm = o.fsp.down(h);
          r.pcha.push_back(0.0);
          r.pdis.push_back(0.0);
          r.flexess_up.push_back(qp > 0.0 ? r.up[h] / qp : 0.0);
          r.flexess_down.push_back(qm > 0.0 ? r.down[h] / qm : 0.0);
          r.dis_logic.push_back(r.flexess_up[h]);
          r.cha_logic.push_back(r.flexess_down[h]);
        }
      }
    }
    out.fsps.push_back(std::move(r));
  }

  std::vector<int> nodes = nsf_nodes_;
  if (scope_)
    for (const int n : scope_->nodes)
      if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
  std::sort(nodes.begin(), nodes.end());
  out.nodes = nodes;
  out.balanced.assign(nodes.size(), 0);
  out.nsf_p.assign(nodes.size(), Series(static_cast<std::size_t>(hours_), 0.0));
  out.nsf_n = out.nsf_p;
  out.requirement = out.nsf_p;
  out.exchange = out.nsf_p;
  for (std::size_t k = 0; k < nsf_nodes_.size(); ++k) {
    const auto pos = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), nsf_nodes_[k]) - nodes.begin());
    for (int h = 0; h < hours_; ++h) {
      out.nsf_p[pos][h] = val(nsf_p_[k][h]);
      out.nsf_n[pos][h] = val(nsf_n_[k][h]);
      out.cost.nsf_penalty += opts_.cnsf * (out.nsf_p[pos][h] + out.nsf_n[pos][h]);
    }
  }

  if (scope_) {
    out.lines = scope_->lines;
    out.flow_min = scope_->flow_lo;
    out.flow_max = scope_->flow_hi;
    for (const auto& fl : flow_) {
      Series s;
      for (const auto p : fl) s.push_back(val(p));
      out.flow.push_back(std::move(s));
    }
    out.theta.assign(nodes.size(), Series(static_cast<std::size_t>(hours_), 0.0));
    for (std::size_t k = 0; k < scope_->nodes.size(); ++k) {
      const auto pos =
          static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), scope_->nodes[k]) - nodes.begin());
      for (int h = 0; h < hours_; ++h) out.theta[pos][h] = val(theta_[k][h]);
    }
  }
}

}  // namespace gridflex::detail
