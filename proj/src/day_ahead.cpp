#include <algorithm>
#include <cmath>

#include "gridflex/error.hpp"
#include "gridflex/markets.hpp"

namespace gridflex {

using mp::RowSense;
using mp::Term;
using mp::VarId;

double DayAheadOutcome::qda_of(const std::string& generator, int hour) const {
  for (std::size_t g = 0; g < generators.size(); ++g)
    if (generators[g] == generator) return qda[g][static_cast<std::size_t>(hour)];
  throw Error(ErrorCode::InvalidInput, "generator " + generator + " not in the day-ahead outcome");
}

double DayAheadOutcome::dispatch_at(int node, int hour) const {
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k] == node) return dispatch[k][static_cast<std::size_t>(hour)];
  throw Error(ErrorCode::UnknownNode, "node " + std::to_string(node) + " not in the day-ahead outcome");
}

namespace {

struct DayAheadVars {
  std::vector<std::vector<VarId>> qda, uc, su, sd;  // uc/su/sd empty for commitment-free units
  std::vector<std::vector<VarId>> tc;
  std::vector<std::vector<mp::RowId>> balance;  // zone x hour
  std::vector<std::string> zones;
};

std::string hour_tag(const std::string& id, int h) { return id + ',' + std::to_string(h + 1); }

DayAheadVars build(const Network& net, mp::MathProgram& prog) {
  const int hours = net.horizon;
  DayAheadVars v;
  v.qda.resize(net.generators.size());
  v.uc.resize(net.generators.size());
  v.su.resize(net.generators.size());
  v.sd.resize(net.generators.size());

  for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    for (int h = 0; h < hours; ++h)
      v.qda[gi].push_back(prog.add_continuous("qda[" + hour_tag(g.id, h) + "]", 0.0, g.available(h), g.bid));
    if (!g.needs_commitment()) continue;
    for (int h = 0; h < hours; ++h) {
      const auto uc = prog.add_binary("uc[" + hour_tag(g.id, h) + "]");
      if (g.must_run) prog.set_bounds(uc, 1.0, 1.0);
      v.uc[gi].push_back(uc);
      v.su[gi].push_back(prog.add_binary("su[" + hour_tag(g.id, h) + "]", g.cycling_cost * g.capacity));
      v.sd[gi].push_back(prog.add_binary("sd[" + hour_tag(g.id, h) + "]"));
    }
    for (int h = 0; h < hours; ++h) {
      const auto uc = v.uc[gi][h], su = v.su[gi][h], sd = v.sd[gi][h];
      if (h > 0) {
        prog.add_constraint("transition[" + hour_tag(g.id, h) + "]",
                            {{v.uc[gi][h - 1], 1.0}, {uc, -1.0}, {su, 1.0}, {sd, -1.0}}, RowSense::Equal, 0.0);
      } else if (g.initial_on) {
        const double init = *g.initial_on ? 1.0 : 0.0;
        prog.add_constraint("transition[" + hour_tag(g.id, h) + "]", {{uc, -1.0}, {su, 1.0}, {sd, -1.0}},
                            RowSense::Equal, -init);
      } else {
        prog.set_bounds(su, 0.0, 0.0);
        prog.set_bounds(sd, 0.0, 0.0);
      }
      prog.add_constraint("capacity[" + hour_tag(g.id, h) + "]", {{v.qda[gi][h], 1.0}, {uc, -g.capacity}},
                          RowSense::LessEqual, 0.0);
      if (g.min_dispatch > 0.0)
        prog.add_constraint("min_dispatch[" + hour_tag(g.id, h) + "]",
                            {{v.qda[gi][h], 1.0}, {uc, -g.capacity * g.min_dispatch}}, RowSense::GreaterEqual, 0.0);
      if (g.min_uptime > 1) {
        const int last = std::min(h + g.min_uptime, hours);
        std::vector<Term> terms;
        for (int hh = h; hh < last; ++hh) terms.push_back({v.uc[gi][hh], 1.0});
        terms.push_back({su, -static_cast<double>(last - h)});
        prog.add_constraint("min_uptime[" + hour_tag(g.id, h) + "]", std::move(terms), RowSense::GreaterEqual, 0.0);
      }
    }
  }

  for (const auto& t : net.ntc) {
    std::vector<VarId> row;
    for (int h = 0; h < hours; ++h)
      row.push_back(prog.add_continuous("tc[" + t.from + ">" + t.to + "," + std::to_string(h + 1) + "]", t.lower,
                                        t.upper));
    v.tc.push_back(std::move(row));
  }

  for (const auto& z : net.zones) {
    v.zones.push_back(z.id);
    std::vector<mp::RowId> rows;
    for (int h = 0; h < hours; ++h) {
      std::vector<Term> terms;
      for (std::size_t gi = 0; gi < net.generators.size(); ++gi)
        if (net.generators[gi].zone == z.id) terms.push_back({v.qda[gi][h], 1.0});
      for (std::size_t k = 0; k < net.ntc.size(); ++k) {
        if (net.ntc[k].from == z.id) terms.push_back({v.tc[k][h], -1.0});
        if (net.ntc[k].to == z.id) terms.push_back({v.tc[k][h], 1.0});
      }
      double demand = 0.0;
      for (const auto& n : net.nodes)
        if (n.zone == z.id) demand += n.demand[static_cast<std::size_t>(h)];
      rows.push_back(prog.add_constraint("balance[" + hour_tag(z.id, h) + "]", std::move(terms), RowSense::Equal, demand));
    }
    v.balance.push_back(std::move(rows));
  }
  return v;
}

}  // namespace

mp::MathProgram build_day_ahead_program(const Network& net) {
  mp::MathProgram prog;
  build(net, prog);
  return prog;
}

DayAheadOutcome clear_day_ahead(const Network& net, const MarketOptions& opts) {
  const auto report = validate_network(net);
  if (!report.ok()) throw Error(ErrorCode::UnvalidatedNetwork, report.findings.front().message);
  mp::MathProgram prog;
  const DayAheadVars v = build(net, prog);
  const mp::Solution mip = mp::solve(prog, opts.solver);
  if (mip.status == mp::SolveStatus::Infeasible)
    throw Error(ErrorCode::InfeasibleMarket, "day-ahead demand cannot be met by supply and transfers");
  if (mip.status == mp::SolveStatus::Unbounded) throw Error(ErrorCode::SolverFailure, "day-ahead program is unbounded");
  const mp::Solution fixed = mp::relax_and_duals(prog, mip, opts.solver);

  const int hours = net.horizon;
  DayAheadOutcome out;
  out.horizon = hours;
  out.binaries = prog.num_binaries();
  for (std::size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    out.generators.push_back(g.id);
    Series qda, uc, su, sd;
    for (int h = 0; h < hours; ++h) qda.push_back(fixed.value(v.qda[gi][h]));
    if (!v.uc[gi].empty()) {
      for (int h = 0; h < hours; ++h) {
        uc.push_back(std::round(mip.value(v.uc[gi][h])));
        su.push_back(std::round(mip.value(v.su[gi][h])));
        sd.push_back(std::round(mip.value(v.sd[gi][h])));
      }
    } else {
      double prev = g.initial_on ? (*g.initial_on ? 1.0 : 0.0) : -1.0;
      for (int h = 0; h < hours; ++h) {
        const double on = qda[h] > 0.0 ? 1.0 : 0.0;
        if (prev < 0.0) prev = on;
        uc.push_back(on);
        su.push_back(on > prev ? 1.0 : 0.0);
        sd.push_back(on < prev ? 1.0 : 0.0);
        prev = on;
      }
    }
    for (int h = 0; h < hours; ++h) {
      out.energy_cost += g.bid * qda[h];
      if (!v.su[gi].empty()) out.startup_cost += g.cycling_cost * g.capacity * su[h];
    }
    out.qda.push_back(std::move(qda));
    out.uc.push_back(std::move(uc));
    out.su.push_back(std::move(su));
    out.sd.push_back(std::move(sd));
  }
  out.total_cost = out.energy_cost + out.startup_cost;

  for (const auto& n : net.nodes) {
    out.nodes.push_back(n.id);
    Series d(static_cast<std::size_t>(hours), 0.0);
    for (std::size_t gi = 0; gi < net.generators.size(); ++gi)
      if (net.generators[gi].node == n.id)
        for (int h = 0; h < hours; ++h) d[h] += out.qda[gi][h];
    out.dispatch.push_back(std::move(d));
  }
  out.zones = v.zones;
  for (const auto& rows : v.balance) {
    Series p;
    for (const auto r : rows) p.push_back(fixed.dual(r));
    out.price.push_back(std::move(p));
  }
  out.ntc = net.ntc;
  for (const auto& row : v.tc) {
    Series t;
    for (const auto var : row) t.push_back(fixed.value(var));
    out.transfer.push_back(std::move(t));
  }
  return out;
}

double ImbalanceSeries::at_node(int node, int hour) const {
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k] == node) return by_node[k][static_cast<std::size_t>(hour)];
  return 0.0;
}

double ImbalanceSeries::total(int hour) const {
  double s = 0.0;
  for (const auto& row : by_node) s += row[static_cast<std::size_t>(hour)];
  return s;
}

ImbalanceSeries make_imbalances(const Network& net, const DayAheadOutcome& da, const Table& by_generator) {
  if (by_generator.size() != da.generators.size())
    throw Error(ErrorCode::DimensionMismatch, "one imbalance series per generator expected");
  ImbalanceSeries imb;
  imb.generators = da.generators;
  imb.by_generator = by_generator;
  for (const auto& n : net.nodes) {
    imb.nodes.push_back(n.id);
    Series s(static_cast<std::size_t>(da.horizon), 0.0);
    for (std::size_t gi = 0; gi < da.generators.size(); ++gi) {
      if (net.generator(da.generators[gi]).node != n.id) continue;
      if (static_cast<int>(by_generator[gi].size()) != da.horizon)
        throw Error(ErrorCode::DimensionMismatch, "imbalance series length differs from the horizon");
      for (int h = 0; h < da.horizon; ++h) s[h] += by_generator[gi][h];
    }
    imb.by_node.push_back(std::move(s));
  }
  return imb;
}

ImbalanceSeries zero_imbalances(const Network& net, const DayAheadOutcome& da) {
  return make_imbalances(net, da, Table(da.generators.size(), Series(static_cast<std::size_t>(da.horizon), 0.0)));
}

}  // namespace gridflex
