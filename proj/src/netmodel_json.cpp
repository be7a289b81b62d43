#include <cmath>
#include <fstream>
#include <limits>

#include "gridflex/error.hpp"
#include "gridflex/netmodel.hpp"
#include "json_util.hpp"
#include "netmodel_json.hpp"

namespace gridflex {
namespace {

using json::Json;
using json::Ordered;

OperatorType parse_operator_type(const std::string& s) {
  if (s == "TSO") return OperatorType::TSO;
  if (s == "DSO") return OperatorType::DSO;
  throw Error(ErrorCode::InvalidInput, "operator type must be TSO or DSO, got '" + s + "'");
}

FspKind parse_fsp_kind(const std::string& s) {
  if (s == "DR") return FspKind::DR;
  if (s == "RES") return FspKind::RES;
  if (s == "ESS") return FspKind::ESS;
  if (s == "GENERIC") return FspKind::GENERIC;
  throw Error(ErrorCode::InvalidInput, "FSP kind must be DR, RES, ESS or GENERIC, got '" + s + "'");
}

}  // namespace

Generator generator_from_json(const Json& g, int horizon) {
  Generator gen;
  gen.id = g.at("id").get<std::string>();
  gen.node = g.at("node").get<int>();
  gen.zone = g.at("zone").get<std::string>();
  gen.technology = g.value("technology", std::string{"thermal"});
  gen.capacity = g.at("capacity_mw").get<double>();
  gen.bid = g.value("bid_eur_per_mwh", 0.0);
  gen.cycling_cost = g.value("cycling_cost_eur_per_mw", 0.0);
  gen.min_uptime = g.value("min_uptime_h", 0);
  gen.min_dispatch = g.value("min_dispatch_pu", 0.0);
  gen.is_res = g.value("is_res", false);
  if (g.contains("profile_pu")) gen.profile = json::series(g, "profile_pu", horizon);
  gen.must_run = g.value("must_run", false);
  if (g.contains("initial_on") && !g.at("initial_on").is_null()) gen.initial_on = g.at("initial_on").get<bool>();
  gen.offers_flexibility = g.value("offers_flexibility", false);
  return gen;
}

Fsp fsp_from_json(const Json& f) {
  Fsp fsp;
  fsp.id = f.at("id").get<std::string>();
  fsp.node = f.at("node").get<int>();
  fsp.kind = parse_fsp_kind(f.value("kind", std::string{"GENERIC"}));
  fsp.cap_up = json::compact_series(f, "cap_up_mw");
  fsp.cap_down = json::compact_series(f, "cap_down_mw");
  fsp.bid = f.value("bid_eur_per_mwh", 0.0);
  fsp.dr_max_hours = f.value("dr_max_hours_h", 0.0);
  fsp.max_flex_up = f.value("max_flex_up_pu", 1.0);
  fsp.max_flex_down = f.value("max_flex_down_pu", 1.0);
  fsp.qda = json::compact_series(f, "qda_mw");
  fsp.generator = f.value("generator", std::string{});
  fsp.soc_init = f.value("soc_init_pu", 0.5);
  fsp.soc_min = f.value("soc_min_pu", 0.0);
  fsp.soc_max = f.value("soc_max_pu", 1.0);
  fsp.efficiency = f.value("efficiency_pu", 1.0);
  fsp.energy = f.value("energy_mwh", 0.0);
  return fsp;
}

namespace {

Network from_json(const Json& j) {
  Network net;
  net.name = j.value("name", std::string{});
  net.horizon = j.value("horizon_h", kDefaultHorizon);
  net.base_power = j.value("base_power_mw", 100.0);

  for (const auto& z : j.value("zones", Json::array())) net.zones.push_back({z.at("id").get<std::string>()});
  for (const auto& t : j.value("ntc", Json::array()))
    net.ntc.push_back({t.at("from").get<std::string>(), t.at("to").get<std::string>(), t.value("lower_mw", 0.0),
                       t.value("upper_mw", 0.0)});
  for (const auto& o : j.value("operators", Json::array()))
    net.operators.push_back({o.at("id").get<std::string>(), parse_operator_type(o.at("type").get<std::string>())});

  for (const auto& n : j.value("nodes", Json::array())) {
    Node node;
    node.id = n.at("id").get<int>();
    node.zone = n.at("zone").get<std::string>();
    node.operator_id = n.at("operator").get<std::string>();
    node.demand = json::series(n, "demand_mw", net.horizon);
    node.theta_min = n.value("theta_min_rad", node.theta_min);
    node.theta_max = n.value("theta_max_rad", node.theta_max);
    net.nodes.push_back(std::move(node));
  }

  for (const auto& l : j.value("lines", Json::array())) {
    Line line;
    line.id = l.at("id").get<std::string>();
    line.from = l.at("from").get<int>();
    line.to = l.at("to").get<int>();
    line.reactance = l.at("reactance_pu").get<double>();
    line.p_max = json::number_or_inf(l, "p_max_mw", kInfinity);
    line.p_min = json::number_or_inf(l, "p_min_mw", -line.p_max);
    net.lines.push_back(std::move(line));
  }

  for (const auto& s : j.value("interfaces", Json::array())) {
    InterfaceSubstation sub;
    sub.id = s.at("id").get<std::string>();
    sub.tso_node = s.at("tso_node").get<int>();
    sub.dso_node = s.at("dso_node").get<int>();
    sub.line = s.at("line").get<std::string>();
    for (const auto& lv : s.value("levels", Json::array()))
      sub.levels.push_back({json::number_or_inf(lv, "width_mw", kInfinity), lv.value("cost_eur_per_mwh", 0.0)});
    sub.impact = s.value("impact_pu", 0.0);
    net.interfaces.push_back(std::move(sub));
  }

  for (const auto& g : j.value("generators", Json::array())) net.generators.push_back(generator_from_json(g, net.horizon));
  for (const auto& f : j.value("fsps", Json::array())) net.fsps.push_back(fsp_from_json(f));
  return net;
}

Ordered compact(const std::vector<double>& v) {
  if (v.size() == 1) return Ordered(v.front());
  return Ordered(v);
}

Ordered to_json(const Network& net) {
  Ordered j;
  j["schema"] = "gridflex.network/1";
  j["name"] = net.name;
  j["horizon_h"] = net.horizon;
  j["base_power_mw"] = net.base_power;
  j["zones"] = Ordered::array();
  for (const auto& z : net.zones) j["zones"].push_back(Ordered{{"id", z.id}});
  j["ntc"] = Ordered::array();
  for (const auto& t : net.ntc)
    j["ntc"].push_back(Ordered{{"from", t.from}, {"to", t.to}, {"lower_mw", t.lower}, {"upper_mw", t.upper}});
  j["operators"] = Ordered::array();
  for (const auto& o : net.operators) j["operators"].push_back(Ordered{{"id", o.id}, {"type", to_string(o.type)}});
  j["nodes"] = Ordered::array();
  for (const auto& n : net.nodes)
    j["nodes"].push_back(Ordered{{"id", n.id},
                                 {"zone", n.zone},
                                 {"operator", n.operator_id},
                                 {"demand_mw", n.demand},
                                 {"theta_min_rad", n.theta_min},
                                 {"theta_max_rad", n.theta_max}});
  j["lines"] = Ordered::array();
  for (const auto& l : net.lines)
    j["lines"].push_back(Ordered{{"id", l.id},
                                 {"from", l.from},
                                 {"to", l.to},
                                 {"reactance_pu", l.reactance},
                                 {"p_min_mw", json::inf_or_number(l.p_min)},
                                 {"p_max_mw", json::inf_or_number(l.p_max)}});
  j["interfaces"] = Ordered::array();
  for (const auto& s : net.interfaces) {
    Ordered levels = Ordered::array();
    for (const auto& lv : s.levels)
      levels.push_back(Ordered{{"width_mw", json::inf_or_number(lv.width)}, {"cost_eur_per_mwh", lv.cost}});
    j["interfaces"].push_back(Ordered{{"id", s.id},
                                      {"tso_node", s.tso_node},
                                      {"dso_node", s.dso_node},
                                      {"line", s.line},
                                      {"levels", levels},
                                      {"impact_pu", s.impact}});
  }
  j["generators"] = Ordered::array();
  for (const auto& g : net.generators) {
    Ordered o{{"id", g.id},
              {"node", g.node},
              {"zone", g.zone},
              {"technology", g.technology},
              {"capacity_mw", g.capacity},
              {"bid_eur_per_mwh", g.bid},
              {"cycling_cost_eur_per_mw", g.cycling_cost},
              {"min_uptime_h", g.min_uptime},
              {"min_dispatch_pu", g.min_dispatch},
              {"is_res", g.is_res}};
    if (!g.profile.empty()) o["profile_pu"] = g.profile;
    o["must_run"] = g.must_run;
    o["initial_on"] = g.initial_on ? Ordered(*g.initial_on) : Ordered(nullptr);
    o["offers_flexibility"] = g.offers_flexibility;
    j["generators"].push_back(std::move(o));
  }
  j["fsps"] = Ordered::array();
  for (const auto& f : net.fsps) {
    Ordered o{{"id", f.id},
              {"node", f.node},
              {"kind", to_string(f.kind)},
              {"cap_up_mw", compact(f.cap_up)},
              {"cap_down_mw", compact(f.cap_down)},
              {"bid_eur_per_mwh", f.bid}};
    if (f.kind == FspKind::DR) o["dr_max_hours_h"] = f.dr_max_hours;
    if (f.kind == FspKind::RES) {
      o["max_flex_up_pu"] = f.max_flex_up;
      o["max_flex_down_pu"] = f.max_flex_down;
      if (!f.qda.empty()) o["qda_mw"] = compact(f.qda);
      if (!f.generator.empty()) o["generator"] = f.generator;
    }
    if (f.kind == FspKind::ESS) {
      o["soc_init_pu"] = f.soc_init;
      o["soc_min_pu"] = f.soc_min;
      o["soc_max_pu"] = f.soc_max;
      o["efficiency_pu"] = f.efficiency;
      o["energy_mwh"] = f.energy;
    }
    j["fsps"].push_back(std::move(o));
  }
  return j;
}

}  // namespace

Network read_network(std::istream& in) { return json::guarded([&] { return from_json(json::parse(in)); }); }

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open network file " + path);
  return read_network(in);
}

void write_network(const Network& net, std::ostream& out) { out << to_json(net).dump(2) << '\n'; }

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write network file " + path);
  write_network(net, out);
}

}  // namespace gridflex
