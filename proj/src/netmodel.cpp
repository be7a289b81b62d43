#include "gridflex/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "gridflex/error.hpp"

namespace gridflex {

std::string to_string(OperatorType type) { return type == OperatorType::TSO ? "TSO" : "DSO"; }

std::string to_string(FspKind kind) {
  switch (kind) {
    case FspKind::DR: return "DR";
    case FspKind::RES: return "RES";
    case FspKind::ESS: return "ESS";
    case FspKind::GENERIC: return "GENERIC";
  }
  return "GENERIC";
}

namespace {

double hourly(const std::vector<double>& series, int hour) {
  if (series.empty()) return 0.0;
  if (series.size() == 1) return series.front();
  return series.at(static_cast<std::size_t>(hour));
}

}  // namespace

double Generator::available(int hour) const {
  if (!is_res || profile.empty()) return capacity;
  return capacity * profile.at(static_cast<std::size_t>(hour));
}

bool Generator::needs_commitment() const {
  return must_run || cycling_cost > 0.0 || min_dispatch > 0.0 || min_uptime > 1;
}

double Fsp::up(int hour) const { return hourly(cap_up, hour); }
double Fsp::down(int hour) const { return hourly(cap_down, hour); }

const Node& Network::node(int id) const { return nodes[node_index(id)]; }

std::size_t Network::node_index(int id) const {
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k].id == id) return k;
  throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
}

bool Network::has_node(int id) const {
  return std::any_of(nodes.begin(), nodes.end(), [id](const Node& n) { return n.id == id; });
}

const Line& Network::line(const std::string& id) const { return lines[line_index(id)]; }

std::size_t Network::line_index(const std::string& id) const {
  for (std::size_t k = 0; k < lines.size(); ++k)
    if (lines[k].id == id) return k;
  throw Error(ErrorCode::InvalidInput, "unknown line " + id);
}

const Operator& Network::op(const std::string& id) const {
  for (const auto& o : operators)
    if (o.id == id) return o;
  throw Error(ErrorCode::InvalidInput, "unknown operator " + id);
}

const InterfaceSubstation& Network::interface(const std::string& id) const {
  for (const auto& s : interfaces)
    if (s.id == id) return s;
  throw Error(ErrorCode::InvalidInput, "unknown interface " + id);
}

const Generator& Network::generator(const std::string& id) const {
  for (const auto& g : generators)
    if (g.id == id) return g;
  throw Error(ErrorCode::InvalidInput, "unknown generator " + id);
}

const std::string& Network::operator_of(int node_id) const { return node(node_id).operator_id; }

OperatorType Network::operator_type_of(int node_id) const { return op(operator_of(node_id)).type; }

bool Network::is_dso_node(int node_id) const { return operator_type_of(node_id) == OperatorType::DSO; }

std::vector<int> Network::node_ids() const {
  std::vector<int> ids;
  for (const auto& n : nodes) ids.push_back(n.id);
  return ids;
}

std::vector<std::string> Network::dso_ids() const {
  std::vector<std::string> ids;
  for (const auto& o : operators)
    if (o.type == OperatorType::DSO) ids.push_back(o.id);
  return ids;
}

std::vector<const InterfaceSubstation*> Network::interfaces_of(const std::string& dso_id) const {
  std::vector<const InterfaceSubstation*> out;
  for (const auto& s : interfaces)
    if (has_node(s.dso_node) && operator_of(s.dso_node) == dso_id) out.push_back(&s);
  return out;
}

std::size_t ValidationReport::count(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.kind == kind; }));
}

namespace {

bool finite_series(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

template <class T, class Key>
void check_unique(const std::vector<T>& items, Key key, const std::string& what, ValidationReport& rep) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    const std::string k = key(item);
    if (!seen.insert(k).second) rep.findings.push_back({"duplicate id", k, "duplicate " + what + " id " + k});
  }
}

// Number of connected components of `nodes` using only `lines`.
int count_components(const std::vector<int>& nodes, const std::vector<const Line*>& lines) {
  std::map<int, std::vector<int>> adj;
  for (int n : nodes) adj[n];
  for (const auto* l : lines) {
    adj[l->from].push_back(l->to);
    adj[l->to].push_back(l->from);
  }
  std::set<int> seen;
  int components = 0;
  for (int start : nodes) {
    if (seen.count(start)) continue;
    ++components;
    std::queue<int> todo;
    todo.push(start);
    seen.insert(start);
    while (!todo.empty()) {
      const int n = todo.front();
      todo.pop();
      for (int m : adj[n])
        if (seen.insert(m).second) todo.push(m);
    }
  }
  return components;
}

}  // namespace

ValidationReport validate_network(const Network& net) {
  ValidationReport rep;
  auto add = [&](std::string kind, std::string subject, std::string message) {
    rep.findings.push_back({std::move(kind), std::move(subject), std::move(message)});
  };

  if (net.horizon <= 0) add("bad horizon", net.name, "horizon must be positive");
  if (!(net.base_power > 0.0) || !std::isfinite(net.base_power))
    add("bad base power", net.name, "base power must be positive");
  if (net.nodes.empty()) add("empty network", net.name, "network has no nodes");

  check_unique(net.nodes, [](const Node& n) { return std::to_string(n.id); }, "node", rep);
  check_unique(net.lines, [](const Line& l) { return l.id; }, "line", rep);
  check_unique(net.zones, [](const BiddingZone& z) { return z.id; }, "zone", rep);
  check_unique(net.operators, [](const Operator& o) { return o.id; }, "operator", rep);
  check_unique(net.interfaces, [](const InterfaceSubstation& s) { return s.id; }, "interface", rep);
  check_unique(net.generators, [](const Generator& g) { return g.id; }, "generator", rep);
  check_unique(net.fsps, [](const Fsp& f) { return f.id; }, "FSP", rep);

  std::set<std::string> zones, operators;
  for (const auto& z : net.zones) zones.insert(z.id);
  for (const auto& o : net.operators) operators.insert(o.id);

  for (const auto& n : net.nodes) {
    const std::string id = std::to_string(n.id);
    if (!zones.count(n.zone)) add("unknown zone", id, "node " + id + " references unknown zone '" + n.zone + "'");
    if (!operators.count(n.operator_id))
      add("unknown operator", id, "node " + id + " references unknown operator '" + n.operator_id + "'");
    if (!(n.theta_min < n.theta_max)) add("bad angle bounds", id, "node " + id + " needs theta_min < theta_max");
    if (static_cast<int>(n.demand.size()) != net.horizon)
      add("bad demand length", id, "node " + id + " demand series length differs from the horizon");
    if (!finite_series(n.demand)) add("bad demand", id, "node " + id + " demand is not finite");
  }

  std::vector<const Line*> valid_lines;
  for (const auto& l : net.lines) {
    bool ok = true;
    for (int end : {l.from, l.to})
      if (!net.has_node(end)) {
        add("dangling endpoint", l.id, "line " + l.id + " references missing node " + std::to_string(end));
        ok = false;
      }
    if (l.from == l.to) {
      add("self loop", l.id, "line " + l.id + " connects a node to itself");
      ok = false;
    }
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) {
      add("bad reactance", l.id, "line " + l.id + " needs reactance > 0");
      ok = false;
    }
    if (!(l.p_min <= 0.0 && 0.0 <= l.p_max)) add("bad flow bounds", l.id, "line " + l.id + " needs p_min <= 0 <= p_max");
    if (ok) valid_lines.push_back(&l);
  }

  // Interface lines are the only lines allowed to cross an operator boundary.
  std::set<std::string> interface_lines;
  for (const auto& s : net.interfaces) {
    interface_lines.insert(s.line);
    const bool tso_ok = net.has_node(s.tso_node);
    const bool dso_ok = net.has_node(s.dso_node);
    if (!tso_ok || !dso_ok) {
      add("dangling interface", s.id, "interface " + s.id + " references a missing node");
      continue;
    }
    const auto& tso_op = net.node(s.tso_node).operator_id;
    const auto& dso_op = net.node(s.dso_node).operator_id;
    if (!operators.count(tso_op) || !operators.count(dso_op)) continue;
    if (net.op(tso_op).type != OperatorType::TSO || net.op(dso_op).type != OperatorType::DSO)
      add("bad interface ends", s.id, "interface " + s.id + " must join a TSO node to a DSO node");
    const auto it = std::find_if(net.lines.begin(), net.lines.end(), [&](const Line& l) { return l.id == s.line; });
    if (it == net.lines.end()) {
      add("missing interface line", s.id, "interface " + s.id + " references unknown line '" + s.line + "'");
    } else if (!((it->from == s.tso_node && it->to == s.dso_node) || (it->from == s.dso_node && it->to == s.tso_node))) {
      add("bad interface line", s.id, "line " + s.line + " does not join the interface nodes");
    }
    for (std::size_t k = 0; k < s.levels.size(); ++k) {
      if (!(s.levels[k].width > 0.0))
        add("bad subscription level", s.id, "interface " + s.id + " level " + std::to_string(k + 1) + " width must be > 0");
      if (!std::isfinite(s.levels[k].cost))
        add("bad subscription level", s.id, "interface " + s.id + " level cost must be finite");
      if (k > 0 && s.levels[k].cost < s.levels[k - 1].cost)
        add("decreasing subscription cost", s.id, "interface " + s.id + " level costs must be non-decreasing");
      if (std::isinf(s.levels[k].width) && k + 1 != s.levels.size())
        add("bad subscription level", s.id, "only the last level of interface " + s.id + " may be unbounded");
    }
  }

  for (const auto* l : valid_lines) {
    const auto& a = net.node(l->from).operator_id;
    const auto& b = net.node(l->to).operator_id;
    if (a != b && !interface_lines.count(l->id))
      add("unregistered boundary line", l->id, "line " + l->id + " crosses operators without an interface");
  }

  for (const auto& o : net.operators) {
    std::vector<int> nodes;
    for (const auto& n : net.nodes)
      if (n.operator_id == o.id) nodes.push_back(n.id);
    if (nodes.empty()) {
      add("empty operator", o.id, "operator " + o.id + " owns no nodes");
      continue;
    }
    std::vector<const Line*> internal;
    for (const auto* l : valid_lines)
      if (net.node(l->from).operator_id == o.id && net.node(l->to).operator_id == o.id) internal.push_back(l);
    if (count_components(nodes, internal) > 1)
      add("operator subgraph disconnected", o.id, "operator " + o.id + " grid is split into several components");
    if (o.type == OperatorType::DSO && net.interfaces_of(o.id).empty())
      add("isolated DSO", o.id, "DSO " + o.id + " has no interface substation");
  }

  for (const auto& t : net.ntc) {
    if (!zones.count(t.from) || !zones.count(t.to))
      add("unknown zone", t.from + "-" + t.to, "NTC references an unknown zone");
    if (!(t.lower <= t.upper)) add("bad NTC", t.from + "-" + t.to, "NTC needs lower <= upper");
  }

  for (const auto& g : net.generators) {
    if (!net.has_node(g.node))
      add("unknown node", g.id, "generator " + g.id + " references missing node " + std::to_string(g.node));
    if (!zones.count(g.zone)) add("unknown zone", g.id, "generator " + g.id + " references unknown zone");
    if (net.has_node(g.node) && zones.count(g.zone) && net.node(g.node).zone != g.zone)
      add("zone mismatch", g.id, "generator " + g.id + " zone differs from its node's zone");
    if (!(g.capacity >= 0.0) || !std::isfinite(g.capacity)) add("bad capacity", g.id, "generator " + g.id + " capacity");
    if (!(g.min_dispatch >= 0.0 && g.min_dispatch <= 1.0))
      add("bad min dispatch", g.id, "generator " + g.id + " needs 0 <= min_dispatch <= 1");
    if (g.min_uptime < 0) add("bad min uptime", g.id, "generator " + g.id + " needs min_uptime >= 0");
    if (!std::isfinite(g.bid) || !std::isfinite(g.cycling_cost)) add("bad cost", g.id, "generator " + g.id + " cost");
    if (g.is_res && !g.profile.empty()) {
      if (static_cast<int>(g.profile.size()) != net.horizon)
        add("bad profile length", g.id, "generator " + g.id + " profile length differs from the horizon");
      if (std::any_of(g.profile.begin(), g.profile.end(), [](double p) { return !(p >= 0.0 && p <= 1.0); }))
        add("bad profile", g.id, "generator " + g.id + " profile values must lie in [0,1]");
    }
  }

  std::set<std::string> generator_ids;
  for (const auto& g : net.generators) generator_ids.insert(g.id);
  for (const auto& f : net.fsps) {
    if (!net.has_node(f.node))
      add("unknown node", f.id, "FSP " + f.id + " references missing node " + std::to_string(f.node));
    for (const auto* series : {&f.cap_up, &f.cap_down, &f.qda}) {
      const auto n = series->size();
      if (n > 1 && static_cast<int>(n) != net.horizon)
        add("bad capacity length", f.id, "FSP " + f.id + " hourly series length differs from the horizon");
      if (std::any_of(series->begin(), series->end(), [](double x) { return !(x >= 0.0) || !std::isfinite(x); }))
        add("bad capacity", f.id, "FSP " + f.id + " capacities must be finite and >= 0");
    }
    if (!std::isfinite(f.bid)) add("bad cost", f.id, "FSP " + f.id + " bid must be finite");
    if (f.kind == FspKind::DR && !(f.dr_max_hours >= 0.0)) add("bad DR cap", f.id, "FSP " + f.id + " DR hours >= 0");
    if (f.kind == FspKind::RES) {
      if (!(f.max_flex_up >= 0.0) || !(f.max_flex_down >= 0.0))
        add("bad flex cap", f.id, "FSP " + f.id + " MaxFlex values must be >= 0");
      if (!f.generator.empty() && !generator_ids.count(f.generator))
        add("unknown generator", f.id, "FSP " + f.id + " links an unknown generator");
    }
    if (f.kind == FspKind::ESS) {
      if (!(f.efficiency > 0.0 && f.efficiency <= 1.0)) add("bad efficiency", f.id, "FSP " + f.id + " needs 0 < EF <= 1");
      if (!(f.soc_min <= f.soc_init && f.soc_init <= f.soc_max))
        add("bad state of charge", f.id, "FSP " + f.id + " needs soc_min <= soc_init <= soc_max");
      if (!(f.energy > 0.0)) add("bad energy capacity", f.id, "FSP " + f.id + " energy capacity must be > 0");
    }
  }
  return rep;
}

std::map<std::string, SubGrid> partition_by_operator(const Network& net) {
  const auto rep = validate_network(net);
  if (!rep.ok())
    throw Error(ErrorCode::UnvalidatedNetwork, std::to_string(rep.findings.size()) + " validation findings, first: " +
                                                   rep.findings.front().message);
  std::map<std::string, SubGrid> out;
  for (const auto& o : net.operators) out[o.id] = SubGrid{o.id, o.type, {}, {}, {}};
  for (const auto& n : net.nodes) out[n.operator_id].nodes.push_back(n.id);
  for (const auto& l : net.lines) {
    const auto& a = net.node(l.from).operator_id;
    const auto& b = net.node(l.to).operator_id;
    if (a == b) {
      out[a].lines.push_back(l.id);
    } else {
      out[a].boundary_lines.push_back(l.id);
      out[b].boundary_lines.push_back(l.id);
    }
  }
  return out;
}

SubGrid combined_grid(const Network& net) {
  SubGrid g;
  g.operator_id = "*";
  for (const auto& n : net.nodes) g.nodes.push_back(n.id);
  for (const auto& l : net.lines) g.lines.push_back(l.id);
  return g;
}

double subscription_cost(const std::vector<SubscriptionLevel>& levels, double power) {
  double remaining = std::max(0.0, power);
  double cost = 0.0;
  for (const auto& lv : levels) {
    const double used = std::min(remaining, lv.width);
    cost += used * lv.cost;
    remaining -= used;
    if (remaining <= 0.0) break;
  }
  return cost;
}

}  // namespace gridflex
