#pragma once

// Small hand-built networks shared by the unit tests.

#include <string>
#include <vector>

#include "gridflex/netmodel.hpp"

namespace fixtures {

using namespace gridflex;

inline std::vector<double> flat(double mw, int hours = 24) { return std::vector<double>(hours, mw); }

struct Builder {
  Network net;

  Builder(int hours = 24) {
    net.name = "fixture";
    net.horizon = hours;
    net.base_power = 100.0;
    net.zones = {{"Z1"}};
  }
  Builder& op(const std::string& id, OperatorType type) {
    net.operators.push_back({id, type});
    return *this;
  }
  Builder& node(int id, const std::string& op_id, double demand = 0.0, const std::string& zone = "Z1") {
    Node n;
    n.id = id;
    n.zone = zone;
    n.operator_id = op_id;
    n.demand = flat(demand, net.horizon);
    net.nodes.push_back(n);
    return *this;
  }
  Builder& line(const std::string& id, int from, int to, double x, double pmax) {
    net.lines.push_back({id, from, to, x, -pmax, pmax});
    return *this;
  }
  Builder& sub(const std::string& id, int tso, int dso, const std::string& line_id,
               std::vector<SubscriptionLevel> levels = {}) {
    InterfaceSubstation s;
    s.id = id;
    s.tso_node = tso;
    s.dso_node = dso;
    s.line = line_id;
    s.levels = std::move(levels);
    net.interfaces.push_back(s);
    return *this;
  }
  Builder& gen(const std::string& id, int node, double cap, double bid, const std::string& zone = "Z1") {
    Generator g;
    g.id = id;
    g.node = node;
    g.zone = zone;
    g.capacity = cap;
    g.bid = bid;
    net.generators.push_back(g);
    return *this;
  }
  Builder& fsp(const std::string& id, int node, double up, double down, double bid, FspKind kind = FspKind::GENERIC) {
    Fsp f;
    f.id = id;
    f.node = node;
    f.kind = kind;
    f.cap_up = {up};
    f.cap_down = {down};
    f.bid = bid;
    net.fsps.push_back(f);
    return *this;
  }
};

inline Network two_node() {
  return Builder().op("T", OperatorType::TSO).node(1, "T").node(2, "T", 10).line("l12", 1, 2, 0.1, 100).net;
}

inline Network triangle(double x = 0.1) {
  return Builder()
      .op("T", OperatorType::TSO)
      .node(1, "T")
      .node(2, "T")
      .node(3, "T")
      .line("l12", 1, 2, x, 100)
      .line("l23", 2, 3, x, 100)
      .line("l13", 1, 3, x, 100)
      .net;
}

// Three TSO nodes in a ring and two DSO nodes behind one interface.
inline Network tso3_dso2() {
  return Builder()
      .op("T", OperatorType::TSO)
      .op("D", OperatorType::DSO)
      .node(1, "T")
      .node(2, "T")
      .node(3, "T")
      .node(11, "D", 10)
      .node(12, "D", 5)
      .line("t12", 1, 2, 0.1, 200)
      .line("t23", 2, 3, 0.1, 200)
      .line("t13", 1, 3, 0.1, 200)
      .line("d1112", 11, 12, 0.2, 50)
      .line("b311", 3, 11, 0.05, 100)
      .sub("S1", 3, 11, "b311")
      .net;
}

// Meshed TSO ring of four nodes and a meshed DSO ring of four nodes joined by
// two interface substations.
inline Network meshed_two_interfaces(double x_b1 = 0.05, double x_b2 = 0.05) {
  return Builder()
      .op("T", OperatorType::TSO)
      .op("D", OperatorType::DSO)
      .node(1, "T")
      .node(2, "T")
      .node(3, "T")
      .node(4, "T")
      .node(11, "D", 10)
      .node(12, "D", 10)
      .node(13, "D", 10)
      .node(14, "D", 10)
      .line("t12", 1, 2, 0.1, 300)
      .line("t23", 2, 3, 0.1, 300)
      .line("t34", 3, 4, 0.1, 300)
      .line("t41", 4, 1, 0.1, 300)
      .line("d1112", 11, 12, 0.2, 80)
      .line("d1213", 12, 13, 0.2, 80)
      .line("d1314", 13, 14, 0.2, 80)
      .line("d1411", 14, 11, 0.2, 80)
      .line("b211", 2, 11, x_b1, 100)
      .line("b413", 4, 13, x_b2, 100)
      .sub("S1", 2, 11, "b211")
      .sub("S2", 4, 13, "b413")
      .net;
}

}  // namespace fixtures
