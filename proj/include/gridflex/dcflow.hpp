#pragma once

// Linear DC network sensitivities: flows from angles, PTDF matrices and
// interface impact factors.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gridflex/netmodel.hpp"

namespace gridflex {

/// SB * (theta_i - theta_j) / X. Throws Error(ZeroReactance) when X <= 0.
double flow_from_angles(const Line& line, double theta_i, double theta_j, double base_power);

struct PtdfLine {
  std::string id;
  int from = 0;
  int to = 0;
};

/// entries(l, n) is the MW change of flow on line l (oriented from -> to) per MW
/// injected at node n and withdrawn at the slack.
struct PtdfMatrix {
  std::string operator_id;
  int slack = 0;
  std::vector<PtdfLine> lines;
  std::vector<int> nodes;
  std::vector<double> entries;  // row-major, lines x nodes

  double at(std::size_t line, std::size_t node) const { return entries[line * nodes.size() + node]; }
  double at(const std::string& line, int node) const;
  std::size_t line_pos(const std::string& id) const;
  std::size_t node_pos(int id) const;
};

/// Lowest node id of the grid.
int default_slack(const SubGrid& grid);

/// Throws DisconnectedGrid, ZeroReactance or SingularSusceptance.
PtdfMatrix compute_ptdf(const Network& net, const SubGrid& grid, int slack);

/// PTDF over the whole network with the slack at the lowest TSO node id.
PtdfMatrix compute_system_ptdf(const Network& net);

/// Sensitivity of the import (TSO side to DSO side) through `sub` to an
/// injection at `node`.
double import_sensitivity(const PtdfMatrix& ptdf, const InterfaceSubstation& sub, int node);

/// Mean import sensitivity over `dso_nodes` for every interface, divided by
/// their sum when `normalize` is set. Throws Error(EmptyDsoNodeSet).
std::map<std::string, double> compute_impact_factors(const PtdfMatrix& ptdf,
                                                     const std::vector<InterfaceSubstation>& interfaces,
                                                     const std::vector<int>& dso_nodes, bool normalize = true);

/// Writes impact factors of every DSO into net.interfaces.
void assign_impact_factors(Network& net, bool normalize = true);

/// Import through `sub` caused by `injections` (MW, in ptdf.nodes order).
/// Throws Error(DimensionMismatch).
double interface_flow_from_injections(const std::vector<double>& injections, const PtdfMatrix& ptdf,
                                      const InterfaceSubstation& sub);

/// Angles (rad, in grid.nodes order, slack at 0) and line flows (MW, in
/// grid.lines order) of a single balanced injection snapshot.
struct DcSnapshot {
  std::vector<int> nodes;
  std::vector<double> theta;
  std::vector<std::string> lines;
  std::vector<double> flow;
};

DcSnapshot dc_power_flow(const Network& net, const SubGrid& grid, int slack, const std::vector<double>& injections);

/// Rows = lines, columns = nodes in id order.
void write_ptdf_csv(const PtdfMatrix& ptdf, std::ostream& out);

}  // namespace gridflex
