#include "gridflex/dcflow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <queue>
#include <set>

#include "gridflex/error.hpp"

namespace gridflex {

double flow_from_angles(const Line& line, double theta_i, double theta_j, double base_power) {
  if (!(line.reactance > 0.0)) throw Error(ErrorCode::ZeroReactance, "line " + line.id + " has reactance <= 0");
  return base_power * (theta_i - theta_j) / line.reactance;
}

double PtdfMatrix::at(const std::string& line, int node) const { return at(line_pos(line), node_pos(node)); }

std::size_t PtdfMatrix::line_pos(const std::string& id) const {
  for (std::size_t k = 0; k < lines.size(); ++k)
    if (lines[k].id == id) return k;
  throw Error(ErrorCode::InvalidInput, "line " + id + " is not part of the PTDF matrix");
}

std::size_t PtdfMatrix::node_pos(int id) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id) + " not in PTDF");
  return static_cast<std::size_t>(it - nodes.begin());
}

int default_slack(const SubGrid& grid) {
  if (grid.nodes.empty()) throw Error(ErrorCode::InvalidInput, "grid has no nodes");
  return *std::min_element(grid.nodes.begin(), grid.nodes.end());
}

namespace {

// Reduced susceptance factorization shared by PTDF and snapshot solves.
struct Susceptance {
  std::vector<int> nodes;  // sorted ids
  std::vector<const Line*> lines;
  int slack_pos = 0;
  std::vector<int> reduced;  // node position -> reduced index, -1 for the slack
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  double base_power = 0.0;

  std::size_t pos(int id) const {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
  }
  double susceptance(const Line& l) const { return base_power / l.reactance; }

  // Angles for an injection vector (positions follow `nodes`).
  Eigen::VectorXd angles(const Eigen::VectorXd& injection) const {
    const int n = static_cast<int>(nodes.size());
    Eigen::VectorXd rhs(n - 1);
    for (int k = 0; k < n; ++k)
      if (reduced[k] >= 0) rhs[reduced[k]] = injection[k];
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    if (n > 1) {
      const Eigen::VectorXd red = ldlt.solve(rhs);
      for (int k = 0; k < n; ++k)
        if (reduced[k] >= 0) theta[k] = red[reduced[k]];
    }
    return theta;
  }
};

Susceptance factorize(const Network& net, const SubGrid& grid, int slack) {
  Susceptance s;
  s.base_power = net.base_power;
  s.nodes = grid.nodes;
  std::sort(s.nodes.begin(), s.nodes.end());
  if (s.nodes.empty()) throw Error(ErrorCode::InvalidInput, "grid has no nodes");
  if (!std::binary_search(s.nodes.begin(), s.nodes.end(), slack))
    throw Error(ErrorCode::UnknownNode, "slack node " + std::to_string(slack) + " is not in the grid");
  const std::set<int> members(s.nodes.begin(), s.nodes.end());
  for (const auto& id : grid.lines) {
    const Line& l = net.line(id);
    if (!members.count(l.from) || !members.count(l.to)) continue;
    if (!(l.reactance > 0.0)) throw Error(ErrorCode::ZeroReactance, "line " + l.id + " has reactance <= 0");
    s.lines.push_back(&l);
  }

  const int n = static_cast<int>(s.nodes.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto* l : s.lines) {
    const int a = static_cast<int>(s.pos(l->from)), b = static_cast<int>(s.pos(l->to));
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> todo;
  s.slack_pos = static_cast<int>(s.pos(slack));
  todo.push(s.slack_pos);
  seen[s.slack_pos] = 1;
  int reached = 1;
  while (!todo.empty()) {
    const int k = todo.front();
    todo.pop();
    for (int m : adj[k])
      if (!seen[m]) {
        seen[m] = 1;
        ++reached;
        todo.push(m);
      }
  }
  if (reached != n) throw Error(ErrorCode::DisconnectedGrid, "grid " + grid.operator_id + " is not connected");

  s.reduced.assign(n, -1);
  int next = 0;
  for (int k = 0; k < n; ++k)
    if (k != s.slack_pos) s.reduced[k] = next++;
  if (n == 1) return s;

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (const auto* l : s.lines) {
    const int a = s.reduced[s.pos(l->from)], c = s.reduced[s.pos(l->to)];
    const double y = s.susceptance(*l);
    if (a >= 0) b(a, a) += y;
    if (c >= 0) b(c, c) += y;
    if (a >= 0 && c >= 0) {
      b(a, c) -= y;
      b(c, a) -= y;
    }
  }
  s.ldlt.compute(b);
  const double scale = b.diagonal().cwiseAbs().maxCoeff();
  if (s.ldlt.info() != Eigen::Success || s.ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, scale))
    throw Error(ErrorCode::SingularSusceptance, "reduced susceptance matrix of " + grid.operator_id + " is singular");
  return s;
}

}  // namespace

PtdfMatrix compute_ptdf(const Network& net, const SubGrid& grid, int slack) {
  const Susceptance s = factorize(net, grid, slack);
  PtdfMatrix m;
  m.operator_id = grid.operator_id;
  m.slack = slack;
  m.nodes = s.nodes;
  for (const auto* l : s.lines) m.lines.push_back({l->id, l->from, l->to});
  const std::size_t n = s.nodes.size();
  m.entries.assign(s.lines.size() * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (static_cast<int>(k) == s.slack_pos) continue;
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    inj[static_cast<Eigen::Index>(k)] = 1.0;
    const Eigen::VectorXd theta = s.angles(inj);
    for (std::size_t li = 0; li < s.lines.size(); ++li) {
      const Line& l = *s.lines[li];
      m.entries[li * n + k] = s.susceptance(l) * (theta[s.pos(l.from)] - theta[s.pos(l.to)]);
    }
  }
  return m;
}

PtdfMatrix compute_system_ptdf(const Network& net) {
  std::vector<int> tso_nodes;
  for (const auto& n : net.nodes)
    if (net.operator_type_of(n.id) == OperatorType::TSO) tso_nodes.push_back(n.id);
  const SubGrid grid = combined_grid(net);
  const int slack = tso_nodes.empty() ? default_slack(grid) : *std::min_element(tso_nodes.begin(), tso_nodes.end());
  return compute_ptdf(net, grid, slack);
}

double import_sensitivity(const PtdfMatrix& ptdf, const InterfaceSubstation& sub, int node) {
  const std::size_t li = ptdf.line_pos(sub.line);
  const double sign = ptdf.lines[li].from == sub.tso_node ? 1.0 : -1.0;
  return sign * ptdf.at(li, ptdf.node_pos(node));
}

std::map<std::string, double> compute_impact_factors(const PtdfMatrix& ptdf,
                                                     const std::vector<InterfaceSubstation>& interfaces,
                                                     const std::vector<int>& dso_nodes, bool normalize) {
  if (dso_nodes.empty()) throw Error(ErrorCode::EmptyDsoNodeSet, "impact factors need at least one DSO node");
  std::map<std::string, double> out;
  double total = 0.0;
  for (const auto& sub : interfaces) {
    double sum = 0.0;
    // A withdrawal at a DSO node raises the import, hence the sign flip.
    for (int j : dso_nodes) sum -= import_sensitivity(ptdf, sub, j);
    const double mean = sum / static_cast<double>(dso_nodes.size());
    out[sub.id] = mean;
    total += mean;
  }
  if (normalize && !out.empty()) {
    if (std::abs(total) < 1e-12)
      throw Error(ErrorCode::SingularSusceptance, "impact factors sum to zero and cannot be normalized");
    for (auto& [id, v] : out) v /= total;
  }
  return out;
}

void assign_impact_factors(Network& net, bool normalize) {
  if (net.interfaces.empty()) return;
  const PtdfMatrix ptdf = compute_system_ptdf(net);
  for (const auto& dso : net.dso_ids()) {
    std::vector<InterfaceSubstation> subs;
    for (const auto* s : net.interfaces_of(dso)) subs.push_back(*s);
    if (subs.empty()) continue;
    std::vector<int> nodes;
    for (const auto& n : net.nodes)
      if (n.operator_id == dso) nodes.push_back(n.id);
    const auto impact = compute_impact_factors(ptdf, subs, nodes, normalize);
    for (auto& s : net.interfaces)
      if (impact.count(s.id)) s.impact = impact.at(s.id);
  }
}

double interface_flow_from_injections(const std::vector<double>& injections, const PtdfMatrix& ptdf,
                                      const InterfaceSubstation& sub) {
  if (injections.size() != ptdf.nodes.size())
    throw Error(ErrorCode::DimensionMismatch, "injection vector has " + std::to_string(injections.size()) +
                                                  " entries, PTDF has " + std::to_string(ptdf.nodes.size()) + " nodes");
  double flow = 0.0;
  for (std::size_t k = 0; k < injections.size(); ++k)
    flow += import_sensitivity(ptdf, sub, ptdf.nodes[k]) * injections[k];
  return flow;
}

DcSnapshot dc_power_flow(const Network& net, const SubGrid& grid, int slack, const std::vector<double>& injections) {
  const Susceptance s = factorize(net, grid, slack);
  if (injections.size() != s.nodes.size())
    throw Error(ErrorCode::DimensionMismatch, "injection vector length differs from the grid's node count");
  std::vector<double> ordered(s.nodes.size());
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) ordered[s.pos(grid.nodes[k])] = injections[k];
  const Eigen::VectorXd theta = s.angles(Eigen::Map<const Eigen::VectorXd>(ordered.data(), ordered.size()));
  DcSnapshot out;
  out.nodes = grid.nodes;
  for (int id : grid.nodes) out.theta.push_back(theta[static_cast<Eigen::Index>(s.pos(id))]);
  for (const auto* l : s.lines) {
    out.lines.push_back(l->id);
    out.flow.push_back(flow_from_angles(*l, theta[s.pos(l->from)], theta[s.pos(l->to)], net.base_power));
  }
  return out;
}

void write_ptdf_csv(const PtdfMatrix& ptdf, std::ostream& out) {
  out << "line";
  for (int n : ptdf.nodes) out << ',' << n;
  out << '\n';
  out << std::setprecision(12);
  for (std::size_t li = 0; li < ptdf.lines.size(); ++li) {
    out << ptdf.lines[li].id;
    for (std::size_t k = 0; k < ptdf.nodes.size(); ++k) out << ',' << ptdf.at(li, k);
    out << '\n';
  }
}

}  // namespace gridflex
