#include <algorithm>
#include <chrono>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <queue>

#include "gridflex/error.hpp"
#include "gridflex/mpbuilder.hpp"
#include "lp_simplex.hpp"

namespace gridflex::mp {
namespace {

using detail::LpStatus;
using Clock = std::chrono::steady_clock;

constexpr double kIntTol = 1e-6;

struct Node {
  std::vector<std::pair<std::uint32_t, double>> fixes;
  double bound = -kInf;
  int depth = 0;
  std::size_t id = 0;
  std::shared_ptr<const detail::WarmBasis> basis;
  int branched = -1;  // variable fixed last, for pseudocost updates
  double moved = 0.0; // distance the parent's LP value moved to reach the fix
};

// Objective gain per unit change of a binary, learned from solved children.
class Pseudocosts {
 public:
  explicit Pseudocosts(std::size_t n) : sum_(n, {0.0, 0.0}), count_(n, {0, 0}) {}

  void record(int var, bool up, double moved, double gain) {
    if (moved < 1e-9) return;
    sum_[var][up] += std::max(gain, 0.0) / moved;
    ++count_[var][up];
    total_[up] += std::max(gain, 0.0) / moved;
    ++seen_[up];
  }

  double score(int var, double x) const {
    const double frac_down = x - std::floor(x), frac_up = 1.0 - frac_down;
    const double down = estimate(var, false) * frac_down, up = estimate(var, true) * frac_up;
    return std::max(down, 1e-6) * std::max(up, 1e-6);
  }

 private:
  double estimate(int var, bool up) const {
    if (count_[var][up] > 0) return sum_[var][up] / count_[var][up];
    return seen_[up] > 0 ? total_[up] / seen_[up] : 1.0;
  }

  std::vector<std::array<double, 2>> sum_;
  std::vector<std::array<int, 2>> count_;
  std::array<double, 2> total_{0.0, 0.0};
  std::array<int, 2> seen_{0, 0};
};

// Best bound first; among equal bounds the deeper node, then the older one.
struct Worse {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

void check_well_formed(const MathProgram& prog) {
  const auto issues = prog.validate();
  if (!issues.empty()) throw Error(ErrorCode::IllFormedProgram, issues.front());
}

class BranchAndBound {
 public:
  BranchAndBound(const MathProgram& prog, const SolverOptions& opts)
      : prog_(prog), opts_(opts), lp_(detail::build_lp(prog)), pseudo_(prog.num_variables()) {
    deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opts.time_limit_s));
    for (const auto& v : prog.variables()) {
      root_lower_.push_back(v.lower);
      root_upper_.push_back(v.upper);
    }
    for (std::uint32_t j = 0; j < prog.num_variables(); ++j)
      if (prog.variables()[j].kind == VarKind::Binary) binaries_.push_back(j);
  }

  Solution run() {
    Solution out;
    std::priority_queue<Node, std::vector<Node>, Worse> open;
    open.push(Node{});
    bool timed_out = false;
    double best_open_bound = -kInf;

    while (!open.empty()) {
      if (have_incumbent_ && gap_closed(open.top().bound)) break;
      if (Clock::now() > deadline_ || nodes_ >= opts_.max_nodes) {
        timed_out = true;
        break;
      }
      Node node = open.top();
      open.pop();
      if (have_incumbent_ && node.bound >= incumbent_obj_ - abs_gap()) continue;

      std::vector<double> lo = root_lower_, up = root_upper_;
      for (const auto& [j, v] : node.fixes) lo[j] = up[j] = v;
      ++nodes_;
      const auto lp = solve_node(lo, up, node.basis.get());
      if (lp.status == LpStatus::TimeLimit) {
        timed_out = true;
        open.push(node);
        break;
      }
      if (lp.status == LpStatus::Unbounded && node.depth == 0) {
        out.status = SolveStatus::Unbounded;
        out.nodes = nodes_;
        out.lp_iterations = lp_iterations_;
        return out;
      }
      if (lp.status != LpStatus::Optimal) {
        if (lp.status == LpStatus::NumericalFailure || lp.status == LpStatus::IterationLimit)
          throw Error(ErrorCode::SolverFailure, "LP relaxation failed in branch-and-bound");
        continue;
      }
      const double obj = lp.objective + prog_.objective_offset();
      if (node.branched >= 0) pseudo_.record(node.branched, node.fixes.back().second > 0.5, node.moved, obj - node.bound);
      if (have_incumbent_ && obj >= incumbent_obj_ - abs_gap()) continue;

      int branch = -1;
      double most = 0.0;
      for (std::uint32_t j : binaries_) {
        const double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
        if (frac <= kIntTol) continue;
        const double sc = pseudo_.score(static_cast<int>(j), lp.x[j]);
        if (sc > most * (1.0 + 1e-12) || branch < 0) {
          most = sc;
          branch = static_cast<int>(j);
        }
      }
      if (branch < 0) {
        offer_integral(lp.x, lp.basis.get());
        continue;
      }
      try_rounding(lp.x);
      if (!have_incumbent_ && (node.depth == 0 || node.depth % 8 == 0)) fix_and_resolve(lp.x, lp.basis.get());

      const double xb = lp.x[static_cast<std::size_t>(branch)];
      Node upc{node.fixes, obj, node.depth + 1, next_id_++, lp.basis, branch, 1.0 - xb};
      upc.fixes.emplace_back(static_cast<std::uint32_t>(branch), 1.0);
      Node downc{node.fixes, obj, node.depth + 1, next_id_++, lp.basis, branch, xb};
      downc.fixes.emplace_back(static_cast<std::uint32_t>(branch), 0.0);
      open.push(std::move(upc));
      open.push(std::move(downc));
    }
    best_open_bound = open.empty() ? incumbent_obj_ : std::min(open.top().bound, incumbent_obj_);

    out.nodes = nodes_;
    if (!have_incumbent_) {
      out.lp_iterations = lp_iterations_;
      if (timed_out) throw Error(ErrorCode::TimeLimitExceeded, "no incumbent found before the limit");
      out.status = SolveStatus::Infeasible;
      return out;
    }
    polish();
    out.values = incumbent_;
    out.objective = incumbent_obj_;
    out.mip_gap = (incumbent_obj_ - best_open_bound) / std::max(1.0, std::abs(incumbent_obj_));
    if (out.mip_gap < 0.0) out.mip_gap = 0.0;
    out.status = (timed_out && out.mip_gap > opts_.mip_gap) ? SolveStatus::GapLimit : SolveStatus::Optimal;
    out.lp_iterations = lp_iterations_;
    return out;
  }

 private:
  double abs_gap() const { return opts_.mip_gap * std::max(1.0, std::abs(incumbent_obj_)); }
  bool gap_closed(double bound) const { return bound >= incumbent_obj_ - abs_gap(); }

  detail::LpResult solve_node(const std::vector<double>& lo, const std::vector<double>& up,
                              const detail::WarmBasis* warm = nullptr) {
    detail::LpControl ctl;
    ctl.deadline = deadline_;
    auto r = detail::solve_lp(lp_, lo, up, ctl, warm);
    lp_iterations_ += r.iterations;
    return r;
  }

  void offer(std::vector<double> x, bool from_lp) {
    for (std::uint32_t j : binaries_) x[j] = std::round(x[j]);
    if (!from_lp && prog_.max_violation(x) > opts_.feas_tol) return;
    const double obj = prog_.evaluate_objective(x);
    if (!have_incumbent_ || obj < incumbent_obj_ - 1e-12) {
      incumbent_ = std::move(x);
      incumbent_obj_ = obj;
      have_incumbent_ = true;
    }
  }

  // An LP point with binaries integral only within tolerance can leak through
  // q <= cap * u rows; such points are replaced by the fixed-binary optimum.
  void offer_integral(const std::vector<double>& x, const detail::WarmBasis* warm) {
    std::vector<double> rounded = x;
    for (std::uint32_t j : binaries_) rounded[j] = std::round(x[j]);
    if (prog_.max_violation(rounded) <= opts_.feas_tol) {
      offer(std::move(rounded), true);
      return;
    }
    std::vector<double> lo = root_lower_, up = root_upper_;
    for (std::uint32_t j : binaries_) lo[j] = up[j] = rounded[j];
    const auto r = solve_node(lo, up, warm);
    if (r.status == LpStatus::Optimal) offer(r.x, true);
  }

  // Cheap check: do rounded binaries keep the LP point feasible?
  void try_rounding(const std::vector<double>& x) {
    std::vector<double> up = x, near = x;
    for (std::uint32_t j : binaries_) {
      up[j] = x[j] > kIntTol ? 1.0 : 0.0;
      near[j] = std::round(x[j]);
    }
    offer(std::move(up), false);
    offer(std::move(near), false);
  }

  void fix_and_resolve(const std::vector<double>& x, const detail::WarmBasis* warm) {
    for (int variant = 0; variant < 2; ++variant) {
      std::vector<double> lo = root_lower_, up = root_upper_;
      for (std::uint32_t j : binaries_) {
        const double v = variant == 0 ? (x[j] > kIntTol ? 1.0 : 0.0) : std::round(x[j]);
        lo[j] = up[j] = v;
      }
      const auto r = solve_node(lo, up, warm);
      if (r.status == LpStatus::Optimal) {
        offer(r.x, true);
        return;
      }
    }
  }

  // Re-solve the incumbent's continuous part at a clean vertex.
  void polish() {
    std::vector<double> lo = root_lower_, up = root_upper_;
    for (std::uint32_t j : binaries_) lo[j] = up[j] = std::round(incumbent_[j]);
    const auto r = solve_node(lo, up);
    if (r.status != LpStatus::Optimal) return;
    incumbent_ = r.x;
    for (std::uint32_t j : binaries_) incumbent_[j] = std::round(incumbent_[j]);
    incumbent_obj_ = prog_.evaluate_objective(incumbent_);
  }

  const MathProgram& prog_;
  SolverOptions opts_;
  detail::LpData lp_;
  Pseudocosts pseudo_;
  Clock::time_point deadline_;
  std::vector<double> root_lower_, root_upper_;
  std::vector<std::uint32_t> binaries_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  bool have_incumbent_ = false;
  std::size_t nodes_ = 0;
  std::size_t next_id_ = 1;
  std::size_t lp_iterations_ = 0;
};

Solution solve_continuous(const MathProgram& prog, const std::vector<double>& lower,
                          const std::vector<double>& upper, const SolverOptions& opts) {
  const auto lp = detail::build_lp(prog);
  detail::LpControl ctl;
  ctl.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(opts.time_limit_s));
  const auto r = detail::solve_lp(lp, lower, upper, ctl);
  Solution out;
  out.lp_iterations = r.iterations;
  switch (r.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Infeasible: out.status = SolveStatus::Infeasible; return out;
    case LpStatus::Unbounded: out.status = SolveStatus::Unbounded; return out;
    case LpStatus::TimeLimit: throw Error(ErrorCode::TimeLimitExceeded, "LP time limit");
    default: throw Error(ErrorCode::SolverFailure, "LP solve failed");
  }
  out.status = SolveStatus::Optimal;
  out.values = r.x;
  out.objective = r.objective + prog.objective_offset();
  out.duals = r.duals;
  out.has_duals = true;
  out.dual_objective = r.dual_objective + prog.objective_offset();
  return out;
}

struct Block {
  std::vector<std::uint32_t> vars, rows;
};

// Groups variables linked through shared rows. Every continuous block and
// term-free row is merged into the first block; blocks holding binaries
// follow, one each.
std::vector<Block> independent_blocks(const MathProgram& prog) {
  const auto n = static_cast<std::uint32_t>(prog.num_variables());
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& row : prog.constraints())
    for (std::size_t k = 1; k < row.terms.size(); ++k) {
      const auto a = find(row.terms[0].var.index), b = find(row.terms[k].var.index);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<int> has_binary(n, 0);
  for (std::uint32_t j = 0; j < n; ++j)
    if (prog.variables()[j].kind == VarKind::Binary) has_binary[find(j)] = 1;
  std::vector<int> block_of_root(n, -1);
  std::vector<Block> blocks(1);
  const int rest = 0;
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto r = find(j);
    if (has_binary[r] && block_of_root[r] < 0) {
      block_of_root[r] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
  }
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto r = find(j);
    blocks[static_cast<std::size_t>(has_binary[r] ? block_of_root[r] : rest)].vars.push_back(j);
  }
  for (std::uint32_t i = 0; i < prog.num_constraints(); ++i) {
    const auto& row = prog.constraints()[i];
    const int b = row.terms.empty() ? rest : [&] {
      const auto r = find(row.terms[0].var.index);
      return has_binary[r] ? block_of_root[r] : rest;
    }();
    blocks[static_cast<std::size_t>(b)].rows.push_back(i);
  }
  if (blocks.front().vars.empty() && blocks.front().rows.empty()) blocks.erase(blocks.begin());
  return blocks;
}

MathProgram extract_block(const MathProgram& prog, const Block& block, std::vector<std::uint32_t>& local) {
  MathProgram sub;
  for (const auto j : block.vars) {
    const auto& v = prog.variables()[j];
    const double c = prog.objective()[j];
    const VarId id = v.kind == VarKind::Binary ? sub.add_binary(v.name, c) : sub.add_continuous(v.name, v.lower, v.upper, c);
    if (v.kind == VarKind::Binary) sub.set_bounds(id, v.lower, v.upper);
    local[j] = id.index;
  }
  for (const auto i : block.rows) {
    const auto& row = prog.constraints()[i];
    std::vector<Term> terms;
    for (const auto& t : row.terms) terms.push_back({VarId{local[t.var.index]}, t.coef});
    sub.add_constraint(row.name, std::move(terms), row.sense, row.rhs);
  }
  return sub;
}

Solution solve_single(const MathProgram& prog, const SolverOptions& opts) {
  if (prog.num_binaries() == 0) {
    std::vector<double> lo, up;
    for (const auto& v : prog.variables()) {
      lo.push_back(v.lower);
      up.push_back(v.upper);
    }
    return solve_continuous(prog, lo, up, opts);
  }
  BranchAndBound bnb(prog, opts);
  return bnb.run();
}

// Solves each independent block on its own and stitches the solutions.
Solution solve_blocks(const MathProgram& prog, const std::vector<Block>& blocks, const SolverOptions& opts) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(opts.time_limit_s));
  Solution out;
  out.status = SolveStatus::Optimal;
  out.values.assign(prog.num_variables(), 0.0);
  double objective = prog.objective_offset(), bound = prog.objective_offset();
  std::vector<std::uint32_t> local(prog.num_variables(), 0);
  for (const auto& block : blocks) {
    const MathProgram sub = extract_block(prog, block, local);
    SolverOptions o = opts;
    o.time_limit_s = std::max(1e-3, std::chrono::duration<double>(deadline - Clock::now()).count());
    const Solution s = solve_single(sub, o);
    out.nodes += s.nodes;
    out.lp_iterations += s.lp_iterations;
    if (!s.ok()) {
      out.status = s.status;
      out.values.clear();
      return out;
    }
    if (s.status == SolveStatus::GapLimit) out.status = SolveStatus::GapLimit;
    for (const auto j : block.vars) out.values[j] = s.values[local[j]];
    objective += s.objective;
    bound += s.objective - s.mip_gap * std::max(1.0, std::abs(s.objective));
  }
  out.objective = objective;
  out.mip_gap = std::max(0.0, (objective - bound) / std::max(1.0, std::abs(objective)));
  return out;
}

}  // namespace

Solution solve(const MathProgram& prog, const SolverOptions& opts) {
  check_well_formed(prog);
  if (prog.num_binaries() == 0) return solve_single(prog, opts);
  const auto blocks = independent_blocks(prog);
  const std::size_t with_binaries = std::count_if(blocks.begin(), blocks.end(), [&](const Block& b) {
    return std::any_of(b.vars.begin(), b.vars.end(),
                       [&](std::uint32_t j) { return prog.variables()[j].kind == VarKind::Binary; });
  });
  if (with_binaries < 2) return solve_single(prog, opts);
  return solve_blocks(prog, blocks, opts);
}

Solution relax_and_duals(const MathProgram& prog, const std::map<VarId, int>& fixed_binaries,
                         const SolverOptions& opts) {
  check_well_formed(prog);
  std::vector<double> lo, up;
  for (std::uint32_t j = 0; j < prog.num_variables(); ++j) {
    const auto& v = prog.variables()[j];
    lo.push_back(v.lower);
    up.push_back(v.upper);
    if (v.kind != VarKind::Binary) continue;
    const auto it = fixed_binaries.find(VarId{j});
    if (it == fixed_binaries.end()) throw Error(ErrorCode::InvalidInput, "binary " + v.name + " is not fixed");
    if (it->second != 0 && it->second != 1)
      throw Error(ErrorCode::InvalidInput, "binary " + v.name + " fixed outside {0,1}");
    lo[j] = up[j] = it->second;
  }
  auto sol = solve_continuous(prog, lo, up, opts);
  if (sol.status == SolveStatus::Infeasible) throw Error(ErrorCode::InfeasibleFixing, "fixed program is infeasible");
  return sol;
}

Solution relax_and_duals(const MathProgram& prog, const Solution& mip, const SolverOptions& opts) {
  std::map<VarId, int> fixed;
  for (std::uint32_t j = 0; j < prog.num_variables(); ++j)
    if (prog.variables()[j].kind == VarKind::Binary)
      fixed[VarId{j}] = static_cast<int>(std::lround(mip.values.at(j)));
  return relax_and_duals(prog, fixed, opts);
}

}  // namespace gridflex::mp
