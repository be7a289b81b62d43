#pragma once

// Solver-agnostic mixed-integer linear programs and the bundled reference
// solver (bounded revised simplex under a best-bound branch-and-bound).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace gridflex::mp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct VarId {
  std::uint32_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

struct RowId {
  std::uint32_t index = 0;
  auto operator<=>(const RowId&) const = default;
};

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class RowSense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::Continuous;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// A minimisation program. Variables and rows are append-only; the objective
/// is a dense coefficient vector plus a constant offset.
class MathProgram {
 public:
  VarId add_continuous(std::string name, double lower, double upper, double cost = 0.0);
  VarId add_binary(std::string name, double cost = 0.0);
  RowId add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);

  void add_objective(VarId var, double coef);
  void add_objective_offset(double value) { offset_ += value; }
  void set_bounds(VarId var, double lower, double upper);

  const std::vector<Variable>& variables() const noexcept { return vars_; }
  const std::vector<Constraint>& constraints() const noexcept { return rows_; }
  const std::vector<double>& objective() const noexcept { return cost_; }
  double objective_offset() const noexcept { return offset_; }

  const Variable& variable(VarId v) const { return vars_.at(v.index); }
  const Constraint& constraint(RowId r) const { return rows_.at(r.index); }
  std::size_t num_variables() const noexcept { return vars_.size(); }
  std::size_t num_constraints() const noexcept { return rows_.size(); }
  std::size_t num_binaries() const noexcept;

  /// Empty when the program is well formed.
  std::vector<std::string> validate() const;

  /// Value of sum(coef * x) + offset for the given primal vector.
  double evaluate_objective(const std::vector<double>& values) const;
  /// Largest absolute bound or row violation of a primal vector.
  double max_violation(const std::vector<double>& values) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> cost_;
  double offset_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit };

std::string to_string(SolveStatus status);

struct SolverOptions {
  double feas_tol = 1e-6;
  double mip_gap = 1e-6;
  double time_limit_s = 60.0;
  std::size_t max_nodes = 500000;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  /// Row duals (sensitivity of the optimum to the rhs); only for continuous
  /// programs or fixed-integer relaxations.
  std::vector<double> duals;
  bool has_duals = false;
  /// b'y plus the bound terms of the reduced costs; equals `objective` at a
  /// dual-feasible optimal basis.
  double dual_objective = 0.0;
  double mip_gap = 0.0;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;

  bool ok() const noexcept {
    return status == SolveStatus::Optimal || status == SolveStatus::GapLimit;
  }
  double value(VarId v) const { return values.at(v.index); }
  double dual(RowId r) const { return duals.at(r.index); }
};

/// Solves the program. Continuous programs return duals. Throws
/// Error(IllFormedProgram) on malformed input and Error(TimeLimitExceeded)
/// when the time limit expires before any incumbent is found.
Solution solve(const MathProgram& prog, const SolverOptions& opts = {});

/// Fixes every binary to the given value and solves the remaining continuous
/// program, returning its duals. Throws Error(InfeasibleFixing) when the fixed
/// program is infeasible and Error(InvalidInput) when a binary is unassigned.
Solution relax_and_duals(const MathProgram& prog, const std::map<VarId, int>& fixed_binaries,
                         const SolverOptions& opts = {});

/// Convenience: fixes binaries to their rounded values in `mip`.
Solution relax_and_duals(const MathProgram& prog, const Solution& mip, const SolverOptions& opts = {});

/// CPLEX LP text format.
void write_lp_format(const MathProgram& prog, std::ostream& out);

}  // namespace gridflex::mp
