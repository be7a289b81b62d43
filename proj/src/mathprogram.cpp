#include <algorithm>
#include <cmath>

#include "gridflex/error.hpp"
#include "gridflex/mpbuilder.hpp"

namespace gridflex::mp {

VarId MathProgram::add_continuous(std::string name, double lower, double upper, double cost) {
  VarId id{static_cast<std::uint32_t>(vars_.size())};
  vars_.push_back({std::move(name), lower, upper, VarKind::Continuous});
  cost_.push_back(cost);
  return id;
}

VarId MathProgram::add_binary(std::string name, double cost) {
  VarId id{static_cast<std::uint32_t>(vars_.size())};
  vars_.push_back({std::move(name), 0.0, 1.0, VarKind::Binary});
  cost_.push_back(cost);
  return id;
}

RowId MathProgram::add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  RowId id{static_cast<std::uint32_t>(rows_.size())};
  rows_.push_back({std::move(name), std::move(terms), sense, rhs});
  return id;
}

void MathProgram::add_objective(VarId var, double coef) { cost_.at(var.index) += coef; }

void MathProgram::set_bounds(VarId var, double lower, double upper) {
  auto& v = vars_.at(var.index);
  v.lower = lower;
  v.upper = upper;
}

std::size_t MathProgram::num_binaries() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

std::vector<std::string> MathProgram::validate() const {
  std::vector<std::string> issues;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper)) issues.push_back("variable " + v.name + ": NaN bound");
    if (v.lower > v.upper) issues.push_back("variable " + v.name + ": lower > upper");
    if (v.lower == kInf || v.upper == -kInf) issues.push_back("variable " + v.name + ": empty bound range");
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0))
      issues.push_back("variable " + v.name + ": binary bounds outside [0,1]");
    if (!std::isfinite(cost_[j])) issues.push_back("variable " + v.name + ": non-finite cost");
  }
  for (const auto& row : rows_) {
    if (!std::isfinite(row.rhs)) issues.push_back("constraint " + row.name + ": non-finite rhs");
    for (const auto& t : row.terms) {
      if (t.var.index >= vars_.size()) {
        issues.push_back("constraint " + row.name + ": undeclared variable");
        break;
      }
      if (!std::isfinite(t.coef)) issues.push_back("constraint " + row.name + ": non-finite coefficient");
    }
  }
  return issues;
}

double MathProgram::evaluate_objective(const std::vector<double>& values) const {
  double total = offset_;
  for (std::size_t j = 0; j < cost_.size(); ++j) total += cost_[j] * values.at(j);
  return total;
}

double MathProgram::max_violation(const std::vector<double>& values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - values[j]);
    worst = std::max(worst, values[j] - vars_[j].upper);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * values[t.var.index];
    switch (row.sense) {
      case RowSense::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::GapLimit: return "GapLimit";
  }
  return "Unknown";
}

}  // namespace gridflex::mp
