#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "gridflex/mpbuilder.hpp"

namespace gridflex::mp::detail {

/// Column-major, scaled copy of a MathProgram's continuous relaxation.
/// Scale factors are powers of two so scaling never perturbs data.
struct LpData {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> rhs;
  std::vector<RowSense> sense;
  std::vector<double> cost;
  std::vector<double> row_scale;  // scaled row = row_scale * original row
  std::vector<double> col_scale;  // original x = col_scale * scaled x
};

LpData build_lp(const MathProgram& prog);

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit, NumericalFailure };

struct LpControl {
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  std::size_t max_iterations = 0;  // 0 = automatic
};

/// Final basis of a solve, reusable as the starting point of a re-solve with
/// tightened bounds.
struct WarmBasis {
  std::vector<int> head;
  std::vector<std::uint8_t> state;
  std::vector<double> art_sign;
};

struct LpResult {
  LpStatus status = LpStatus::NumericalFailure;
  std::vector<double> x;      // original units
  std::vector<double> duals;  // original units
  double objective = 0.0;     // excludes the program's offset
  double dual_objective = 0.0;
  std::size_t iterations = 0;
  std::shared_ptr<const WarmBasis> basis;
};

/// Bounds are given in original (unscaled) units, one pair per column.
LpResult solve_lp(const LpData& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                  const LpControl& control = {}, const WarmBasis* warm = nullptr);

}  // namespace gridflex::mp::detail
