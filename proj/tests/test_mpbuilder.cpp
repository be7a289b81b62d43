#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gridflex/error.hpp"
#include "gridflex/mpbuilder.hpp"

using namespace gridflex;
using namespace gridflex::mp;

TEST(Solve, SingleVariableLp) {
  MathProgram p;
  auto x = p.add_continuous("x", -kInf, kInf, 1.0);
  p.add_constraint("lo", {{x, 1.0}}, RowSense::GreaterEqual, 3.0);
  p.add_constraint("hi", {{x, 1.0}}, RowSense::LessEqual, 10.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_EQ(s.value(x), 3.0);
  EXPECT_EQ(s.objective, 3.0);
  ASSERT_TRUE(s.has_duals);
  EXPECT_NEAR(s.duals[0], 1.0, 1e-12);
}

TEST(Solve, KnapsackAsMinimisation) {
  MathProgram p;
  auto a = p.add_binary("a", -3.0);
  auto b = p.add_binary("b", -2.0);
  p.add_constraint("cap", {{a, 1.0}, {b, 1.0}}, RowSense::LessEqual, 1.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_EQ(s.value(a), 1.0);
  EXPECT_EQ(s.value(b), 0.0);
  EXPECT_DOUBLE_EQ(s.objective, -3.0);
}

TEST(Solve, MeritOrderDual) {
  MathProgram p;
  auto g1 = p.add_continuous("g1", 0, 50, 10.0);
  auto g2 = p.add_continuous("g2", 0, 50, 20.0);
  auto bal = p.add_constraint("balance", {{g1, 1}, {g2, 1}}, RowSense::Equal, 60.0);
  auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_EQ(s.value(g1), 50.0);
  EXPECT_EQ(s.value(g2), 10.0);
  EXPECT_NEAR(s.dual(bal), 20.0, 1e-9);
  EXPECT_NEAR(s.objective, 700.0, 1e-9);
}

TEST(Solve, InfeasibleAndUnbounded) {
  MathProgram p;
  auto x = p.add_continuous("x", 0, 5);
  p.add_constraint("c", {{x, 1}}, RowSense::GreaterEqual, 6);
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);

  MathProgram q;
  auto y = q.add_continuous("y", 0, kInf, -1.0);
  auto z = q.add_continuous("z", 0, kInf);
  q.add_constraint("c", {{y, 1}, {z, -1}}, RowSense::LessEqual, 2);
  EXPECT_EQ(solve(q).status, SolveStatus::Unbounded);
}

TEST(Solve, IllFormedProgramThrows) {
  MathProgram p;
  p.add_continuous("x", 2, 1);
  try {
    solve(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllFormedProgram);
  }
  MathProgram q;
  q.add_continuous("x", 0, 1);
  q.add_constraint("bad", {{VarId{7}, 1.0}}, RowSense::LessEqual, 1);
  EXPECT_THROW(solve(q), Error);
}

TEST(RelaxAndDuals, NoBinariesMatchesSolve) {
  MathProgram p;
  auto g1 = p.add_continuous("g1", 0, 50, 10.0);
  auto g2 = p.add_continuous("g2", 0, 50, 20.0);
  p.add_constraint("balance", {{g1, 1}, {g2, 1}}, RowSense::Equal, 60.0);
  auto a = solve(p);
  auto b = relax_and_duals(p, std::map<VarId, int>{});
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.duals, b.duals);
}

TEST(RelaxAndDuals, CommittedUnitSetsPrice) {
  // Unit 1 (bid 10, 40 MW), unit 2 (bid 30, 40 MW, min 10 MW when on), demand 55.
  MathProgram p;
  auto q1 = p.add_continuous("q1", 0, 40, 10.0);
  auto q2 = p.add_continuous("q2", 0, 40, 30.0);
  auto u2 = p.add_binary("u2", 100.0);
  auto bal = p.add_constraint("bal", {{q1, 1}, {q2, 1}}, RowSense::Equal, 55);
  p.add_constraint("cap2", {{q2, 1}, {u2, -40}}, RowSense::LessEqual, 0);
  p.add_constraint("min2", {{q2, 1}, {u2, -10}}, RowSense::GreaterEqual, 0);
  auto mip = solve(p);
  ASSERT_EQ(mip.status, SolveStatus::Optimal);
  EXPECT_EQ(mip.value(u2), 1.0);
  auto fixed = relax_and_duals(p, mip);
  // Marginal unit is unit 2 at 15 MW.
  EXPECT_NEAR(fixed.dual(bal), 30.0, 1e-9);
  EXPECT_NEAR(fixed.objective, mip.objective, 1e-9);
}

TEST(RelaxAndDuals, InfeasibleFixingThrows) {
  MathProgram p;
  auto q = p.add_continuous("q", 0, 40, 1.0);
  auto u = p.add_binary("u");
  p.add_constraint("cap", {{q, 1}, {u, -40}}, RowSense::LessEqual, 0);
  p.add_constraint("dem", {{q, 1}}, RowSense::Equal, 20);
  try {
    relax_and_duals(p, std::map<VarId, int>{{u, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleFixing);
  }
  EXPECT_THROW(relax_and_duals(p, std::map<VarId, int>{}), Error);
}

namespace {

// Random MILP built around a random point so most instances are feasible;
// equality rows and a shifted rhs keep some of them infeasible.
MathProgram random_milp(std::mt19937_64& rng, int n_cont, int n_bin, int n_rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0), cost(-4.0, 6.0), ub(1.0, 10.0), unit(0.0, 1.0);
  std::bernoulli_distribution dense(0.5), coin(0.5);
  MathProgram p;
  std::vector<VarId> vars;
  std::vector<double> point;
  for (int j = 0; j < n_cont; ++j) {
    const double u = ub(rng);
    vars.push_back(p.add_continuous("x" + std::to_string(j), 0, u, cost(rng)));
    point.push_back(u * unit(rng));
  }
  for (int j = 0; j < n_bin; ++j) {
    vars.push_back(p.add_binary("b" + std::to_string(j), cost(rng)));
    point.push_back(coin(rng) ? 1.0 : 0.0);
  }
  for (int r = 0; r < n_rows; ++r) {
    std::vector<Term> terms;
    double at_point = 0.0;
    for (std::size_t k = 0; k < vars.size(); ++k)
      if (dense(rng)) {
        const double a = std::round(coef(rng) * 4) / 4;
        terms.push_back({vars[k], a});
        at_point += a * point[k];
      }
    std::uniform_int_distribution<int> sense(0, 5);
    const int s = sense(rng);
    const double shift = std::round(unit(rng) * 3);
    if (s == 0) {
      p.add_constraint("r" + std::to_string(r), std::move(terms), RowSense::Equal, std::round(at_point));
    } else if (s < 3) {
      p.add_constraint("r" + std::to_string(r), std::move(terms), RowSense::LessEqual, std::round(at_point) + shift - 1);
    } else {
      p.add_constraint("r" + std::to_string(r), std::move(terms), RowSense::GreaterEqual, std::round(at_point) - shift + 1);
    }
  }
  return p;
}

// Oracle: enumerate binary assignments, solve each continuous remainder.
std::optional<double> enumerate_optimum(const MathProgram& p) {
  std::vector<std::uint32_t> bins;
  for (std::uint32_t j = 0; j < p.num_variables(); ++j)
    if (p.variables()[j].kind == VarKind::Binary) bins.push_back(j);
  std::optional<double> best;
  for (std::uint64_t mask = 0; mask < (1ULL << bins.size()); ++mask) {
    MathProgram q;
    for (std::uint32_t j = 0; j < p.num_variables(); ++j) {
      const auto& v = p.variables()[j];
      q.add_continuous(v.name, v.lower, v.upper, p.objective()[j]);
    }
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double val = (mask >> k) & 1ULL;
      q.set_bounds(VarId{bins[k]}, val, val);
    }
    for (const auto& row : p.constraints()) q.add_constraint(row.name, row.terms, row.sense, row.rhs);
    const auto s = solve(q);
    if (s.status == SolveStatus::Optimal && (!best || s.objective < *best)) best = s.objective;
  }
  return best;
}

}  // namespace

TEST(Solve, MatchesEnumerationOnSmallMilps) {
  std::mt19937_64 rng(20240601);
  int feasible = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n_bin = 2 + trial % 9;
    auto p = random_milp(rng, 4, n_bin, 5);
    const auto oracle = enumerate_optimum(p);
    const auto s = solve(p);
    if (!oracle) {
      EXPECT_EQ(s.status, SolveStatus::Infeasible) << "trial " << trial;
      continue;
    }
    ++feasible;
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, *oracle, 1e-6) << "trial " << trial;
    EXPECT_LE(p.max_violation(s.values), 1e-6);
  }
  EXPECT_GT(feasible, 10);
  EXPECT_LT(feasible, 40);
}

TEST(Solve, FourteenBinaryEnumeration) {
  std::mt19937_64 rng(77);
  auto p = random_milp(rng, 3, 14, 4);
  const auto oracle = enumerate_optimum(p);
  const auto s = solve(p);
  ASSERT_TRUE(oracle.has_value());
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, *oracle, 1e-6);
}

TEST(Solve, WeakDualityOnRandomLps) {
  std::mt19937_64 rng(99);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_milp(rng, 8, 0, 6);
    const auto s = solve(p);
    if (s.status != SolveStatus::Optimal) continue;
    ++solved;
    EXPECT_LE(s.dual_objective, s.objective + 1e-6);
    EXPECT_NEAR(s.dual_objective, s.objective, 1e-6);
    EXPECT_LE(p.max_violation(s.values), 1e-6);
  }
  EXPECT_GT(solved, 20);
}

TEST(Solve, DeterministicAcrossRuns) {
  std::mt19937_64 rng(5);
  auto p = random_milp(rng, 6, 10, 6);
  const auto a = solve(p);
  const auto b = solve(p);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.objective, b.objective);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t j = 0; j < a.values.size(); ++j) EXPECT_NEAR(a.values[j], b.values[j], 1e-9);
}

TEST(Solve, DegenerateTransportationProblem) {
  // Highly degenerate assignment LP; exercises the anti-cycling fallback.
  const int n = 8;
  MathProgram p;
  std::vector<std::vector<VarId>> x(n, std::vector<VarId>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x[i][j] = p.add_continuous("x", 0, kInf, ((i * 7 + j * 3) % 5) + 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<Term> row, col;
    for (int j = 0; j < n; ++j) {
      row.push_back({x[i][j], 1});
      col.push_back({x[j][i], 1});
    }
    p.add_constraint("row", row, RowSense::Equal, 1);
    p.add_constraint("col", col, RowSense::Equal, 1);
  }
  const auto s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, n * 1.0, 1e-9);
}

TEST(LpFormat, WritesSections) {
  MathProgram p;
  auto x = p.add_continuous("x", 0, 4, 2.0);
  auto b = p.add_binary("on[1]", 1.0);
  auto f = p.add_continuous("free", -kInf, kInf);
  p.add_constraint("link", {{x, 1}, {b, -4}, {f, 1}}, RowSense::LessEqual, 0);
  std::ostringstream os;
  write_lp_format(p, os);
  const std::string txt = os.str();
  EXPECT_NE(txt.find("Minimize"), std::string::npos);
  EXPECT_NE(txt.find("link: + 1 x - 4 on_1_ + 1 free <= 0"), std::string::npos);
  EXPECT_NE(txt.find("free free"), std::string::npos);
  EXPECT_NE(txt.find("Binaries\n on_1_"), std::string::npos);
  EXPECT_NE(txt.find("End"), std::string::npos);
}
