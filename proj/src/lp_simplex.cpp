#include "lp_simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace gridflex::mp::detail {
namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kHarrisTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr int kRefactorInterval = 100;
constexpr int kBlandTrigger = 60;

double pow2_near(double v) { return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(v)))); }

// Alternating geometric row/column equilibration.
void compute_scaling(LpData& lp) {
  lp.row_scale.assign(lp.rows, 1.0);
  lp.col_scale.assign(lp.cols, 1.0);
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<double> rmin(lp.rows, kInf), rmax(lp.rows, 0.0);
    for (int j = 0; j < lp.cols; ++j) {
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a = std::abs(lp.value[k]) * lp.row_scale[lp.row_index[k]] * lp.col_scale[j];
        rmin[lp.row_index[k]] = std::min(rmin[lp.row_index[k]], a);
        rmax[lp.row_index[k]] = std::max(rmax[lp.row_index[k]], a);
      }
    }
    for (int r = 0; r < lp.rows; ++r)
      if (rmax[r] > 0.0) lp.row_scale[r] /= pow2_near(std::sqrt(rmin[r] * rmax[r]));
    for (int j = 0; j < lp.cols; ++j) {
      double cmin = kInf, cmax = 0.0;
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a = std::abs(lp.value[k]) * lp.row_scale[lp.row_index[k]] * lp.col_scale[j];
        cmin = std::min(cmin, a);
        cmax = std::max(cmax, a);
      }
      if (cmax > 0.0) lp.col_scale[j] /= pow2_near(std::sqrt(cmin * cmax));
    }
  }
}

enum class NbState : std::uint8_t { Basic, AtLower, AtUpper, Free, Fixed };

struct Eta {
  int pos;
  double pivot;
  std::vector<std::pair<int, double>> entries;  // off-pivot entries of the entering column
};

class RevisedSimplex {
 public:
  RevisedSimplex(const LpData& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                 const LpControl& control)
      : lp_(lp), m_(lp.rows), n_(lp.cols), total_(lp.cols + 2 * lp.rows), control_(control) {
    lb_.assign(total_, 0.0);
    ub_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    state_.assign(total_, NbState::Fixed);
    pos_.assign(total_, -1);
    art_sign_.assign(m_, 1.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = lower[j] / lp.col_scale[j];
      ub_[j] = upper[j] / lp.col_scale[j];
    }
    for (int r = 0; r < m_; ++r) {
      const int s = n_ + r;
      switch (lp.sense[r]) {
        case RowSense::LessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
        case RowSense::GreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case RowSense::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
      }
    }
    max_iter_ = control.max_iterations ? control.max_iterations
                                       : static_cast<std::size_t>(50) * (m_ + n_) + 20000;
  }

  LpResult run(const WarmBasis* warm) {
    LpResult result;
    std::vector<double> c2(total_, 0.0);
    for (int j = 0; j < n_; ++j) c2[j] = lp_.cost[j] * lp_.col_scale[j];

    if (warm) {
      if (!load_basis(*warm)) {
        result.status = LpStatus::NumericalFailure;
        return result;
      }
      LpStatus s = dual_iterate(c2);
      if (s == LpStatus::Optimal) s = iterate(c2);
      result.iterations = iterations_;
      result.status = s;
      if (s != LpStatus::Optimal) return result;
      finish(result, c2);
      return result;
    }

    if (!initialize()) {
      result.status = LpStatus::NumericalFailure;
      return result;
    }
    bool need_phase1 = false;
    for (int r = 0; r < m_; ++r)
      if (pos_[n_ + m_ + r] >= 0) need_phase1 = true;

    if (need_phase1) {
      std::vector<double> c1(total_, 0.0);
      for (int r = 0; r < m_; ++r) c1[n_ + m_ + r] = 1.0;
      const LpStatus s1 = iterate(c1);
      if (s1 != LpStatus::Optimal) {
        result.status = s1;
        result.iterations = iterations_;
        return result;
      }
      double infeas = 0.0;
      for (int r = 0; r < m_; ++r) infeas += std::abs(x_[n_ + m_ + r]);
      double scale = 1.0;
      for (int r = 0; r < m_; ++r) scale = std::max(scale, std::abs(lp_.rhs[r]) * lp_.row_scale[r]);
      if (infeas > 1e-7 * scale) {
        result.status = LpStatus::Infeasible;
        result.iterations = iterations_;
        return result;
      }
    }
    // Phase 2: artificials are pinned at zero.
    for (int r = 0; r < m_; ++r) {
      const int a = n_ + m_ + r;
      lb_[a] = 0.0;
      ub_[a] = 0.0;
      if (pos_[a] < 0) {
        x_[a] = 0.0;
        state_[a] = NbState::Fixed;
      }
    }
    const LpStatus s2 = iterate(c2);
    result.iterations = iterations_;
    result.status = s2;
    if (s2 != LpStatus::Optimal) return result;
    finish(result, c2);
    return result;
  }

 private:
  void finish(LpResult& result, const std::vector<double>& c2) {
    if (!refactor()) {
      result.status = LpStatus::NumericalFailure;
      return;
    }
    compute_basic_values();
    std::vector<double> y = duals(c2);

    result.x.resize(n_);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) {
      double v = x_[j];
      if (v < lb_[j] && v > lb_[j] - kPrimalTol * std::max(1.0, std::abs(lb_[j]))) v = lb_[j];
      if (v > ub_[j] && v < ub_[j] + kPrimalTol * std::max(1.0, std::abs(ub_[j]))) v = ub_[j];
      result.x[j] = v * lp_.col_scale[j];
      obj += lp_.cost[j] * result.x[j];
    }
    result.objective = obj;
    result.duals.resize(m_);
    for (int r = 0; r < m_; ++r) result.duals[r] = y[r] * lp_.row_scale[r];

    // Lagrangian dual bound: b'y + sum_j min_{x_j in [l,u]} d_j x_j.
    double dual_obj = 0.0;
    for (int r = 0; r < m_; ++r) dual_obj += lp_.rhs[r] * lp_.row_scale[r] * y[r];
    for (int j = 0; j < n_ + m_; ++j) {
      const double d = c2[j] - column_dot(j, y);
      if (d > 0.0) {
        dual_obj += (lb_[j] == -kInf) ? (d > kDualTol ? -kInf : 0.0) : d * lb_[j];
      } else if (d < 0.0) {
        dual_obj += (ub_[j] == kInf) ? (d < -kDualTol ? -kInf : 0.0) : d * ub_[j];
      }
    }
    result.dual_objective = dual_obj;

    auto basis = std::make_shared<WarmBasis>();
    basis->head = head_;
    basis->state.reserve(total_);
    for (NbState st : state_) basis->state.push_back(static_cast<std::uint8_t>(st));
    basis->art_sign = art_sign_;
    result.basis = std::move(basis);
  }

  // Restores a previous optimal basis under (tightened) bounds; artificials stay pinned.
  bool load_basis(const WarmBasis& w) {
    if (static_cast<int>(w.head.size()) != m_ || static_cast<int>(w.state.size()) != total_) return false;
    art_sign_ = w.art_sign;
    head_ = w.head;
    for (int r = 0; r < m_; ++r) lb_[n_ + m_ + r] = ub_[n_ + m_ + r] = 0.0;
    for (int j = 0; j < total_; ++j) {
      state_[j] = static_cast<NbState>(w.state[j]);
      pos_[j] = -1;
    }
    for (int p = 0; p < m_; ++p) {
      pos_[head_[p]] = p;
      state_[head_[p]] = NbState::Basic;
    }
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == NbState::Basic) continue;
      const NbState prev = state_[j];
      if (lb_[j] == ub_[j]) {
        state_[j] = NbState::Fixed;
        x_[j] = lb_[j];
      } else if (prev == NbState::AtLower && lb_[j] > -kInf) {
        x_[j] = lb_[j];
      } else if (prev == NbState::AtUpper && ub_[j] < kInf) {
        x_[j] = ub_[j];
      } else {
        place_nonbasic(j);
      }
    }
    if (!refactor()) return false;
    compute_basic_values();
    return true;
  }

  // Dual simplex from a dual feasible basis until the basic values are within bounds.
  LpStatus dual_iterate(const std::vector<double>& cost) {
    Eigen::VectorXd rho(m_), alpha(m_);
    std::vector<double> row(total_, 0.0), red(total_, 0.0);
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::IterationLimit;
      if (out_of_time()) return LpStatus::TimeLimit;

      int leave = -1;
      double worst = 0.0;
      for (int p = 0; p < m_; ++p) {
        const int j = head_[p];
        const double tol = kFeasTol * std::max(1.0, std::max(std::abs(lb_[j] == -kInf ? 0.0 : lb_[j]),
                                                            std::abs(ub_[j] == kInf ? 0.0 : ub_[j])));
        double infeas = 0.0;
        if (x_[j] < lb_[j] - tol) infeas = lb_[j] - x_[j];
        else if (x_[j] > ub_[j] + tol) infeas = x_[j] - ub_[j];
        if (infeas > worst) {
          worst = infeas;
          leave = p;
        }
      }
      if (leave < 0) return LpStatus::Optimal;
      const int out = head_[leave];
      const bool to_lower = x_[out] < lb_[out];
      const double target = to_lower ? lb_[out] : ub_[out];
      const double s = to_lower ? -1.0 : 1.0;

      rho.setZero();
      rho[leave] = 1.0;
      btran(rho);
      const std::vector<double> y = duals(cost);

      // Harris two-pass ratio test on the reduced costs.
      double t_max = kInf;
      for (int j = 0; j < total_; ++j) {
        const NbState st = state_[j];
        if (st == NbState::Basic || st == NbState::Fixed) {
          row[j] = 0.0;
          continue;
        }
        double a = 0.0;
        for_column(j, [&](int r, double v) { a += v * rho[r]; });
        row[j] = a;
        const double sa = s * a;
        if (std::abs(a) < kPivotTol) continue;
        const double d = cost[j] - column_dot(j, y);
        red[j] = d;
        if (st == NbState::AtLower && sa > 0.0) t_max = std::min(t_max, (std::max(d, 0.0) + kDualTol) / sa);
        else if (st == NbState::AtUpper && sa < 0.0) t_max = std::min(t_max, (std::max(-d, 0.0) + kDualTol) / -sa);
        else if (st == NbState::Free) t_max = std::min(t_max, (std::abs(d) + kDualTol) / std::abs(a));
      }
      if (t_max == kInf) return worst > 1e-6 * std::max(1.0, std::abs(target)) ? LpStatus::Infeasible : LpStatus::NumericalFailure;
      int q = -1;
      double best_piv = 0.0;
      for (int j = 0; j < total_; ++j) {
        const NbState st = state_[j];
        if (st == NbState::Basic || st == NbState::Fixed) continue;
        const double a = row[j];
        const double sa = s * a;
        if (std::abs(a) < kPivotTol) continue;
        double ratio;
        if (st == NbState::AtLower && sa > 0.0) ratio = std::max(red[j], 0.0) / sa;
        else if (st == NbState::AtUpper && sa < 0.0) ratio = std::max(-red[j], 0.0) / -sa;
        else if (st == NbState::Free) ratio = std::abs(red[j]) / std::abs(a);
        else continue;
        if (ratio <= t_max && std::abs(a) > best_piv) {
          best_piv = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return LpStatus::NumericalFailure;

      alpha.setZero();
      for_column(q, [&](int r, double a) { alpha[r] = a; });
      ftran(alpha);
      if (std::abs(alpha[leave]) < kPivotTol) return LpStatus::NumericalFailure;
      ++iterations_;
      // Entering step t with x_B(t) = x_B - t * alpha lands the leaving variable on its bound.
      const double t = (x_[out] - target) / alpha[leave];
      x_[q] += t;
      for (int p = 0; p < m_; ++p)
        if (alpha[p] != 0.0) x_[head_[p]] -= t * alpha[p];
      x_[out] = target;
      pos_[out] = -1;
      state_[out] = (lb_[out] == ub_[out]) ? NbState::Fixed : (to_lower ? NbState::AtLower : NbState::AtUpper);
      head_[leave] = q;
      pos_[q] = leave;
      state_[q] = NbState::Basic;

      Eta eta{leave, alpha[leave], {}};
      for (int p = 0; p < m_; ++p)
        if (p != leave && alpha[p] != 0.0) eta.entries.emplace_back(p, alpha[p]);
      etas_.push_back(std::move(eta));
      if (static_cast<int>(etas_.size()) >= kRefactorInterval) {
        if (!refactor()) return LpStatus::NumericalFailure;
        compute_basic_values();
      }
    }
  }

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) f(lp_.row_index[k], lp_.value[k]);
    } else if (j < n_ + m_) {
      f(j - n_, 1.0);
    } else {
      f(j - n_ - m_, art_sign_[j - n_ - m_]);
    }
  }

  double column_dot(int j, const std::vector<double>& y) const {
    double s = 0.0;
    for_column(j, [&](int r, double a) { s += a * y[r]; });
    return s;
  }

  static double scaled_rhs(const LpData& lp, int r) { return lp.rhs[r] * lp.row_scale[r]; }

  void place_nonbasic(int j) {
    pos_[j] = -1;
    if (lb_[j] == ub_[j]) {
      state_[j] = NbState::Fixed;
      x_[j] = lb_[j];
    } else if (lb_[j] > -kInf) {
      state_[j] = NbState::AtLower;
      x_[j] = lb_[j];
    } else if (ub_[j] < kInf) {
      state_[j] = NbState::AtUpper;
      x_[j] = ub_[j];
    } else {
      state_[j] = NbState::Free;
      x_[j] = 0.0;
    }
  }

  // Slack basis; rows whose slack cannot absorb the residual get an artificial.
  bool initialize() {
    for (int j = 0; j < n_; ++j) place_nonbasic(j);
    std::vector<double> resid(m_);
    for (int r = 0; r < m_; ++r) resid[r] = scaled_rhs(lp_, r);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
        resid[lp_.row_index[k]] -= lp_.value[k] * x_[j];
    }
    head_.assign(m_, -1);
    for (int r = 0; r < m_; ++r) {
      const int s = n_ + r;
      const int a = n_ + m_ + r;
      const double v = resid[r];
      if (v >= lb_[s] - kPrimalTol && v <= ub_[s] + kPrimalTol) {
        head_[r] = s;
        pos_[s] = r;
        state_[s] = NbState::Basic;
        x_[s] = v;
        lb_[a] = ub_[a] = 0.0;
        x_[a] = 0.0;
        state_[a] = NbState::Fixed;
      } else {
        const double bound = v < lb_[s] ? lb_[s] : ub_[s];
        x_[s] = bound;
        state_[s] = (lb_[s] == ub_[s]) ? NbState::Fixed : (bound == lb_[s] ? NbState::AtLower : NbState::AtUpper);
        art_sign_[r] = (v - bound) >= 0.0 ? 1.0 : -1.0;
        lb_[a] = 0.0;
        ub_[a] = kInf;
        x_[a] = std::abs(v - bound);
        head_[r] = a;
        pos_[a] = r;
        state_[a] = NbState::Basic;
      }
    }
    return refactor();
  }

  bool refactor() {
    Eigen::SparseMatrix<double> basis(m_, m_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) for_column(head_[p], [&](int r, double a) { trip.emplace_back(r, p, a); });
    basis.setFromTriplets(trip.begin(), trip.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  void ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v).eval();
    for (const auto& e : etas_) {
      const double xp = v[e.pos] / e.pivot;
      if (xp != 0.0)
        for (const auto& [i, a] : e.entries) v[i] -= a * xp;
      v[e.pos] = xp;
    }
  }

  void btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos];
      for (const auto& [i, a] : it->entries) s -= a * v[i];
      v[it->pos] = s / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
  }

  void compute_basic_values() {
    Eigen::VectorXd rhs(m_);
    for (int r = 0; r < m_; ++r) rhs[r] = scaled_rhs(lp_, r);
    for (int j = 0; j < total_; ++j) {
      if (pos_[j] >= 0 || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](int r, double a) { rhs[r] -= a * xj; });
    }
    ftran(rhs);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    Eigen::VectorXd cb(m_);
    for (int p = 0; p < m_; ++p) cb[p] = cost[head_[p]];
    btran(cb);
    return std::vector<double>(cb.data(), cb.data() + m_);
  }

  bool out_of_time() const {
    return (iterations_ & 63) == 0 && std::chrono::steady_clock::now() > control_.deadline;
  }

  LpStatus iterate(const std::vector<double>& cost) {
    int degenerate_run = 0;
    bool bland = false;
    Eigen::VectorXd alpha(m_);
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::IterationLimit;
      if (out_of_time()) return LpStatus::TimeLimit;

      const std::vector<double> y = duals(cost);

      // Pricing.
      int q = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < total_; ++j) {
        const NbState st = state_[j];
        if (st == NbState::Basic || st == NbState::Fixed) continue;
        const double d = cost[j] - column_dot(j, y);
        int jdir = 0;
        if ((st == NbState::AtLower || st == NbState::Free) && d < -kDualTol) jdir = 1;
        else if ((st == NbState::AtUpper || st == NbState::Free) && d > kDualTol) jdir = -1;
        if (jdir == 0) continue;
        if (bland) {
          q = j;
          dir = jdir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = jdir;
        }
      }
      if (q < 0) return LpStatus::Optimal;

      alpha.setZero();
      for_column(q, [&](int r, double a) { alpha[r] = a; });
      ftran(alpha);

      // Harris two-pass ratio test; x_B(t) = x_B - dir * t * alpha.
      double t_relaxed = kInf;
      for (int p = 0; p < m_; ++p) {
        const double a = dir * alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const int j = head_[p];
        if (a > 0.0 && lb_[j] > -kInf) {
          t_relaxed = std::min(t_relaxed, (x_[j] - lb_[j] + kHarrisTol) / a);
        } else if (a < 0.0 && ub_[j] < kInf) {
          t_relaxed = std::min(t_relaxed, (ub_[j] - x_[j] + kHarrisTol) / (-a));
        }
      }
      const double flip = (lb_[q] > -kInf && ub_[q] < kInf) ? ub_[q] - lb_[q] : kInf;
      if (t_relaxed == kInf && flip == kInf) return LpStatus::Unbounded;

      ++iterations_;
      if (flip <= t_relaxed) {
        apply_step(q, dir, flip, alpha);
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
        state_[q] = dir > 0 ? NbState::AtUpper : NbState::AtLower;
        degenerate_run = 0;
        bland = false;
        continue;
      }

      int leave = -1;
      double t = 0.0;
      double best_piv = 0.0;
      for (int p = 0; p < m_; ++p) {
        const double a = dir * alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const int j = head_[p];
        double lim;
        if (a > 0.0 && lb_[j] > -kInf) lim = (x_[j] - lb_[j]) / a;
        else if (a < 0.0 && ub_[j] < kInf) lim = (ub_[j] - x_[j]) / (-a);
        else continue;
        if (lim > t_relaxed) continue;
        const bool better = bland ? (leave < 0 || lim < t - 1e-12 || (lim <= t + 1e-12 && j < head_[leave]))
                                  : std::abs(a) > best_piv;
        if (better) {
          leave = p;
          t = lim;
          best_piv = std::abs(a);
        }
      }
      if (leave < 0) return LpStatus::NumericalFailure;
      t = std::max(t, 0.0);

      if (t < 1e-12) {
        if (++degenerate_run > kBlandTrigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      apply_step(q, dir, t, alpha);
      const int out = head_[leave];
      const double a_out = dir * alpha[leave];
      x_[out] = (a_out > 0.0) ? lb_[out] : ub_[out];
      pos_[out] = -1;
      state_[out] = (lb_[out] == ub_[out]) ? NbState::Fixed : (a_out > 0.0 ? NbState::AtLower : NbState::AtUpper);
      head_[leave] = q;
      pos_[q] = leave;
      state_[q] = NbState::Basic;

      Eta eta{leave, alpha[leave], {}};
      for (int p = 0; p < m_; ++p)
        if (p != leave && alpha[p] != 0.0) eta.entries.emplace_back(p, alpha[p]);
      etas_.push_back(std::move(eta));

      if (static_cast<int>(etas_.size()) >= kRefactorInterval) {
        if (!refactor()) return LpStatus::NumericalFailure;
        compute_basic_values();
      }
    }
  }

  void apply_step(int q, int dir, double t, const Eigen::VectorXd& alpha) {
    if (t == 0.0) return;
    x_[q] += dir * t;
    for (int p = 0; p < m_; ++p)
      if (alpha[p] != 0.0) x_[head_[p]] -= dir * t * alpha[p];
  }

  const LpData& lp_;
  int m_, n_, total_;
  LpControl control_;
  std::size_t max_iter_ = 0;
  std::size_t iterations_ = 0;
  std::vector<double> lb_, ub_, x_, art_sign_;
  std::vector<NbState> state_;
  std::vector<int> pos_, head_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

}  // namespace

LpData build_lp(const MathProgram& prog) {
  LpData lp;
  lp.rows = static_cast<int>(prog.num_constraints());
  lp.cols = static_cast<int>(prog.num_variables());
  std::vector<std::map<int, double>> cols(lp.cols);
  for (int r = 0; r < lp.rows; ++r) {
    const auto& row = prog.constraints()[r];
    for (const auto& t : row.terms)
      if (t.coef != 0.0) cols[t.var.index][r] += t.coef;
    lp.rhs.push_back(row.rhs);
    lp.sense.push_back(row.sense);
  }
  lp.col_start.push_back(0);
  for (int j = 0; j < lp.cols; ++j) {
    for (const auto& [r, a] : cols[j]) {
      if (a == 0.0) continue;
      lp.row_index.push_back(r);
      lp.value.push_back(a);
    }
    lp.col_start.push_back(static_cast<int>(lp.row_index.size()));
  }
  lp.cost = prog.objective();
  compute_scaling(lp);
  for (int j = 0; j < lp.cols; ++j)
    for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k)
      lp.value[k] *= lp.row_scale[lp.row_index[k]] * lp.col_scale[j];
  return lp;
}

LpResult solve_lp(const LpData& lp, const std::vector<double>& lower, const std::vector<double>& upper,
                  const LpControl& control, const WarmBasis* warm) {
  for (int j = 0; j < lp.cols; ++j) {
    if (lower[j] > upper[j]) {
      LpResult r;
      r.status = LpStatus::Infeasible;
      return r;
    }
  }
  if (lp.rows == 0) {
    LpResult r;
    r.status = LpStatus::Optimal;
    r.x.resize(lp.cols);
    for (int j = 0; j < lp.cols; ++j) {
      const double c = lp.cost[j];
      double v = c > 0.0 ? lower[j] : (c < 0.0 ? upper[j] : std::clamp(0.0, lower[j], upper[j]));
      if (!std::isfinite(v)) {
        if (c != 0.0) {
          r.status = LpStatus::Unbounded;
          return r;
        }
        v = std::isfinite(lower[j]) ? lower[j] : upper[j];
      }
      r.x[j] = v;
      r.objective += c * v;
    }
    r.dual_objective = r.objective;
    return r;
  }
  if (warm) {
    RevisedSimplex simplex(lp, lower, upper, control);
    LpResult r = simplex.run(warm);
    if (r.status == LpStatus::Optimal || r.status == LpStatus::TimeLimit) return r;
    if (r.status == LpStatus::Infeasible) return r;
  }
  RevisedSimplex simplex(lp, lower, upper, control);
  return simplex.run(nullptr);
}

}  // namespace gridflex::mp::detail
