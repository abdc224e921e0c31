#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

namespace asw {

struct LbfgsStepResult {
  Eigen::VectorXd x;               // next iterate (== input x on failure)
  double f = 0.0;                  // objective at x
  double step_length = 0.0;        // accepted line-search step
  bool line_search_failed = false;
  int evaluations = 0;             // objective evaluations spent in the line search
};

/// Bounded-memory quasi-Newton state for one optimization run.
///
/// Curvature pairs are formed from consecutive (x, grad) arguments passed to
/// step(), so any projection the caller applies between steps (clipping to
/// [0,1], say) is reflected in the pair. Pairs failing the positive curvature
/// test are skipped; two consecutive skips flush the history.
class LbfgsState {
public:
  explicit LbfgsState(int memory = 10) : memory_(memory) {
    if (memory < 1) throw std::invalid_argument("LbfgsState: memory must be >= 1");
  }

  int memory() const { return memory_; }
  int iteration() const { return iteration_; }
  size_t history_size() const { return pairs_.size(); }

  /// Empties the curvature history; the iteration counter is preserved.
  void reset() {
    pairs_.clear();
    have_prev_ = false;
    consecutive_skips_ = 0;
  }

  /// One L-BFGS iteration from (x, f(x), grad f(x)).
  ///
  /// The search direction comes from the standard two-loop recursion, with
  /// the pre-history direction scaled to unit infinity norm; the step length
  /// from Armijo backtracking (c1 = 1e-4, halving, at most 20 trials) with
  /// first trial `eta` on the very first iteration and 1.0 afterwards. On
  /// line-search exhaustion the input x is returned unchanged with
  /// line_search_failed set.
  LbfgsStepResult step(const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& grad,
                       const std::function<double(const Eigen::VectorXd&)>& objective,
                       double eta) {
    if (grad.size() != x.size())
      throw std::invalid_argument("lbfgs_step: grad/x size mismatch");
    if (!std::isfinite(fx)) throw std::invalid_argument("lbfgs_step: non-finite objective");

    // Fold the movement since the previous call into a curvature pair.
    if (have_prev_) {
      Eigen::VectorXd s = x - prev_x_;
      Eigen::VectorXd y = grad - prev_grad_;
      const double sy = s.dot(y);
      if (sy > kCurvatureFloor) {
        if (static_cast<int>(pairs_.size()) == memory_) pairs_.pop_front();
        pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
        consecutive_skips_ = 0;
      } else if (++consecutive_skips_ >= 2) {
        pairs_.clear();
        consecutive_skips_ = 0;
      }
    }
    prev_x_ = x;
    prev_grad_ = grad;
    have_prev_ = true;

    LbfgsStepResult out;
    out.x = x;
    out.f = fx;

    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      ++iteration_;
      return out;  // stationary point
    }

    // Two-loop recursion for d = -H * grad.
    Eigen::VectorXd d = -grad;
    const size_t m = pairs_.size();
    std::vector<double> alpha(m);
    for (size_t i = m; i-- > 0;) {
      const auto& p = pairs_[i];
      alpha[i] = p.rho * p.s.dot(d);
      d -= alpha[i] * p.y;
    }
    if (m > 0) {
      const auto& last = pairs_.back();
      d *= 1.0 / (last.rho * last.y.squaredNorm());  // gamma = s.y / y.y
    } else {
      // No curvature information yet: scale the steepest-descent direction to
      // unit infinity norm so the trial step is meaningful in coordinate
      // units rather than gradient units (the same role the first-step
      // normalization plays in common L-BFGS packages).
      d *= 1.0 / grad.lpNorm<Eigen::Infinity>();
    }
    for (size_t i = 0; i < m; ++i) {
      const auto& p = pairs_[i];
      const double beta = p.rho * p.y.dot(d);
      d += (alpha[i] - beta) * p.s;
    }

    double dg = grad.dot(d);
    if (dg >= 0.0) {  // not a descent direction; fall back to steepest descent
      d = -grad;
      dg = -grad.squaredNorm();
    }

    // Armijo backtracking, halving from the trial step.
    double t = iteration_ == 0 ? eta : 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    double ft = 0.0;
    for (int trial = 0; trial < kMaxLineSearchTrials; ++trial) {
      xt = x + t * d;
      ft = objective(xt);
      ++out.evaluations;
      if (std::isfinite(ft) && ft <= fx + kArmijoC1 * t * dg) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }

    ++iteration_;
    if (!accepted) {
      out.line_search_failed = true;
      return out;
    }
    out.x = std::move(xt);
    out.f = ft;
    out.step_length = t;
    return out;
  }

private:
  static constexpr double kCurvatureFloor = 1e-10;
  static constexpr double kArmijoC1 = 1e-4;
  static constexpr int kMaxLineSearchTrials = 20;

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;  // 1 / (s.y)
  };

  int memory_;
  int iteration_ = 0;
  std::deque<Pair> pairs_;
  Eigen::VectorXd prev_x_, prev_grad_;
  bool have_prev_ = false;
  int consecutive_skips_ = 0;
};

inline LbfgsStepResult lbfgs_step(LbfgsState& state, const Eigen::VectorXd& x, double fx,
                                  const Eigen::VectorXd& grad,
                                  const std::function<double(const Eigen::VectorXd&)>& objective,
                                  double eta) {
  return state.step(x, fx, grad, objective, eta);
}

}  // namespace asw
