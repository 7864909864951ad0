#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "logb/logistic.hpp"

namespace logbandit {

struct Round {
  Vec arm;
  int reward;
};

/// Ordered (arm, reward) pairs. Alongside the raw rounds it keeps per-distinct-
/// arm pull counts and reward sums, which is all the log-loss depends on;
/// every loss evaluation costs O(#distinct arms) rather than O(t).
class History {
 public:
  explicit History(int dim);

  /// Throws DomainError for a reward outside {0,1}, a wrong dimension or an
  /// arm of norm > 1.
  void append(const Vec& arm, int reward);

  int dim() const { return dim_; }
  std::size_t size() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  const std::vector<Round>& rounds() const { return rounds_; }

  std::size_t distinct_count() const { return static_cast<std::size_t>(distinct_); }
  /// d x K matrix of the distinct arms, in order of first appearance.
  auto distinct_arms() const { return arms_.leftCols(distinct_); }
  auto pull_counts() const { return counts_.head(distinct_); }
  auto reward_sums() const { return rewards_.head(distinct_); }
  /// Sum over rounds of r_s x_s.
  const Vec& reward_weighted_sum() const { return reward_sum_; }

 private:
  int dim_;
  std::vector<Round> rounds_;
  Eigen::Index distinct_ = 0;
  Mat arms_;
  Vec counts_;
  Vec rewards_;
  Vec reward_sum_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

struct RegSchedule {
  int dim;
  double floor = 1.0;
};

/// max(floor, d ln t). Throws DomainError for t < 1.
double lambda_at(const RegSchedule& sched, long t);

/// Regularized negative log-likelihood with (lambda/2)||theta||^2.
double log_loss(const History& h, const Vec& theta, double lambda);

/// sum_s mu(x_s . theta) x_s + lambda theta
Vec g_vector(const History& h, const Vec& theta, double lambda);

/// sum_s mu_dot(x_s . theta) x_s x_s^T + lambda I
Mat hessian(const History& h, const Vec& theta, double lambda);

/// Value, gradient and Hessian of the log-loss from a single pass over the
/// distinct arms. Gradient and Hessian are only filled when requested.
struct LossEval {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};
LossEval evaluate_loss(const History& h, const Vec& theta, double lambda, bool want_gradient, bool want_hessian);

struct MleResult {
  Vec theta_hat;
  double grad_norm;
  int iterations;
  double loss_value;
};

struct MleOptions {
  double tol = 1e-9;
  int max_iter = 100;
};

/// Damped Newton with Armijo backtracking (step halving). Throws
/// NonConvergence carrying the best iterate when max_iter is exhausted.
MleResult fit_mle(const History& h, double lambda, const MleOptions& opts = {},
                  const std::optional<Vec>& warm_start = std::nullopt);

/// Minimizer of lambda-regularized log-loss plus an extra linear term:
/// argmin scale * L(theta) + (ridge/2)||theta||^2 - tilt . theta.
/// Used by the planners' dual solver; scale must be > 0.
Vec minimize_tilted_loss(const History& h, double lambda, double scale, double ridge, const Vec& tilt,
                         const Vec& start, double tol = 1e-11, int max_iter = 100);

/// sqrt(lambda) (S + 1/2) + d / sqrt(lambda) * log(4/delta (1 + t / (16 d lambda)))
double gamma_radius(long t, int dim, double lambda, double delta, double s_bound);

/// gamma + gamma^2 / sqrt(lambda)
double beta_radius(double gamma, double lambda);

}  // namespace logbandit
