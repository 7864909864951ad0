#pragma once

#include <optional>

#include "logb/estimation.hpp"

namespace logbandit {

/// Relative slack applied to every set-membership inequality.
inline constexpr double kMembershipSlack = 1e-9;

struct ConfidenceParams {
  double delta = 0.1;
  double s_bound = 1.0;
  RegSchedule schedule{1};
  MleOptions mle{};
};

/// One round's belief: the MLE, its regularization and both radii. Immutable
/// once built.
struct ConfidenceState {
  long round;  // t: the round about to be played, history holds t - 1 rounds
  Vec theta_hat;
  double lambda;
  double gamma;
  double beta;
  double delta;
  double s_bound;
  double loss_at_hat;
  Eigen::LLT<Mat> hessian_factor_at_hat;
  int mle_iterations = 0;

  int dim() const { return static_cast<int>(theta_hat.size()); }
};

/// Fits the MLE with lambda_t and evaluates gamma_t, beta_t at round
/// t = h.size() + 1.
ConfidenceState build_confidence_state(const History& h, const ConfidenceParams& params,
                                       const std::optional<Vec>& warm_start = std::nullopt);

/// sqrt(v^T M v) through a Cholesky factor. Throws MatrixError if M is not PD.
double weighted_norm(const Vec& v, const Mat& m);
/// sqrt(v^T M^{-1} v) without forming the inverse.
double weighted_norm_inv(const Vec& v, const Mat& m);
double weighted_norm(const Vec& v, const Eigen::LLT<Mat>& factor);
double weighted_norm_inv(const Vec& v, const Eigen::LLT<Mat>& factor);

/// ||theta|| <= S and ||g_t(theta) - g_t(theta_hat)||_{H_t(theta)^{-1}} <= gamma.
bool in_C(const Vec& theta, const History& h, const ConfidenceState& st);
/// ||theta|| <= S and L_t(theta) - L_t(theta_hat) <= beta^2.
bool in_E(const Vec& theta, const History& h, const ConfidenceState& st);

/// Left-hand side of the C_t test, for diagnostics.
double c_statistic(const Vec& theta, const History& h, const ConfidenceState& st);

/// sum_s alpha(x_s, theta1, theta2) x_s x_s^T + lambda I
Mat g_matrix(const History& h, const Vec& theta1, const Vec& theta2, double lambda);

struct BoundCheck {
  double lhs;
  double rhs;
  bool holds() const { return lhs <= rhs * (1 + kMembershipSlack); }
};

/// ||theta - theta_star||_{H_t(theta_star)} against 2(1+2S) gamma_t.
BoundCheck deviation_bound(const Vec& theta, const Vec& theta_star, const History& h, const ConfidenceState& st);
/// Same distance against (2+2S) gamma_t + 2 sqrt(1+S) beta_t, the bound for
/// points of the relaxed set.
BoundCheck relaxed_deviation_bound(const Vec& theta, const Vec& theta_star, const History& h,
                                   const ConfidenceState& st);

}  // namespace logbandit
