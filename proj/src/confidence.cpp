#include "logb/confidence.hpp"

#include <cmath>

#include "logb/errors.hpp"

namespace logbandit {

ConfidenceState build_confidence_state(const History& h, const ConfidenceParams& params,
                                       const std::optional<Vec>& warm_start) {
  const long t = static_cast<long>(h.size()) + 1;
  const double lambda = lambda_at(params.schedule, t);
  const MleResult mle = fit_mle(h, lambda, params.mle, warm_start);
  const double gamma = gamma_radius(t, h.dim(), lambda, params.delta, params.s_bound);
  Eigen::LLT<Mat> factor(hessian(h, mle.theta_hat, lambda));
  if (factor.info() != Eigen::Success) throw MatrixError("Hessian at the MLE is not positive definite");
  return ConfidenceState{t,
                         mle.theta_hat,
                         lambda,
                         gamma,
                         beta_radius(gamma, lambda),
                         params.delta,
                         params.s_bound,
                         mle.loss_value,
                         std::move(factor),
                         mle.iterations};
}

double weighted_norm(const Vec& v, const Eigen::LLT<Mat>& factor) {
  return (factor.matrixU() * v).norm();
}

double weighted_norm_inv(const Vec& v, const Eigen::LLT<Mat>& factor) {
  return factor.matrixL().solve(v).norm();
}

namespace {
Eigen::LLT<Mat> factorize(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) throw MatrixError("weighted norm: matrix is not positive definite");
  return llt;
}
}  // namespace

double weighted_norm(const Vec& v, const Mat& m) { return weighted_norm(v, factorize(m)); }
double weighted_norm_inv(const Vec& v, const Mat& m) { return weighted_norm_inv(v, factorize(m)); }

namespace {
bool in_theta_ball(const Vec& theta, double s_bound) { return theta.norm() <= s_bound * (1 + kMembershipSlack); }
}  // namespace

double c_statistic(const Vec& theta, const History& h, const ConfidenceState& st) {
  const Vec diff = g_vector(h, theta, st.lambda) - g_vector(h, st.theta_hat, st.lambda);
  return weighted_norm_inv(diff, hessian(h, theta, st.lambda));
}

bool in_C(const Vec& theta, const History& h, const ConfidenceState& st) {
  if (!in_theta_ball(theta, st.s_bound)) return false;
  return c_statistic(theta, h, st) <= st.gamma * (1 + kMembershipSlack);
}

bool in_E(const Vec& theta, const History& h, const ConfidenceState& st) {
  if (!in_theta_ball(theta, st.s_bound)) return false;
  return log_loss(h, theta, st.lambda) - st.loss_at_hat <= st.beta * st.beta * (1 + kMembershipSlack);
}

Mat g_matrix(const History& h, const Vec& theta1, const Vec& theta2, double lambda) {
  const auto arms = h.distinct_arms();
  const Vec z1 = arms.transpose() * theta1;
  const Vec z2 = arms.transpose() * theta2;
  Vec w(z1.size());
  for (Eigen::Index k = 0; k < z1.size(); ++k) w[k] = h.pull_counts()[k] * slope_alpha(z1[k], z2[k]);
  Mat g = arms * w.asDiagonal() * arms.transpose();
  g.diagonal().array() += lambda;
  return g;
}

BoundCheck deviation_bound(const Vec& theta, const Vec& theta_star, const History& h, const ConfidenceState& st) {
  const double lhs = weighted_norm(theta - theta_star, hessian(h, theta_star, st.lambda));
  return {lhs, 2.0 * (1.0 + 2.0 * st.s_bound) * st.gamma};
}

BoundCheck relaxed_deviation_bound(const Vec& theta, const Vec& theta_star, const History& h,
                                   const ConfidenceState& st) {
  const double lhs = weighted_norm(theta - theta_star, hessian(h, theta_star, st.lambda));
  return {lhs, (2.0 + 2.0 * st.s_bound) * st.gamma + 2.0 * std::sqrt(1.0 + st.s_bound) * st.beta};
}

}  // namespace logbandit
