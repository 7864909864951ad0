#include "logb/estimation.hpp"

#include <cmath>
#include <cstring>

#include "logb/digest.hpp"
#include "logb/errors.hpp"

namespace logbandit {

History::History(int dim) : dim_(dim), arms_(std::max(dim, 0), 0), reward_sum_(Vec::Zero(std::max(dim, 0))) {
  if (dim < 1) throw DomainError("History dimension must be >= 1");
}

void History::append(const Vec& arm, int reward) {
  if (reward != 0 && reward != 1) throw DomainError("reward must be 0 or 1");
  if (arm.size() != dim_) throw DomainError("arm dimension mismatch");
  if (!arm.allFinite() || arm.norm() > 1.0 + 1e-12) throw DomainError("arm must be finite with norm <= 1");

  std::string key(sizeof(double) * static_cast<std::size_t>(dim_), '\0');
  std::memcpy(key.data(), arm.data(), key.size());
  auto [it, inserted] = index_.try_emplace(std::move(key), distinct_);
  if (inserted) {
    if (distinct_ == arms_.cols()) {
      const Eigen::Index cap = std::max<Eigen::Index>(8, 2 * distinct_);
      arms_.conservativeResize(dim_, cap);
      counts_.conservativeResize(cap);
      rewards_.conservativeResize(cap);
    }
    arms_.col(distinct_) = arm;
    counts_[distinct_] = 0.0;
    rewards_[distinct_] = 0.0;
    ++distinct_;
  }
  const Eigen::Index k = it->second;
  counts_[k] += 1.0;
  rewards_[k] += reward;
  if (reward == 1) reward_sum_ += arm;
  rounds_.push_back({arm, reward});
}

double lambda_at(const RegSchedule& sched, long t) {
  if (t < 1) throw DomainError("lambda_at: round index must be >= 1");
  return std::max(sched.floor, sched.dim * std::log(static_cast<double>(t)));
}

LossEval evaluate_loss(const History& h, const Vec& theta, double lambda, bool want_gradient, bool want_hessian) {
  const auto arms = h.distinct_arms();
  const auto counts = h.pull_counts();
  const auto rewards = h.reward_sums();
  const Vec z = arms.transpose() * theta;

  LossEval out;
  out.value = 0.5 * lambda * theta.squaredNorm();
  Vec grad_weight;
  Vec hess_weight;
  if (want_gradient) grad_weight.resize(z.size());
  if (want_hessian) hess_weight.resize(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double s = rewards[k];
    const double n = counts[k];
    // -log mu(z) = softplus(-z), -log(1 - mu(z)) = softplus(z)
    out.value += s * softplus(-z[k]) + (n - s) * softplus(z[k]);
    if (want_gradient || want_hessian) {
      const LinkValues f = mu_family(z[k]);
      if (want_gradient) grad_weight[k] = n * f.mu - s;
      if (want_hessian) hess_weight[k] = n * f.mu_dot;
    }
  }
  if (want_gradient) out.gradient = arms * grad_weight + lambda * theta;
  if (want_hessian) {
    out.hessian = arms * hess_weight.asDiagonal() * arms.transpose();
    out.hessian.diagonal().array() += lambda;
  }
  return out;
}

double log_loss(const History& h, const Vec& theta, double lambda) {
  return evaluate_loss(h, theta, lambda, false, false).value;
}

Vec g_vector(const History& h, const Vec& theta, double lambda) {
  const auto arms = h.distinct_arms();
  const Vec z = arms.transpose() * theta;
  Vec w(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) w[k] = h.pull_counts()[k] * mu(z[k]);
  return arms * w + lambda * theta;
}

Mat hessian(const History& h, const Vec& theta, double lambda) {
  return evaluate_loss(h, theta, lambda, false, true).hessian;
}

namespace {

struct NewtonOutcome {
  Vec x;
  double value;
  double grad_norm;
  int iterations;
  bool converged;
};

// Damped Newton on a smooth strongly convex objective. `eval(x)` returns a
// LossEval with value, gradient and Hessian.
template <typename Eval>
NewtonOutcome damped_newton(Eval&& eval, Vec x, double tol, int max_iter) {
  LossEval cur = eval(x);
  double gnorm = cur.gradient.norm();
  int it = 0;
  while (gnorm > tol) {
    if (it == max_iter) return {x, cur.value, gnorm, it, false};
    ++it;
    Eigen::LLT<Mat> llt(cur.hessian);
    if (llt.info() != Eigen::Success) throw MatrixError("Newton: Hessian not positive definite");
    const Vec step = -llt.solve(cur.gradient);
    const double slope = cur.gradient.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec trial = x + t * step;
      LossEval next = eval(trial);
      const bool armijo = next.value <= cur.value + 1e-4 * t * slope;
      // Near the optimum the loss decrease drops below rounding noise; a
      // full step that halves the gradient is accepted on that basis.
      const bool contracting = t == 1.0 && next.gradient.norm() < 0.5 * gnorm &&
                               next.value <= cur.value + 1e-13 * (1.0 + std::abs(cur.value));
      if (armijo || contracting) {
        x = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return {x, cur.value, gnorm, it, false};
    gnorm = cur.gradient.norm();
  }
  return {x, cur.value, gnorm, it, true};
}

}  // namespace

MleResult fit_mle(const History& h, double lambda, const MleOptions& opts, const std::optional<Vec>& warm_start) {
  if (!(lambda > 0)) throw DomainError("fit_mle: lambda must be positive");
  Vec start = warm_start ? *warm_start : Vec::Zero(h.dim());
  if (start.size() != h.dim()) throw DomainError("fit_mle: warm start dimension mismatch");
  auto eval = [&](const Vec& th) { return evaluate_loss(h, th, lambda, true, true); };
  NewtonOutcome out = damped_newton(eval, std::move(start), opts.tol, opts.max_iter);
  if (!out.converged)
    throw NonConvergence("fit_mle: Newton did not reach the gradient tolerance", out.x, out.grad_norm);
  return {out.x, out.grad_norm, out.iterations, out.value};
}

Vec minimize_tilted_loss(const History& h, double lambda, double scale, double ridge, const Vec& tilt,
                         const Vec& start, double tol, int max_iter) {
  if (!(scale > 0)) throw DomainError("minimize_tilted_loss: scale must be positive");
  auto eval = [&](const Vec& th) {
    LossEval e = evaluate_loss(h, th, lambda, true, true);
    e.value = scale * e.value + 0.5 * ridge * th.squaredNorm() - tilt.dot(th);
    e.gradient = scale * e.gradient + ridge * th - tilt;
    e.hessian *= scale;
    e.hessian.diagonal().array() += ridge;
    return e;
  };
  const double gscale = 1.0 + tilt.norm() + scale * (static_cast<double>(h.size()) + lambda * start.norm());
  NewtonOutcome out = damped_newton(eval, start, tol * gscale, max_iter);
  if (!out.converged)
    throw NonConvergence("minimize_tilted_loss: Newton did not converge (scale " + fmt12(scale) + ", ridge " +
                             fmt12(ridge) + ", " + std::to_string(out.iterations) + " iterations)",
                         out.x, out.grad_norm);
  return out.x;
}

double gamma_radius(long t, int dim, double lambda, double delta, double s_bound) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("gamma_radius: delta must lie in (0, 1]");
  if (!(lambda > 0)) throw DomainError("gamma_radius: lambda must be positive");
  const double root = std::sqrt(lambda);
  const double log_term = std::log(4.0 / delta * (1.0 + static_cast<double>(t) / (16.0 * dim * lambda)));
  return root * (s_bound + 0.5) + dim / root * log_term;
}

double beta_radius(double gamma, double lambda) { return gamma + gamma * gamma / std::sqrt(lambda); }

}  // namespace logbandit
