#include "logb/planning.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "logb/errors.hpp"

namespace logbandit {

namespace {

double loss_gap(const History& h, const ConfidenceState& st, const Vec& theta) {
  return log_loss(h, theta, st.lambda) - st.loss_at_hat;
}

bool strictly_inside(const History& h, const ConfidenceState& st, const Vec& theta) {
  return theta.norm() <= st.s_bound && loss_gap(h, st, theta) <= st.beta * st.beta;
}

// Last feasible point on the segment anchor -> target, by bisection.
Vec pull_back(const History& h, const ConfidenceState& st, const Vec& anchor, const Vec& target) {
  double lo = 0.0;
  double hi = 1.0;
  const Vec dir = target - anchor;
  for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (strictly_inside(h, st, anchor + mid * dir))
      lo = mid;
    else
      hi = mid;
  }
  return anchor + lo * dir;
}

bool inside_loss_set(const History& h, const ConfidenceState& st, const Vec& theta) {
  return loss_gap(h, st, theta) <= st.beta * st.beta;
}

// Safeguarded Newton for a root of an increasing scalar function on a
// bracket [lo, hi] with f(lo) < 0 < f(hi). `f(v)` returns {value, slope}.
template <typename F>
double bracketed_newton(F&& f, double lo, double hi, double start, double ftol, int max_iter, int& evals) {
  double v = start;
  for (int it = 0; it < max_iter; ++it) {
    const auto [fv, slope] = f(v);
    ++evals;
    if (std::abs(fv) <= ftol) return v;
    if (fv < 0)
      lo = v;
    else
      hi = v;
    double next = slope > 0 ? v - fv / slope : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) return next;
    v = next;
  }
  return v;
}

class DualSolver {
 public:
  DualSolver(const Vec& x, const History& h, const ConfidenceState& st)
      : x_(x), h_(h), st_(st), cap_(st.loss_at_hat + st.beta * st.beta), s2_(st.s_bound * st.s_bound),
        warm_(st.theta_hat) {}

  struct Point {
    double a;
    double b;
    Vec theta;
    LossEval loss;
    double dual;
  };

  Point eval(double a, double b) {
    Vec theta = minimize_tilted_loss(h_, st_.lambda, a, b, x_, warm_);
    warm_ = theta;
    ++solves_;
    LossEval e = evaluate_loss(h_, theta, st_.lambda, true, true);
    const double dual = x_.dot(theta) - a * (e.value - cap_) - 0.5 * b * (theta.squaredNorm() - s2_);
    return {a, b, std::move(theta), std::move(e), dual};
  }

  // Loss constraint active, ball constraint dropped. Solves for w = 1/a with
  // sqrt(L(theta(a)) - L_hat) = beta, which is close to linear in w.
  Point solve_loss_only(int max_iter) {
    const double beta = st_.beta;
    const double q = std::max(st_.hessian_factor_at_hat.solve(x_).dot(x_), 1e-300);
    const double w0 = std::sqrt(2.0) * beta / std::sqrt(q);
    std::optional<Point> last;
    auto f = [&](double w) {
      Point p = eval(1.0 / w, 0.0);
      const double gap = std::max(p.loss.value - st_.loss_at_hat, 1e-300);
      const double root = std::sqrt(gap);
      Eigen::LLT<Mat> llt(p.loss.hessian);
      // d gap / d w = a * gradL^T H^{-1} gradL
      const double dgap = p.a * llt.solve(p.loss.gradient).dot(p.loss.gradient);
      last = std::move(p);
      return std::pair<double, double>{root - beta, dgap / (2.0 * root)};
    };
    double lo = 0.0;
    double hi = w0;
    int evals = 0;
    for (int k = 0; k < 200; ++k) {
      const auto [fv, slope] = f(hi);
      (void)slope;
      ++evals;
      if (fv > 0) break;
      lo = hi;
      hi *= 4.0;
      if (k == 199) throw NonConvergence("dual solver: could not bracket the loss multiplier", st_.theta_hat, fv);
    }
    const double w = bracketed_newton(f, lo, hi, hi, 1e-12 * (1.0 + beta), max_iter, evals);
    if (!last || last->a != 1.0 / w) last = eval(1.0 / w, 0.0);
    return std::move(*last);
  }

  // Both constraints active: damped Newton on the convex dual in (a, b).
  Point solve_both(Point p, int max_iter, double gap_tol) {
    for (int it = 0; it < max_iter; ++it) {
      const Eigen::Vector2d grad(cap_ - p.loss.value, 0.5 * (s2_ - p.theta.squaredNorm()));
      Mat inner = p.a * p.loss.hessian;
      inner.diagonal().array() += p.b;
      Eigen::LLT<Mat> llt(inner);
      const Vec mg = llt.solve(p.loss.gradient);
      const Vec mt = llt.solve(p.theta);
      Eigen::Matrix2d hess;
      hess << p.loss.gradient.dot(mg), p.loss.gradient.dot(mt), p.theta.dot(mg), p.theta.dot(mt);
      hess.diagonal().array() += 1e-14 * hess.diagonal().cwiseAbs().maxCoeff() + 1e-300;
      const Eigen::Vector2d step = -hess.ldlt().solve(grad);
      const double decrease = -grad.dot(step);
      if (decrease <= 2.0 * gap_tol) return p;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const double a = p.a + t * step[0];
        const double b = p.b + t * step[1];
        if (a <= 0 || b < 0) continue;
        Point trial = eval(a, b);
        if (trial.dual <= p.dual - 1e-4 * t * decrease) {
          p = std::move(trial);
          moved = true;
          break;
        }
      }
      if (!moved) return p;
    }
    throw NonConvergence("dual solver: Newton on (a, b) did not converge", p.theta, std::abs(cap_ - p.loss.value));
  }

  int solves() const { return solves_; }
  double cap() const { return cap_; }

 private:
  const Vec& x_;
  const History& h_;
  const ConfidenceState& st_;
  double cap_;
  double s2_;
  Vec warm_;
  int solves_ = 0;
};

}  // namespace

Anchor feasible_anchor(const History& h, const ConfidenceState& st) {
  const double radius = st.s_bound * (1.0 - 1e-6);
  if (st.theta_hat.norm() <= radius) return {st.theta_hat, true};
  // Minimizer of L over ||theta|| <= radius: theta(rho) = argmin L + rho/2 ||theta||^2
  // with ||theta(rho)|| = radius.
  Vec warm = st.theta_hat;
  Vec best = st.theta_hat;
  auto f = [&](double rho) {
    warm = minimize_tilted_loss(h, st.lambda, 1.0, rho, Vec::Zero(h.dim()), warm);
    best = warm;
    Mat m = hessian(h, warm, st.lambda);
    m.diagonal().array() += rho;
    const double n = warm.norm();
    const double slope = Eigen::LLT<Mat>(m).solve(warm).dot(warm) / std::max(n, 1e-300);
    // increasing in rho: radius - ||theta(rho)||
    return std::pair<double, double>{radius - n, slope};
  };
  double lo = 0.0;
  double hi = 1.0;
  int evals = 0;
  for (int k = 0; k < 200 && f(hi).first < 0; ++k) {
    lo = hi;
    hi *= 4.0;
  }
  const double rho = bracketed_newton(f, lo, hi, hi, 1e-12 * radius, 100, evals);
  f(rho);
  Vec theta = best;
  if (theta.norm() > radius) theta *= radius / theta.norm();
  return {theta, loss_gap(h, st, theta) < st.beta * st.beta};
}

LinearMax solve_linear_over_E(const Vec& x, const History& h, const ConfidenceState& st, const SolverOpts& opts,
                              const Anchor* anchor) {
  if (x.size() != st.dim()) throw DomainError("maximize_linear_over_E: dimension mismatch");
  std::optional<Anchor> own;
  if (!anchor) {
    own = feasible_anchor(h, st);
    anchor = &*own;
  }
  if (!anchor->strictly_feasible) {
    SolverReport rep;
    rep.infeasible_set = true;
    rep.feasibility_residual = loss_gap(h, st, anchor->theta) - st.beta * st.beta;
    return {anchor->theta, x.dot(anchor->theta), rep};
  }
  const double xn = x.norm();
  if (xn == 0.0) return {anchor->theta, 0.0, {}};

  // Ball-only optimum.
  const Vec on_ball = st.s_bound * x / xn;
  if (loss_gap(h, st, on_ball) <= st.beta * st.beta) {
    SolverReport rep;
    rep.iterations = 1;
    return {on_ball, x.dot(on_ball), rep};
  }

  DualSolver dual(x, h, st);
  SolverReport rep;
  DualSolver::Point p = dual.solve_loss_only(opts.max_iter);
  if (p.theta.norm() > st.s_bound) {
    const double gap_tol = 1e-3 * opts.tol * (1.0 + std::abs(x.dot(p.theta)));
    p = dual.solve_both(std::move(p), opts.max_iter, gap_tol);
  }
  rep.iterations = dual.solves();
  Vec theta = p.theta;
  if (!strictly_inside(h, st, theta)) {
    rep.feasibility_residual =
        std::max(loss_gap(h, st, theta) - st.beta * st.beta, theta.norm() - st.s_bound);
    theta = pull_back(h, st, anchor->theta, theta);
  }
  const double value = x.dot(theta);
  rep.value_gap = std::max(0.0, p.dual - value);
  return {theta, value, rep};
}

LinearMax solve_linear_over_loss_set(const Vec& x, const History& h, const ConfidenceState& st,
                                     const SolverOpts& opts) {
  if (x.size() != st.dim()) throw DomainError("solve_linear_over_loss_set: dimension mismatch");
  if (x.norm() == 0.0) return {st.theta_hat, 0.0, {}};
  DualSolver dual(x, h, st);
  DualSolver::Point p = dual.solve_loss_only(opts.max_iter);
  SolverReport rep;
  rep.iterations = dual.solves();
  Vec theta = p.theta;
  if (!inside_loss_set(h, st, theta)) {
    rep.feasibility_residual = loss_gap(h, st, theta) - st.beta * st.beta;
    double lo = 0.0, hi = 1.0;
    const Vec dir = theta - st.theta_hat;
    for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (inside_loss_set(h, st, st.theta_hat + mid * dir))
        lo = mid;
      else
        hi = mid;
    }
    theta = st.theta_hat + lo * dir;
  }
  const double value = x.dot(theta);
  rep.value_gap = std::max(0.0, p.dual - value);
  return {theta, value, rep};
}

Vec maximize_linear_over_E(const Vec& x, const History& h, const ConfidenceState& st, const SolverOpts& opts) {
  const Anchor anchor = feasible_anchor(h, st);
  if (!anchor.strictly_feasible)
    throw InfeasibleSet("maximize_linear_over_E: relaxed confidence set has no interior point", anchor.theta,
                        loss_gap(h, st, anchor.theta) - st.beta * st.beta);
  return solve_linear_over_E(x, h, st, opts, &anchor).theta;
}

PlanResult plan_ofulog_r(const History& h, const ConfidenceState& st, const std::vector<Vec>& arms,
                         const SolverOpts& opts) {
  if (arms.empty()) throw DomainError("plan_ofulog_r: empty arm list");
  const Anchor anchor = feasible_anchor(h, st);
  std::optional<PlanResult> best;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    LinearMax sub;
    try {
      sub = solve_linear_over_E(arms[i], h, st, opts, &anchor);
    } catch (const NonConvergence& e) {
      throw NonConvergence("plan_ofulog_r: arm " + std::to_string(i) + ": " + e.what(), e.best(), e.residual());
    }
    if (!best || sub.value > best->optimistic_value) {
      best = PlanResult{arms[i], i, sub.theta, sub.value, sub.report};
    } else {
      best->report.iterations += sub.report.iterations;
    }
  }
  return *best;
}

PlanResult plan_ofulog_r(const History& h, const ConfidenceState& st, const ArmSet& arm_set,
                         const SolverOpts& opts) {
  if (!arm_set.is_finite()) throw DomainError("plan_ofulog_r: finite arm set required");
  return plan_ofulog_r(h, st, arm_set.arms(), opts);
}

namespace {

std::size_t snap(const std::vector<Vec>& grid, const Vec& theta) {
  std::size_t best = 0;
  double value = grid[0].dot(theta);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = grid[i].dot(theta);
    if (v > value) {
      value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

PlanResult plan_ball(const History& h, const ConfidenceState& st, int dim, const SolverOpts& opts,
                     const BallPlanOptions& ball) {
  if (dim != st.dim()) throw DomainError("plan_ball: dimension mismatch");
  const Anchor anchor = feasible_anchor(h, st);

  std::vector<Vec> starts;
  const int defaults = std::max(1, opts.restarts);
  Vec first = st.theta_hat;
  if (first.norm() == 0.0) first = Vec::Unit(dim, 0);
  starts.push_back(first.normalized());
  for (int k = 0; static_cast<int>(starts.size()) < defaults && k < 2 * dim; ++k) {
    Vec e = Vec::Unit(dim, k % dim);
    if (k >= dim) e = -e;
    starts.push_back(e);
  }
  starts.insert(starts.end(), ball.extra_starts.begin(), ball.extra_starts.end());

  std::optional<PlanResult> best;
  int total_iterations = 0;
  bool monotone = true;
  for (Vec start : starts) {
    if (start.norm() == 0.0) start = Vec::Unit(dim, 0);
    std::optional<std::size_t> index;
    Vec x = start.normalized();
    if (!ball.grid.empty()) {
      index = snap(ball.grid, x);
      x = ball.grid[*index];
    }
    LinearMax sub = solve_linear_over_E(x, h, st, opts, &anchor);
    total_iterations += sub.report.iterations;
    double value = sub.value;
    for (int it = 0; it < opts.max_iter; ++it) {
      Vec next = sub.theta;
      if (next.norm() == 0.0) break;
      next.normalize();
      std::optional<std::size_t> next_index;
      if (!ball.grid.empty()) {
        next_index = snap(ball.grid, next);
        if (*next_index == *index) break;
        next = ball.grid[*next_index];
      }
      LinearMax cand = solve_linear_over_E(next, h, st, opts, &anchor);
      total_iterations += cand.report.iterations;
      if (cand.value < value - 1e-9 * (1.0 + std::abs(value))) monotone = false;
      const double improvement = cand.value - value;
      if (improvement <= 0) break;
      x = next;
      index = next_index;
      sub = std::move(cand);
      value = sub.value;
      if (ball.grid.empty() && improvement < opts.tol * (1.0 + std::abs(value))) break;
    }
    if (!best || value > best->optimistic_value + 1e-9 * (1.0 + std::abs(best->optimistic_value)))
      best = PlanResult{x, index, sub.theta, value, sub.report};
  }

  const double s = st.s_bound;
  if (ball.break_cap_ties && best->optimistic_value >= s * (1.0 - 1e-9)) {
    // Every unit x with S x in E attains the cap. Among them take the one
    // with the largest local value over E without the norm bound,
    // x.theta_hat + sqrt(2) beta ||x||_{H^-1}.
    const double reach = std::sqrt(2.0) * st.beta;
    auto score = [&](const Vec& u) { return u.dot(st.theta_hat) + reach * weighted_norm_inv(u, st.hessian_factor_at_hat); };
    std::vector<std::pair<double, std::size_t>> order;
    std::vector<Vec> candidates;
    if (!ball.grid.empty()) {
      for (std::size_t i = 0; i < ball.grid.size(); ++i) order.emplace_back(score(ball.grid[i]), i);
    } else {
      for (Vec u : starts) {
        if (u.norm() == 0.0) u = Vec::Unit(dim, 0);
        u.normalize();
        for (int it = 0; it < opts.max_iter; ++it) {
          const Vec hu = st.hessian_factor_at_hat.solve(u);
          Vec next = st.theta_hat + reach * hu / std::sqrt(std::max(u.dot(hu), 1e-300));
          if (next.norm() == 0.0) break;
          next.normalize();
          const bool done = (next - u).norm() < opts.tol;
          u = next;
          if (done) break;
        }
        order.emplace_back(score(u), candidates.size());
        candidates.push_back(u);
      }
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    for (const auto& [value, i] : order) {
      const Vec& u = ball.grid.empty() ? candidates[i] : ball.grid[i];
      const Vec capped = s * u;
      if (!inside_loss_set(h, st, capped)) continue;
      std::optional<std::size_t> index;
      if (!ball.grid.empty()) index = i;
      best = PlanResult{u, index, capped, u.dot(capped), best->report};
      break;
    }
  }
  best->report.iterations = total_iterations;
  best->report.monotone = monotone;
  return *best;
}

PlanResult plan_grid_oracle(const History& h, const ConfidenceState& st, const ArmSet& arm_set, SetChoice set,
                            int resolution) {
  const int dim = st.dim();
  if (dim > 2) throw UnsupportedDimension("plan_grid_oracle supports d <= 2 only");
  if (resolution < 2) throw DomainError("plan_grid_oracle: resolution must be >= 2");
  const std::vector<Vec> arms = arm_set.discretization();
  if (arms.empty()) throw DomainError("plan_grid_oracle: arm set has no finite discretization");
  const double s = st.s_bound;
  auto coord = [&](int i) { return -s + 2.0 * s * i / (resolution - 1); };

  std::optional<PlanResult> best;
  const int outer = dim == 2 ? resolution : 1;
  Vec theta(dim);
  for (int i = 0; i < outer; ++i) {
    for (int j = 0; j < resolution; ++j) {
      if (dim == 2)
        theta << coord(i), coord(j);
      else
        theta << coord(j);
      const bool member = set == SetChoice::C ? in_C(theta, h, st) : in_E(theta, h, st);
      if (!member) continue;
      for (std::size_t k = 0; k < arms.size(); ++k) {
        const double v = arms[k].dot(theta);
        if (!best || v > best->optimistic_value) best = PlanResult{arms[k], k, theta, v, {}};
      }
    }
  }
  if (!best) {
    SolverReport rep;
    rep.infeasible_set = true;
    return PlanResult{arms[0], 0, st.theta_hat, arms[0].dot(st.theta_hat), rep};
  }
  best->report.iterations = outer * resolution;
  return *best;
}

std::size_t baseline_glm_ucb(const History& h, const ConfidenceState& st, const std::vector<Vec>& arms,
                             double kappa) {
  if (arms.empty()) throw DomainError("baseline_glm_ucb: empty arm list");
  const auto a = h.distinct_arms();
  Mat v = a * h.pull_counts().asDiagonal() * a.transpose();
  v.diagonal().array() += st.lambda;
  const Eigen::LLT<Mat> factor(v);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double score = mu(arms[i].dot(st.theta_hat)) + kappa * st.gamma * weighted_norm_inv(arms[i], factor);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

}  // namespace logbandit
