#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "logb/confidence.hpp"
#include "logb/errors.hpp"

namespace logbandit {

struct SolverOpts {
  double tol = 1e-7;
  int max_iter = 500;
  int restarts = 4;
};

struct SolverReport {
  int iterations = 0;
  /// Constraint violation of the raw dual iterate before it was pulled back
  /// inside the set (0 when no restoration was needed).
  double feasibility_residual = 0.0;
  /// Dual objective minus primal value at exit; bounds the suboptimality.
  double value_gap = 0.0;
  /// The relaxed set has no strictly feasible point; the returned parameter
  /// is the least-loss point of the Theta ball instead.
  bool infeasible_set = false;
  /// plan_ball only: every alternation step increased the value.
  bool monotone = true;
};

/// Exception thrown by maximize_linear_over_E when E_t(delta) has no strictly
/// feasible point. best() is the least-loss point of the Theta ball.
class InfeasibleSet : public NonConvergence {
 public:
  using NonConvergence::NonConvergence;
};

/// A point strictly inside E_t(delta) and the open Theta ball: theta_hat when
/// it is inside Theta, else the loss minimizer over a ball of radius
/// S (1 - 1e-6). `strictly_feasible` is false when even that point fails the
/// loss test.
struct Anchor {
  Vec theta;
  bool strictly_feasible;
};
Anchor feasible_anchor(const History& h, const ConfidenceState& st);

struct LinearMax {
  Vec theta;
  double value;
  SolverReport report;
};

/// argmax of x . theta over E_t(delta) intersected with the Theta ball, via
/// Newton on the Lagrangian dual (multipliers for the loss constraint and the
/// ball constraint). The dual solution is pulled back onto the segment toward
/// the anchor if rounding left it marginally outside the set.
LinearMax solve_linear_over_E(const Vec& x, const History& h, const ConfidenceState& st, const SolverOpts& opts,
                              const Anchor* anchor = nullptr);

/// Throws InfeasibleSet / NonConvergence (carrying the best feasible iterate).
/// max x.theta over {L(theta) - L(theta_hat) <= beta^2}, the norm bound
/// dropped.
LinearMax solve_linear_over_loss_set(const Vec& x, const History& h, const ConfidenceState& st,
                                     const SolverOpts& opts = {});

Vec maximize_linear_over_E(const Vec& x, const History& h, const ConfidenceState& st, const SolverOpts& opts = {});

struct PlanResult {
  Vec arm;
  /// Index into the finite arm list or discretization, when there is one.
  std::optional<std::size_t> arm_index;
  Vec theta_tilde;
  double optimistic_value;
  SolverReport report;
};

/// Optimistic planning over a finite arm list: solve the linear subproblem per
/// arm and keep the best (lowest index on ties).
PlanResult plan_ofulog_r(const History& h, const ConfidenceState& st, const std::vector<Vec>& arms,
                         const SolverOpts& opts = {});
PlanResult plan_ofulog_r(const History& h, const ConfidenceState& st, const ArmSet& arm_set,
                         const SolverOpts& opts = {});

struct BallPlanOptions {
  /// When non-empty, arms are restricted to these unit vectors (the
  /// discretized sphere) and the alternation snaps to the best of them.
  std::vector<Vec> grid;
  /// Tried after the default starts, e.g. the previous round's direction.
  std::vector<Vec> extra_starts;
  /// When the best value reaches S, pick among the directions x with S x in
  /// E the one with the largest value over E without the norm bound.
  bool break_cap_ties = true;
};

/// Alternating maximization x <- theta/||theta||, theta <- argmax_E x.theta
/// from several starts (theta_hat direction, then +-e_i). Returns the best
/// stationary pair found; a later start must beat an earlier one by a
/// relative 1e-9 to replace it.
PlanResult plan_ball(const History& h, const ConfidenceState& st, int dim, const SolverOpts& opts = {},
                     const BallPlanOptions& ball = {});

enum class SetChoice { C, E };

/// Exhaustive search over a resolution^d grid on [-S, S]^d (d <= 2) filtered
/// by in_C or in_E, crossed with the finite or discretized arm set. Throws
/// UnsupportedDimension for d > 2.
PlanResult plan_grid_oracle(const History& h, const ConfidenceState& st, const ArmSet& arm_set, SetChoice set,
                            int resolution);

/// Index of argmax_x mu(x . theta_hat) + kappa gamma ||x||_{V^{-1}} with
/// V = sum x_s x_s^T + lambda I.
std::size_t baseline_glm_ucb(const History& h, const ConfidenceState& st, const std::vector<Vec>& arms,
                             double kappa);

}  // namespace logbandit
