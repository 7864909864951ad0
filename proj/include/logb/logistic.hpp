#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace logbandit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Logistic link
// ---------------------------------------------------------------------------

struct LinkValues {
  double mu;
  double mu_dot;
  double mu_ddot;
};

/// Logistic function and its first two derivatives. Stable for any finite z:
/// the exponential is only ever taken of a non-positive argument.
LinkValues mu_family(double z);

double mu(double z);
double mu_dot(double z);
/// log(1 + e^z) without overflow.
double softplus(double z);

/// Mean slope of the link between z1 and z2: the integral of mu_dot over the
/// segment, in closed form.
double slope_alpha(double z1, double z2);
double slope_alpha(const Vec& x, const Vec& theta1, const Vec& theta2);

/// Integral over v in [0,1] of (1 - v) * mu_dot(z1 + v (z2 - z1)).
double slope_alpha_tilde(double z1, double z2);
double slope_alpha_tilde(const Vec& x, const Vec& theta1, const Vec& theta2);

// ---------------------------------------------------------------------------
// Arm sets and problem instances
// ---------------------------------------------------------------------------

enum class ArmSetKind { Finite, UnitSphere, UnitBall };

std::string to_string(ArmSetKind kind);

class ArmSet {
 public:
  /// Non-empty list of arms, each with Euclidean norm at most one.
  static ArmSet finite(std::vector<Vec> arms);
  /// `resolution` is the number of points per great circle for d = 2 and the
  /// number of multi-start directions for d > 2. Must be >= 8 when given.
  static ArmSet unit_sphere(int dim, std::optional<int> resolution = {});
  static ArmSet unit_ball(int dim, std::optional<int> resolution = {});

  ArmSetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_finite() const { return kind_ == ArmSetKind::Finite; }
  const std::vector<Vec>& arms() const { return arms_; }
  std::optional<int> resolution() const { return resolution_; }

  /// Finite search set for planners: the arms themselves for a finite set,
  /// `resolution` equally spaced unit vectors for d = 2 sphere/ball, {+1,-1}
  /// for d = 1. Empty when no finite discretization exists.
  std::vector<Vec> discretization() const;

  /// Membership up to 1e-12 on the norm.
  bool contains(const Vec& x) const;

 private:
  ArmSet(ArmSetKind kind, int dim, std::vector<Vec> arms, std::optional<int> resolution)
      : kind_(kind), dim_(dim), arms_(std::move(arms)), resolution_(resolution) {}

  ArmSetKind kind_;
  int dim_;
  std::vector<Vec> arms_;
  std::optional<int> resolution_;
};

struct ProblemInstance {
  Vec theta_star;
  double s_bound;
  ArmSet arm_set;

  ProblemInstance(Vec theta, double s, ArmSet arms);

  int dim() const { return static_cast<int>(theta_star.size()); }
  /// Stable hex digest of the instance, used to tie logs to their instance.
  std::string digest() const;
};

struct BestArm {
  Vec arm;
  double value;
  /// Position in the finite arm list, if the set is finite.
  std::optional<std::size_t> index;
};

/// argmax over the arm set of x . theta. Ties go to the lowest index.
BestArm best_arm(const ArmSet& arm_set, const Vec& theta);

struct KappaSummary {
  double kappa_star;
  double kappa_x;
  double kappa_global;
};

KappaSummary kappa_summary(const ProblemInstance& inst);

/// Arms with a large gap and almost no reward variance under theta_star.
class DetrimentalSet {
 public:
  explicit DetrimentalSet(const ProblemInstance& inst);

  bool contains(const Vec& x) const;
  /// Indices of detrimental arms (finite sets only, empty otherwise).
  const std::vector<std::size_t>& finite_members() const { return members_; }
  bool uses_margin_rule() const { return margin_rule_; }

 private:
  Vec theta_star_;
  bool margin_rule_;
  double slope_threshold_;
  std::vector<std::size_t> members_;
};

inline DetrimentalSet detrimental_set(const ProblemInstance& inst) { return DetrimentalSet(inst); }

}  // namespace logbandit
