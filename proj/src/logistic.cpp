#include "logb/logistic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "logb/digest.hpp"
#include "logb/errors.hpp"

namespace logbandit {

namespace {

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) throw DomainError(std::string(what) + ": non-finite input");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
}

// mu(z) and 1 - mu(z), both to full relative precision.
std::pair<double, double> mu_pair(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return {1.0 / (1.0 + e), e / (1.0 + e)};
  }
  const double e = std::exp(z);
  return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

constexpr double kAlphaSwitch = 1e-8;
constexpr double kAlphaTildeSwitch = 1e-4;

}  // namespace

LinkValues mu_family(double z) {
  require_finite(z, "mu_family");
  const auto [m, one_minus] = mu_pair(z);
  const double slope = m * one_minus;
  return {m, slope, slope * (one_minus - m)};
}

double mu(double z) { return mu_pair(z).first; }

double mu_dot(double z) {
  const auto [m, one_minus] = mu_pair(z);
  return m * one_minus;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double slope_alpha(double z1, double z2) {
  require_finite(z1, "slope_alpha");
  require_finite(z2, "slope_alpha");
  if (std::abs(z2 - z1) <= kAlphaSwitch) return mu_dot(z1);
  // Symmetric in (z1, z2); order so that lo < hi and the expm1 argument is negative.
  const double lo = std::min(z1, z2);
  const double hi = std::max(z1, z2);
  // mu(hi) - mu(lo) = mu(hi) (1 - mu(lo)) (1 - e^{lo - hi})
  const double diff = mu_pair(hi).first * mu_pair(lo).second * -std::expm1(lo - hi);
  return diff / (hi - lo);
}

double slope_alpha(const Vec& x, const Vec& theta1, const Vec& theta2) {
  require_finite(x, "slope_alpha");
  return slope_alpha(x.dot(theta1), x.dot(theta2));
}

double slope_alpha_tilde(double z1, double z2) {
  require_finite(z1, "slope_alpha_tilde");
  require_finite(z2, "slope_alpha_tilde");
  double a = z1;
  double b = z2 - z1;
  if (std::abs(b) <= kAlphaTildeSwitch) {
    const LinkValues f = mu_family(a);
    const double third = f.mu_dot * (1.0 - 6.0 * f.mu_dot);
    return f.mu_dot / 2.0 + b * f.mu_ddot / 6.0 + b * b * third / 24.0;
  }
  // mu_dot is even: evaluate on the side where mu(a) is small so that the
  // subtraction below does not cancel.
  if (a > 0) {
    a = -a;
    b = -b;
  }
  const double ma = mu(a);
  // softplus(a + b) - softplus(a)
  const double rise = b > 30.0 ? softplus(a + b) - softplus(a) : std::log1p(ma * std::expm1(b));
  return (rise / b - ma) / b;
}

double slope_alpha_tilde(const Vec& x, const Vec& theta1, const Vec& theta2) {
  require_finite(x, "slope_alpha_tilde");
  return slope_alpha_tilde(x.dot(theta1), x.dot(theta2));
}

std::string to_string(ArmSetKind kind) {
  switch (kind) {
    case ArmSetKind::Finite: return "finite";
    case ArmSetKind::UnitSphere: return "sphere";
    case ArmSetKind::UnitBall: return "ball";
  }
  return "unknown";
}

ArmSet ArmSet::finite(std::vector<Vec> arms) {
  if (arms.empty()) throw DomainError("finite arm set must be non-empty");
  const auto dim = arms.front().size();
  if (dim < 1) throw DomainError("arms must have dimension >= 1");
  for (const Vec& a : arms) {
    if (a.size() != dim) throw DomainError("arms must share one dimension");
    require_finite(a, "ArmSet::finite");
    if (a.norm() > 1.0 + 1e-12) throw DomainError("arm norm exceeds 1");
  }
  return ArmSet(ArmSetKind::Finite, static_cast<int>(dim), std::move(arms), std::nullopt);
}

namespace {
void check_round_set(int dim, std::optional<int> resolution) {
  if (dim < 1) throw DomainError("arm set dimension must be >= 1");
  if (resolution && *resolution < 8) throw DomainError("discretization resolution must be >= 8");
}
}  // namespace

ArmSet ArmSet::unit_sphere(int dim, std::optional<int> resolution) {
  check_round_set(dim, resolution);
  return ArmSet(ArmSetKind::UnitSphere, dim, {}, resolution);
}

ArmSet ArmSet::unit_ball(int dim, std::optional<int> resolution) {
  check_round_set(dim, resolution);
  return ArmSet(ArmSetKind::UnitBall, dim, {}, resolution);
}

std::vector<Vec> ArmSet::discretization() const {
  if (is_finite()) return arms_;
  if (dim_ == 1) return {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  if (dim_ != 2 || !resolution_) return {};
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(*resolution_));
  for (int k = 0; k < *resolution_; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / *resolution_;
    Vec p(2);
    p << std::cos(angle), std::sin(angle);
    pts.push_back(std::move(p));
  }
  return pts;
}

bool ArmSet::contains(const Vec& x) const {
  if (x.size() != dim_) return false;
  switch (kind_) {
    case ArmSetKind::Finite:
      for (const Vec& a : arms_)
        if ((a - x).norm() <= 1e-12) return true;
      return false;
    case ArmSetKind::UnitSphere: return std::abs(x.norm() - 1.0) <= 1e-12;
    case ArmSetKind::UnitBall: return x.norm() <= 1.0 + 1e-12;
  }
  return false;
}

ProblemInstance::ProblemInstance(Vec theta, double s, ArmSet arms)
    : theta_star(std::move(theta)), s_bound(s), arm_set(std::move(arms)) {
  require_finite(theta_star, "ProblemInstance");
  if (!(s_bound > 0) || !std::isfinite(s_bound)) throw DomainError("s_bound must be positive");
  if (theta_star.norm() > s_bound * (1 + 1e-12)) throw DomainError("||theta_star|| exceeds s_bound");
  if (theta_star.size() != arm_set.dim()) throw DomainError("theta_star and arm set dimensions differ");
}

std::string ProblemInstance::digest() const {
  std::ostringstream os;
  os << "theta=";
  for (Eigen::Index i = 0; i < theta_star.size(); ++i) os << exact_decimal(theta_star[i]) << ',';
  os << ";S=" << exact_decimal(s_bound) << ";kind=" << to_string(arm_set.kind()) << ";dim=" << arm_set.dim();
  if (arm_set.resolution()) os << ";res=" << *arm_set.resolution();
  for (const Vec& a : arm_set.arms()) {
    os << ";arm=";
    for (Eigen::Index i = 0; i < a.size(); ++i) os << exact_decimal(a[i]) << ',';
  }
  return hex_digest(os.str());
}

BestArm best_arm(const ArmSet& arm_set, const Vec& theta) {
  require_finite(theta, "best_arm");
  if (theta.size() != arm_set.dim()) throw DomainError("best_arm: dimension mismatch");
  if (arm_set.is_finite()) {
    const auto& arms = arm_set.arms();
    std::size_t best = 0;
    double value = arms[0].dot(theta);
    for (std::size_t i = 1; i < arms.size(); ++i) {
      const double v = arms[i].dot(theta);
      if (v > value) {
        value = v;
        best = i;
      }
    }
    return {arms[best], value, best};
  }
  const double n = theta.norm();
  if (n == 0.0) throw DomainError("best_arm: zero parameter has no best direction");
  return {theta / n, n, std::nullopt};
}

KappaSummary kappa_summary(const ProblemInstance& inst) {
  const Vec& th = inst.theta_star;
  KappaSummary k{};
  if (inst.arm_set.is_finite()) {
    k.kappa_star = 1.0 / mu_dot(best_arm(inst.arm_set, th).value);
    k.kappa_x = 0.0;
    k.kappa_global = 0.0;
    for (const Vec& x : inst.arm_set.arms()) {
      k.kappa_x = std::max(k.kappa_x, 1.0 / mu_dot(x.dot(th)));
      k.kappa_global = std::max(k.kappa_global, 1.0 / mu_dot(-inst.s_bound * x.norm()));
    }
    return k;
  }
  const double n = th.norm();
  // theta_star = 0 puts every arm at z = 0.
  k.kappa_star = 1.0 / mu_dot(n);
  k.kappa_x = 1.0 / mu_dot(-n);
  k.kappa_global = 1.0 / mu_dot(inst.s_bound);
  return k;
}

DetrimentalSet::DetrimentalSet(const ProblemInstance& inst) : theta_star_(inst.theta_star) {
  const double best_value =
      theta_star_.norm() == 0.0 && !inst.arm_set.is_finite() ? 0.0 : best_arm(inst.arm_set, theta_star_).value;
  margin_rule_ = best_value > 0;
  slope_threshold_ = mu_dot(best_value) / 2.0;
  if (inst.arm_set.is_finite()) {
    const auto& arms = inst.arm_set.arms();
    for (std::size_t i = 0; i < arms.size(); ++i)
      if (contains(arms[i])) members_.push_back(i);
  }
}

bool DetrimentalSet::contains(const Vec& x) const {
  const double z = x.dot(theta_star_);
  if (margin_rule_) return z <= -1.0;
  return mu_dot(z) <= slope_threshold_;
}

}  // namespace logbandit
