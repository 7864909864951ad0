#include "logb/episode.hpp"

#include <ostream>

#include "logb/digest.hpp"
#include "logb/errors.hpp"

namespace logbandit {

int step(const ProblemInstance& inst, const Vec& arm, CounterRng& rng) {
  return rng.bernoulli(mu(arm.dot(inst.theta_star))) ? 1 : 0;
}

namespace {
double best_mean(const ProblemInstance& inst) {
  if (!inst.arm_set.is_finite() && inst.theta_star.norm() == 0.0) return 0.5;
  return mu(best_arm(inst.arm_set, inst.theta_star).value);
}
}  // namespace

TrajectoryLog run_episode(Policy& policy, const ProblemInstance& inst, long horizon, std::uint64_t seed,
                          const EpisodeOptions& opts) {
  TrajectoryLog log;
  log.seed = seed;
  log.policy_name = policy.name();
  log.instance_digest = inst.digest();
  if (horizon <= 0) return log;
  log.records.reserve(static_cast<std::size_t>(horizon));

  CounterRng rewards(seed, 0x72657761ULL);
  const DetrimentalSet detrimental(inst);
  const double top = best_mean(inst);
  const double top_value = inst.arm_set.is_finite() || inst.theta_star.norm() > 0
                               ? best_arm(inst.arm_set, inst.theta_star).value
                               : 0.0;
  History h(inst.dim());
  for (long t = 1; t <= horizon; ++t) {
    Decision d;
    try {
      d = policy.next_arm(h, t);
    } catch (const std::exception& e) {
      log.error = "round " + std::to_string(t) + ": " + e.what();
      return log;
    }
    TrajectoryRecord rec;
    rec.t = t;
    rec.arm = d.arm;
    rec.arm_index = d.arm_index;
    rec.expected_reward = mu(d.arm.dot(inst.theta_star));
    rec.instant_regret = std::max(0.0, top - rec.expected_reward);
    rec.in_x_minus = detrimental.contains(d.arm);
    rec.optimistic_value = d.optimistic_value;
    if (opts.diagnostics && d.state) {
      RoundDiagnostics diag;
      const ConfidenceState& st = *d.state;
      diag.theta_star_in_E = in_E(inst.theta_star, h, st);
      if (opts.check_C) diag.theta_star_in_C = in_C(inst.theta_star, h, st);
      if (d.optimistic_value) diag.optimism_holds = *d.optimistic_value >= top_value - 1e-6;
      if (d.theta_tilde) {
        const BoundCheck dev = deviation_bound(*d.theta_tilde, inst.theta_star, h, st);
        diag.deviation_lhs = dev.lhs;
        diag.deviation_rhs = dev.rhs;
      }
      rec.diagnostics = diag;
    }
    rec.reward = step(inst, d.arm, rewards);
    h.append(d.arm, rec.reward);
    log.records.push_back(std::move(rec));
  }
  return log;
}

namespace {
void check_digest(const TrajectoryLog& log, const ProblemInstance& inst) {
  if (log.instance_digest != inst.digest()) throw DomainError("trajectory log belongs to a different instance");
}
}  // namespace

std::vector<double> regret_series(const TrajectoryLog& log, const ProblemInstance& inst) {
  check_digest(log, inst);
  std::vector<double> out;
  out.reserve(log.records.size());
  double acc = 0.0;
  for (const auto& r : log.records) out.push_back(acc += r.instant_regret);
  return out;
}

std::vector<long> detrimental_count_series(const TrajectoryLog& log, const ProblemInstance& inst) {
  check_digest(log, inst);
  std::vector<long> out;
  out.reserve(log.records.size());
  long acc = 0;
  for (const auto& r : log.records) out.push_back(acc += r.in_x_minus ? 1 : 0);
  return out;
}

std::vector<double> weighted_detrimental_series(const TrajectoryLog& log, const ProblemInstance& inst) {
  const double weight = best_mean(inst);
  std::vector<double> out;
  for (long c : detrimental_count_series(log, inst)) out.push_back(weight * static_cast<double>(c));
  return out;
}

double kl_traj_bound(const TrajectoryLog& log, const Vec& theta, const Vec& theta_prime) {
  double acc = 0.0;
  for (const auto& r : log.records) {
    const double zp = r.arm.dot(theta_prime);
    const double diff = mu(r.arm.dot(theta)) - mu(zp);
    acc += diff * diff / mu_dot(zp);
  }
  return acc;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  os << kTrajectoryHeader << '\n';
  double cum = 0.0;
  for (const auto& r : log.records) {
    cum += r.instant_regret;
    os << r.t << ',' << (r.arm_index ? static_cast<long long>(*r.arm_index) : -1LL) << ',';
    for (Eigen::Index i = 0; i < r.arm.size(); ++i) os << (i ? ";" : "") << fmt12(r.arm[i]);
    os << ',' << r.reward << ',' << fmt12(r.expected_reward) << ',' << fmt12(r.instant_regret) << ',' << fmt12(cum)
       << ',' << (r.in_x_minus ? 1 : 0) << ',';
    if (r.optimistic_value) os << fmt12(*r.optimistic_value);
    os << '\n';
  }
}

}  // namespace logbandit
