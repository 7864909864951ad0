#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logb/policy.hpp"

namespace logbandit {

/// Bernoulli reward with mean mu(arm . theta_star).
int step(const ProblemInstance& inst, const Vec& arm, CounterRng& rng);

/// Per-round checks that need the hidden parameter; only filled when the
/// policy exposes its belief and diagnostics are requested.
struct RoundDiagnostics {
  bool theta_star_in_E = false;
  bool theta_star_in_C = false;
  /// optimistic value >= x_star . theta_star - 1e-6 (only meaningful when
  /// theta_star_in_E).
  bool optimism_holds = true;
  /// ||theta_tilde - theta_star||_{H_t(theta_star)} and 2(1+2S) gamma_t.
  double deviation_lhs = 0.0;
  double deviation_rhs = 0.0;
};

struct TrajectoryRecord {
  long t;
  Vec arm;
  std::optional<std::size_t> arm_index;
  int reward;
  double expected_reward;
  double instant_regret;
  bool in_x_minus;
  std::optional<double> optimistic_value;
  std::optional<RoundDiagnostics> diagnostics;
};

struct TrajectoryLog {
  std::uint64_t seed = 0;
  std::string policy_name;
  std::string instance_digest;
  std::vector<TrajectoryRecord> records;
  /// Set when the episode was aborted; records hold the partial run.
  std::optional<std::string> error;
};

struct EpisodeOptions {
  bool diagnostics = false;
  /// Also evaluate theta_star in C_t (one extra Hessian factorization).
  bool check_C = false;
};

/// Learn / plan / act loop for T rounds. The reward stream is keyed on the
/// seed alone, so two policies run with one seed see the same coin flips for
/// identical arms.
TrajectoryLog run_episode(Policy& policy, const ProblemInstance& inst, long horizon, std::uint64_t seed,
                          const EpisodeOptions& opts = {});

/// Prefix sums of instantaneous regret. Throws DomainError when the log was
/// produced against another instance.
std::vector<double> regret_series(const TrajectoryLog& log, const ProblemInstance& inst);
/// Prefix counts of detrimental-arm plays.
std::vector<long> detrimental_count_series(const TrajectoryLog& log, const ProblemInstance& inst);
/// Same counts weighted by mu(x_star . theta_star).
std::vector<double> weighted_detrimental_series(const TrajectoryLog& log, const ProblemInstance& inst);

/// sum_t (mu(x_t.theta) - mu(x_t.theta'))^2 / mu_dot(x_t.theta') along the
/// realized arms: a single-trajectory plug-in for the KL upper bound.
double kl_traj_bound(const TrajectoryLog& log, const Vec& theta, const Vec& theta_prime);

inline constexpr const char* kTrajectoryHeader =
    "t,arm_index,arm_coords,reward,expected_reward,instant_regret,cum_regret,in_x_minus,optimistic_value";

/// CSV with kTrajectoryHeader; reals with 12 significant digits, coordinates
/// joined by ';', arm_index -1 for continuous arms, empty optimistic_value
/// when the policy reports none.
void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log);

}  // namespace logbandit
