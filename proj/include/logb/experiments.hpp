#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logb/episode.hpp"

namespace logbandit {

enum class ExperimentKind { Run, Coverage, Scaling, Transitory, LowerBound, VerifyLemmas };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Run;
  int dim = 2;
  long horizon = 1000;
  int replications = 1;
  std::uint64_t base_seed = 0;
  double delta = 0.1;
  /// Defaults to max(1, ||theta_star||) per instance.
  std::optional<double> s_bound;
  double lambda_floor = 1.0;

  Vec theta_star;
  ArmSetKind arm_kind = ArmSetKind::UnitBall;
  std::optional<int> resolution;
  std::vector<Vec> arms;
  /// scaling / transitory: the instances are theta_star rescaled to each norm.
  std::vector<double> norms;

  PolicySpec policy;
  SolverOpts solver;
  /// lowerbound: overrides the horizon-tuned epsilon.
  std::optional<double> packing_epsilon;
  /// transitory: early horizon whose detrimental count is compared to the
  /// final one.
  long checkpoint = 1000;
  int lemma_cases = 100000;

  int threads = 0;
  std::string output_path = "out";
  bool write_trajectories = true;
};

/// Field-wise equality; vectors of different sizes compare unequal.
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

double effective_s_bound(const ExperimentConfig& cfg, const Vec& theta_star);
ArmSet make_arm_set(const ExperimentConfig& cfg);
ProblemInstance make_instance(const ExperimentConfig& cfg, const Vec& theta_star);
LearnerConfig make_learner(const ExperimentConfig& cfg, double s_bound);

using PolicyFactory = std::function<std::unique_ptr<Policy>(std::uint64_t seed)>;

/// Runs replication k with seed base_seed + k, `threads` at a time (0 =
/// hardware concurrency). Output is ordered by replication index.
std::vector<TrajectoryLog> run_replications(const ProblemInstance& inst, const PolicyFactory& factory, long horizon,
                                            int replications, std::uint64_t base_seed, int threads,
                                            const EpisodeOptions& opts = {});

/// Calls fn(i) for i in [0, n) on a small worker pool.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// --- coverage --------------------------------------------------------------

struct CoverageReplication {
  std::uint64_t seed;
  bool covered_C;
  bool covered_E;
  /// First round at which theta_star left the set, 0 when it never did.
  long first_miss_C;
  long first_miss_E;
  /// max over rounds of the C-statistic / gamma_t, and of loss gap / beta_t^2.
  double worst_ratio_C;
  double worst_ratio_E;
};

struct CoverageReport {
  double coverage_C;
  double coverage_E;
  /// Binomial standard error at the nominal level 1 - delta.
  double standard_error;
  double threshold;
  bool degenerate_delta;
  /// Every replication covered by C is also covered by E.
  bool e_dominates_c;
  bool pass;
  std::vector<CoverageReplication> replications;
};

/// Round-robin logging over a fixed dictionary; checks theta_star in C_t and
/// E_t at every round of every replication.
CoverageReport coverage_experiment(const ExperimentConfig& cfg);

// --- regret / transitory ---------------------------------------------------

struct RegretSummary {
  double norm;
  double s_bound;
  KappaSummary kappa;
  long horizon;
  std::vector<double> final_regret;
  double mean_regret;
  double se_regret;
  /// d sqrt(T / kappa_X)
  double normalizer;
  double normalized_ratio;
  long checkpoint;
  std::vector<long> detrimental_at_checkpoint;
  std::vector<long> detrimental_final;
  std::vector<double> weighted_detrimental_final;
  long rounds_checked = 0;
  long rounds_theta_in_E = 0;
  long optimism_violations = 0;
  long deviation_violations = 0;
  std::vector<std::string> errors;
};

RegretSummary summarize_regret(const ProblemInstance& inst, const std::vector<TrajectoryLog>& logs, long checkpoint);

struct ScalingReport {
  std::vector<RegretSummary> instances;
  bool regret_decreasing_in_kappa;
  /// max / min of the normalized ratio across instances.
  double ratio_spread;
  bool diagnostics_clean;
  bool pass;
};

ScalingReport scaling_experiment(const ExperimentConfig& cfg, std::vector<std::vector<TrajectoryLog>>* logs = nullptr);

struct TransitoryInstance {
  RegretSummary summary;
  /// Fraction of seeds whose count grew by at most 10% of its final value
  /// between the checkpoint and T.
  double plateau_fraction;
  double envelope;  // 50 d^3 ln T
  double max_final;
  bool pass;
};

struct TransitoryReport {
  std::vector<TransitoryInstance> instances;
  bool pass;
};

TransitoryInstance transitory_check(const RegretSummary& summary, int dim);
TransitoryReport transitory_experiment(const ExperimentConfig& cfg,
                                       std::vector<std::vector<TrajectoryLog>>* logs = nullptr);

// --- lower bound -----------------------------------------------------------

struct PackingSpec {
  Vec theta_star;
  double epsilon;
  std::vector<Vec> members;

  /// Member with coordinate `coordinate` (1-based, >= 2) negated.
  Vec flip(int coordinate, const Vec& member) const;
};

/// All 2^{d-1} sign perturbations theta_star + eps sum_{i>=2} v_i e_i.
/// theta_star must be aligned with e_1, d >= 2 and
/// eps <= ||theta_star|| / sqrt(d - 1).
PackingSpec build_packing(const Vec& theta_star, double epsilon);

/// sqrt((1/32) sqrt(kappa_eps / T))
double epsilon_for_horizon(double kappa_eps, long horizon);

/// Epsilon tuned for T with kappa_eps evaluated at the packing's own norm
/// (fixed point of the two definitions), plus that kappa_eps.
std::pair<double, double> tuned_packing_epsilon(const Vec& theta_star, long horizon);

struct KlDiagnostic {
  std::size_t member;
  int coordinate;
  double mean;
  double standard_error;
};

struct LowerBoundReport {
  double epsilon;
  double kappa_eps;
  double reference;  // d sqrt(T / kappa_eps)
  bool out_of_regime;
  std::vector<Vec> members;
  std::vector<double> member_mean_regret;
  std::vector<double> member_se;
  double worst_mean_regret;
  double ratio;
  /// Constant policy playing x_star of the nominal parameter.
  std::vector<double> fixed_member_regret;
  double fixed_worst_regret;
  double fixed_threshold;  // 0.5 (T / kappa_eps) eps^2 / (2 ||theta_star||)
  std::vector<KlDiagnostic> kl;
  std::vector<std::string> errors;
  bool pass;
};

LowerBoundReport lower_bound_experiment(const ExperimentConfig& cfg,
                                        std::vector<std::vector<TrajectoryLog>>* logs = nullptr);

}  // namespace logbandit
