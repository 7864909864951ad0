#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logb/planning.hpp"
#include "logb/rng.hpp"

namespace logbandit {

struct Decision {
  Vec arm;
  std::optional<std::size_t> arm_index;
  std::optional<double> optimistic_value;
  std::optional<Vec> theta_tilde;
  /// Belief the decision was planned from, for diagnostics.
  std::shared_ptr<const ConfidenceState> state;
};

/// A policy maps the history to the next arm. Implementations may keep a
/// warm-start cache; they are owned by one replication and never shared.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::string parameters() const { return ""; }
  /// Deterministic given (history, t, the policy's own seeded state).
  virtual Decision next_arm(const History& h, long t) = 0;
};

struct LearnerConfig {
  ConfidenceParams confidence;
  SolverOpts solver;
};

/// Optimistic planning over the relaxed set E_t(delta). Finite arm sets use
/// per-arm subproblems; sphere/ball sets use alternating maximization, over
/// the discretized circle when a resolution is given.
class OFULogRPolicy : public Policy {
 public:
  OFULogRPolicy(ArmSet arms, LearnerConfig cfg);
  std::string name() const override { return "ofulog-r"; }
  std::string parameters() const override;
  Decision next_arm(const History& h, long t) override;

 private:
  ArmSet arm_set_;
  LearnerConfig cfg_;
  std::vector<Vec> grid_;
  std::optional<Vec> warm_;
  std::optional<Vec> last_direction_;
};

/// Exact optimistic planning over the non-convex C_t(delta) by grid search
/// (d <= 2).
class OFULogGridPolicy : public Policy {
 public:
  OFULogGridPolicy(ArmSet arms, LearnerConfig cfg, int resolution);
  std::string name() const override { return "ofulog-grid"; }
  std::string parameters() const override;
  Decision next_arm(const History& h, long t) override;

 private:
  ArmSet arm_set_;
  LearnerConfig cfg_;
  int resolution_;
  std::optional<Vec> warm_;
};

/// Bonus-based baseline whose exploration term scales with kappa.
class GlmUcbKappaPolicy : public Policy {
 public:
  GlmUcbKappaPolicy(ArmSet arms, LearnerConfig cfg, double kappa);
  std::string name() const override { return "glm-ucb"; }
  std::string parameters() const override;
  Decision next_arm(const History& h, long t) override;

 private:
  ArmSet arm_set_;
  std::vector<Vec> arms_;
  LearnerConfig cfg_;
  double kappa_;
  std::optional<Vec> warm_;
};

class EpsilonGreedyPolicy : public Policy {
 public:
  EpsilonGreedyPolicy(ArmSet arms, LearnerConfig cfg, double epsilon, std::uint64_t seed);
  std::string name() const override { return "epsilon-greedy"; }
  std::string parameters() const override;
  Decision next_arm(const History& h, long t) override;

 private:
  std::vector<Vec> arms_;
  LearnerConfig cfg_;
  double epsilon_;
  CounterRng rng_;
  std::optional<Vec> warm_;
};

/// Plays x_star(theta_star). Diagnostic only: it reads the hidden parameter.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const ProblemInstance& inst);
  std::string name() const override { return "oracle"; }
  Decision next_arm(const History& h, long t) override;

 private:
  BestArm best_;
};

/// Always plays the same arm.
class FixedArmPolicy : public Policy {
 public:
  explicit FixedArmPolicy(Vec arm, std::string label = "fixed-arm");
  std::string name() const override { return label_; }
  Decision next_arm(const History& h, long t) override;

 private:
  Vec arm_;
  std::string label_;
};

/// Cycles through a fixed arm dictionary; used as the logging policy of the
/// coverage experiment.
class RoundRobinPolicy : public Policy {
 public:
  explicit RoundRobinPolicy(std::vector<Vec> arms);
  std::string name() const override { return "round-robin"; }
  Decision next_arm(const History& h, long t) override;

 private:
  std::vector<Vec> arms_;
};

/// Fixed dictionary for logging policies: the arms of a finite set, the
/// discretization of a round set (8 points when no resolution is given in
/// d = 2), or +-e_i in higher dimensions.
std::vector<Vec> logging_dictionary(const ArmSet& arm_set);

struct PolicySpec {
  std::string name = "ofulog-r";
  /// glm-ucb: kappa multiplier; kappa_global of the instance when unset.
  std::optional<double> kappa;
  double epsilon = 0.1;
  int grid_resolution = 100;
};

/// Builds a policy by name: ofulog-r, ofulog-grid, glm-ucb, epsilon-greedy,
/// oracle, round-robin.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ProblemInstance& inst, const LearnerConfig& cfg,
                                    std::uint64_t seed);

}  // namespace logbandit
