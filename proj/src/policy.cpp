#include "logb/policy.hpp"

#include <sstream>

#include "logb/digest.hpp"
#include "logb/errors.hpp"

namespace logbandit {

namespace {

std::shared_ptr<const ConfidenceState> refit(const History& h, const LearnerConfig& cfg, std::optional<Vec>& warm) {
  auto st = std::make_shared<const ConfidenceState>(build_confidence_state(h, cfg.confidence, warm));
  warm = st->theta_hat;
  return st;
}

std::string learner_parameters(const LearnerConfig& cfg) {
  std::ostringstream os;
  os << "delta=" << fmt12(cfg.confidence.delta) << ";S=" << fmt12(cfg.confidence.s_bound)
     << ";lambda_floor=" << fmt12(cfg.confidence.schedule.floor) << ";tol=" << fmt12(cfg.solver.tol)
     << ";restarts=" << cfg.solver.restarts;
  return os.str();
}

std::size_t argmax_dot(const std::vector<Vec>& arms, const Vec& theta) {
  std::size_t best = 0;
  double value = arms[0].dot(theta);
  for (std::size_t i = 1; i < arms.size(); ++i) {
    const double v = arms[i].dot(theta);
    if (v > value) {
      value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

OFULogRPolicy::OFULogRPolicy(ArmSet arms, LearnerConfig cfg)
    : arm_set_(std::move(arms)), cfg_(cfg), grid_(arm_set_.is_finite() ? std::vector<Vec>{} : arm_set_.discretization()) {}

std::string OFULogRPolicy::parameters() const {
  std::string p = learner_parameters(cfg_);
  if (arm_set_.resolution()) p += ";resolution=" + std::to_string(*arm_set_.resolution());
  return p;
}

Decision OFULogRPolicy::next_arm(const History& h, long) {
  auto st = refit(h, cfg_, warm_);
  PlanResult plan;
  if (arm_set_.is_finite()) {
    plan = plan_ofulog_r(h, *st, arm_set_.arms(), cfg_.solver);
  } else {
    BallPlanOptions ball;
    ball.grid = grid_;
    if (last_direction_) ball.extra_starts.push_back(*last_direction_);
    plan = plan_ball(h, *st, arm_set_.dim(), cfg_.solver, ball);
  }
  last_direction_ = plan.arm;
  return {plan.arm, plan.arm_index, plan.optimistic_value, plan.theta_tilde, std::move(st)};
}

OFULogGridPolicy::OFULogGridPolicy(ArmSet arms, LearnerConfig cfg, int resolution)
    : arm_set_(std::move(arms)), cfg_(cfg), resolution_(resolution) {
  if (arm_set_.dim() > 2) throw UnsupportedDimension("ofulog-grid supports d <= 2 only");
}

std::string OFULogGridPolicy::parameters() const {
  return learner_parameters(cfg_) + ";grid=" + std::to_string(resolution_);
}

Decision OFULogGridPolicy::next_arm(const History& h, long) {
  auto st = refit(h, cfg_, warm_);
  PlanResult plan = plan_grid_oracle(h, *st, arm_set_, SetChoice::C, resolution_);
  return {plan.arm, plan.arm_index, plan.optimistic_value, plan.theta_tilde, std::move(st)};
}

GlmUcbKappaPolicy::GlmUcbKappaPolicy(ArmSet arms, LearnerConfig cfg, double kappa)
    : arm_set_(std::move(arms)), arms_(arm_set_.discretization()), cfg_(cfg), kappa_(kappa) {
  if (arms_.empty()) throw DomainError("glm-ucb needs a finite or discretized arm set");
  if (!(kappa >= 4.0)) throw DomainError("glm-ucb: kappa must be >= 4");
}

std::string GlmUcbKappaPolicy::parameters() const { return learner_parameters(cfg_) + ";kappa=" + fmt12(kappa_); }

Decision GlmUcbKappaPolicy::next_arm(const History& h, long) {
  auto st = refit(h, cfg_, warm_);
  const std::size_t i = baseline_glm_ucb(h, *st, arms_, kappa_);
  return {arms_[i], i, std::nullopt, std::nullopt, std::move(st)};
}

EpsilonGreedyPolicy::EpsilonGreedyPolicy(ArmSet arms, LearnerConfig cfg, double epsilon, std::uint64_t seed)
    : arms_(arms.discretization()), cfg_(cfg), epsilon_(epsilon), rng_(seed, 0x65707367ULL) {
  if (arms_.empty()) throw DomainError("epsilon-greedy needs a finite or discretized arm set");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon-greedy: epsilon must lie in [0, 1]");
}

std::string EpsilonGreedyPolicy::parameters() const { return learner_parameters(cfg_) + ";epsilon=" + fmt12(epsilon_); }

Decision EpsilonGreedyPolicy::next_arm(const History& h, long) {
  auto st = refit(h, cfg_, warm_);
  const bool explore = rng_.bernoulli(epsilon_);
  const std::size_t i = explore ? rng_.below(arms_.size()) : argmax_dot(arms_, st->theta_hat);
  return {arms_[i], i, std::nullopt, std::nullopt, std::move(st)};
}

namespace {
BestArm oracle_arm(const ProblemInstance& inst) {
  if (!inst.arm_set.is_finite() && inst.theta_star.norm() == 0.0) return {Vec::Unit(inst.dim(), 0), 0.0, std::nullopt};
  return best_arm(inst.arm_set, inst.theta_star);
}
}  // namespace

OraclePolicy::OraclePolicy(const ProblemInstance& inst) : best_(oracle_arm(inst)) {}

Decision OraclePolicy::next_arm(const History&, long) { return {best_.arm, best_.index, std::nullopt, std::nullopt, {}}; }

FixedArmPolicy::FixedArmPolicy(Vec arm, std::string label) : arm_(std::move(arm)), label_(std::move(label)) {}

Decision FixedArmPolicy::next_arm(const History&, long) { return {arm_, std::nullopt, std::nullopt, std::nullopt, {}}; }

RoundRobinPolicy::RoundRobinPolicy(std::vector<Vec> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) throw DomainError("round-robin needs at least one arm");
}

Decision RoundRobinPolicy::next_arm(const History& h, long) {
  const std::size_t i = h.size() % arms_.size();
  return {arms_[i], i, std::nullopt, std::nullopt, {}};
}

std::vector<Vec> logging_dictionary(const ArmSet& arm_set) {
  if (arm_set.is_finite()) return arm_set.arms();
  if (arm_set.dim() == 2) {
    const int res = arm_set.resolution().value_or(8);
    return ArmSet::unit_sphere(2, res).discretization();
  }
  std::vector<Vec> out;
  for (int i = 0; i < arm_set.dim(); ++i) {
    out.push_back(Vec::Unit(arm_set.dim(), i));
    out.push_back(-Vec::Unit(arm_set.dim(), i));
  }
  return out;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ProblemInstance& inst, const LearnerConfig& cfg,
                                    std::uint64_t seed) {
  if (spec.name == "ofulog-r") return std::make_unique<OFULogRPolicy>(inst.arm_set, cfg);
  if (spec.name == "ofulog-grid") return std::make_unique<OFULogGridPolicy>(inst.arm_set, cfg, spec.grid_resolution);
  if (spec.name == "glm-ucb")
    return std::make_unique<GlmUcbKappaPolicy>(inst.arm_set, cfg, spec.kappa.value_or(kappa_summary(inst).kappa_global));
  if (spec.name == "epsilon-greedy")
    return std::make_unique<EpsilonGreedyPolicy>(inst.arm_set, cfg, spec.epsilon, seed);
  if (spec.name == "oracle") return std::make_unique<OraclePolicy>(inst);
  if (spec.name == "round-robin") return std::make_unique<RoundRobinPolicy>(logging_dictionary(inst.arm_set));
  throw DomainError("unknown policy '" + spec.name + "'");
}

}  // namespace logbandit
