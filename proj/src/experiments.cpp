#include "logb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "logb/errors.hpp"

namespace logbandit {

namespace {

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

bool same_vecs(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_vec(a[i], b[i])) return false;
  return true;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

Vec unit_direction(const Vec& theta, int dim) {
  if (theta.size() == dim && theta.norm() > 0.0) return theta / theta.norm();
  return Vec::Unit(dim, 0);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::Coverage: return "coverage";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Transitory: return "transitory";
    case ExperimentKind::LowerBound: return "lowerbound";
    case ExperimentKind::VerifyLemmas: return "verify-lemmas";
  }
  return "run";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::Run, ExperimentKind::Coverage, ExperimentKind::Scaling, ExperimentKind::Transitory,
                 ExperimentKind::LowerBound, ExperimentKind::VerifyLemmas})
    if (to_string(k) == text) return k;
  if (text == "lower-bound" || text == "lower_bound") return ExperimentKind::LowerBound;
  if (text == "lemmas" || text == "verify_lemmas") return ExperimentKind::VerifyLemmas;
  return std::nullopt;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.kind == b.kind && a.dim == b.dim && a.horizon == b.horizon && a.replications == b.replications &&
         a.base_seed == b.base_seed && a.delta == b.delta && a.s_bound == b.s_bound &&
         a.lambda_floor == b.lambda_floor && same_vec(a.theta_star, b.theta_star) && a.arm_kind == b.arm_kind &&
         a.resolution == b.resolution && same_vecs(a.arms, b.arms) && a.norms == b.norms &&
         a.policy.name == b.policy.name && a.policy.kappa == b.policy.kappa && a.policy.epsilon == b.policy.epsilon &&
         a.policy.grid_resolution == b.policy.grid_resolution && a.solver.tol == b.solver.tol &&
         a.solver.max_iter == b.solver.max_iter && a.solver.restarts == b.solver.restarts &&
         a.packing_epsilon == b.packing_epsilon && a.checkpoint == b.checkpoint && a.lemma_cases == b.lemma_cases &&
         a.threads == b.threads && a.output_path == b.output_path && a.write_trajectories == b.write_trajectories;
}

double effective_s_bound(const ExperimentConfig& cfg, const Vec& theta_star) {
  return cfg.s_bound ? *cfg.s_bound : std::max(1.0, theta_star.norm());
}

ArmSet make_arm_set(const ExperimentConfig& cfg) {
  switch (cfg.arm_kind) {
    case ArmSetKind::Finite: return ArmSet::finite(cfg.arms);
    case ArmSetKind::UnitSphere: return ArmSet::unit_sphere(cfg.dim, cfg.resolution);
    case ArmSetKind::UnitBall: return ArmSet::unit_ball(cfg.dim, cfg.resolution);
  }
  throw DomainError("unknown arm set kind");
}

ProblemInstance make_instance(const ExperimentConfig& cfg, const Vec& theta_star) {
  return ProblemInstance(theta_star, effective_s_bound(cfg, theta_star), make_arm_set(cfg));
}

LearnerConfig make_learner(const ExperimentConfig& cfg, double s_bound) {
  LearnerConfig lc;
  lc.confidence.delta = cfg.delta;
  lc.confidence.s_bound = s_bound;
  lc.confidence.schedule = RegSchedule{cfg.dim, cfg.lambda_floor};
  lc.solver = cfg.solver;
  return lc;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<TrajectoryLog> run_replications(const ProblemInstance& inst, const PolicyFactory& factory, long horizon,
                                            int replications, std::uint64_t base_seed, int threads,
                                            const EpisodeOptions& opts) {
  std::vector<TrajectoryLog> logs(static_cast<std::size_t>(std::max(0, replications)));
  parallel_for(replications, threads, [&](int k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    auto policy = factory(seed);
    logs[static_cast<std::size_t>(k)] = run_episode(*policy, inst, horizon, seed, opts);
  });
  return logs;
}

// --- coverage --------------------------------------------------------------

CoverageReport coverage_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::Coverage) throw DomainError("coverage_experiment: kind must be coverage");
  const ProblemInstance inst = make_instance(cfg, cfg.theta_star);
  const LearnerConfig lc = make_learner(cfg, inst.s_bound);
  const std::vector<Vec> dictionary = logging_dictionary(inst.arm_set);

  CoverageReport rep{};
  rep.replications.resize(static_cast<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, cfg.threads, [&](int k) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(k);
    CounterRng rng(seed, 0x72657761);
    History h(inst.dim());
    std::optional<Vec> warm;
    CoverageReplication r{seed, true, true, 0, 0, 0.0, 0.0};
    for (long t = 1; t <= cfg.horizon; ++t) {
      const ConfidenceState st = build_confidence_state(h, lc.confidence, warm);
      warm = st.theta_hat;
      const double cstat = c_statistic(inst.theta_star, h, st);
      const double gap = log_loss(h, inst.theta_star, st.lambda) - st.loss_at_hat;
      r.worst_ratio_C = std::max(r.worst_ratio_C, cstat / st.gamma);
      r.worst_ratio_E = std::max(r.worst_ratio_E, gap / (st.beta * st.beta));
      if (r.covered_C && !in_C(inst.theta_star, h, st)) {
        r.covered_C = false;
        r.first_miss_C = t;
      }
      if (r.covered_E && !in_E(inst.theta_star, h, st)) {
        r.covered_E = false;
        r.first_miss_E = t;
      }
      const Vec& arm = dictionary[static_cast<std::size_t>(h.size()) % dictionary.size()];
      h.append(arm, step(inst, arm, rng));
    }
    rep.replications[static_cast<std::size_t>(k)] = r;
  });

  const double n = static_cast<double>(std::max(1, cfg.replications));
  double hits_C = 0.0, hits_E = 0.0;
  rep.e_dominates_c = true;
  for (const auto& r : rep.replications) {
    hits_C += r.covered_C ? 1.0 : 0.0;
    hits_E += r.covered_E ? 1.0 : 0.0;
    if (r.covered_C && !r.covered_E) rep.e_dominates_c = false;
  }
  rep.coverage_C = hits_C / n;
  rep.coverage_E = hits_E / n;
  rep.standard_error = std::sqrt(cfg.delta * (1.0 - cfg.delta) / n);
  rep.threshold = 1.0 - cfg.delta - 3.0 * rep.standard_error;
  rep.degenerate_delta = cfg.delta >= 1.0;
  rep.pass = !rep.degenerate_delta && rep.coverage_C >= rep.threshold && rep.e_dominates_c &&
             rep.coverage_E >= rep.coverage_C;
  return rep;
}

// --- regret / transitory ---------------------------------------------------

RegretSummary summarize_regret(const ProblemInstance& inst, const std::vector<TrajectoryLog>& logs, long checkpoint) {
  RegretSummary s{};
  s.norm = inst.theta_star.norm();
  s.s_bound = inst.s_bound;
  s.kappa = kappa_summary(inst);
  s.horizon = 0;
  s.checkpoint = checkpoint;
  for (const auto& log : logs) {
    const auto regret = regret_series(log, inst);
    const auto counts = detrimental_count_series(log, inst);
    const auto weighted = weighted_detrimental_series(log, inst);
    s.horizon = std::max<long>(s.horizon, static_cast<long>(log.records.size()));
    s.final_regret.push_back(regret.empty() ? 0.0 : regret.back());
    const std::size_t cp = std::min<std::size_t>(static_cast<std::size_t>(std::max(0L, checkpoint)), counts.size());
    s.detrimental_at_checkpoint.push_back(cp == 0 ? 0 : counts[cp - 1]);
    s.detrimental_final.push_back(counts.empty() ? 0 : counts.back());
    s.weighted_detrimental_final.push_back(weighted.empty() ? 0.0 : weighted.back());
    if (log.error) s.errors.push_back("seed " + std::to_string(log.seed) + ": " + *log.error);
    for (const auto& rec : log.records) {
      if (!rec.diagnostics) continue;
      ++s.rounds_checked;
      if (!rec.diagnostics->theta_star_in_E) continue;
      ++s.rounds_theta_in_E;
      if (!rec.diagnostics->optimism_holds) ++s.optimism_violations;
      if (rec.diagnostics->deviation_lhs > rec.diagnostics->deviation_rhs) ++s.deviation_violations;
    }
  }
  s.mean_regret = mean_of(s.final_regret);
  s.se_regret = se_of(s.final_regret);
  s.normalizer = inst.dim() * std::sqrt(static_cast<double>(s.horizon) / s.kappa.kappa_x);
  s.normalized_ratio = s.normalizer > 0.0 ? s.mean_regret / s.normalizer : 0.0;
  return s;
}

namespace {

std::vector<RegretSummary> regret_sweep(const ExperimentConfig& cfg,
                                        std::vector<std::vector<TrajectoryLog>>* logs_out, bool diagnostics) {
  const Vec dir = unit_direction(cfg.theta_star, cfg.dim);
  std::vector<double> norms = cfg.norms;
  if (norms.empty()) norms.push_back(cfg.theta_star.size() == cfg.dim ? cfg.theta_star.norm() : 1.0);
  std::vector<RegretSummary> out;
  for (double norm : norms) {
    const ProblemInstance inst = make_instance(cfg, dir * norm);
    const LearnerConfig lc = make_learner(cfg, inst.s_bound);
    PolicyFactory factory = [&](std::uint64_t seed) { return make_policy(cfg.policy, inst, lc, seed); };
    EpisodeOptions opts;
    opts.diagnostics = diagnostics;
    auto logs = run_replications(inst, factory, cfg.horizon, cfg.replications, cfg.base_seed, cfg.threads, opts);
    out.push_back(summarize_regret(inst, logs, cfg.checkpoint));
    if (logs_out) logs_out->push_back(std::move(logs));
  }
  return out;
}

}  // namespace

ScalingReport scaling_experiment(const ExperimentConfig& cfg, std::vector<std::vector<TrajectoryLog>>* logs) {
  ScalingReport rep{};
  rep.instances = regret_sweep(cfg, logs, true);
  std::vector<const RegretSummary*> by_kappa;
  for (const auto& s : rep.instances) by_kappa.push_back(&s);
  std::stable_sort(by_kappa.begin(), by_kappa.end(),
                   [](const RegretSummary* a, const RegretSummary* b) { return a->kappa.kappa_x < b->kappa.kappa_x; });
  rep.regret_decreasing_in_kappa = true;
  for (std::size_t i = 1; i < by_kappa.size(); ++i)
    if (!(by_kappa[i]->mean_regret < by_kappa[i - 1]->mean_regret)) rep.regret_decreasing_in_kappa = false;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < rep.instances.size(); ++i) {
    const double r = rep.instances[i].normalized_ratio;
    lo = i == 0 ? r : std::min(lo, r);
    hi = i == 0 ? r : std::max(hi, r);
  }
  rep.ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  rep.diagnostics_clean = true;
  for (const auto& s : rep.instances)
    if (s.optimism_violations > 0 || s.deviation_violations > 0 || !s.errors.empty()) rep.diagnostics_clean = false;
  rep.pass = rep.regret_decreasing_in_kappa && rep.ratio_spread < 3.0 && rep.diagnostics_clean;
  return rep;
}

TransitoryInstance transitory_check(const RegretSummary& summary, int dim) {
  TransitoryInstance ti{};
  ti.summary = summary;
  ti.envelope = 50.0 * dim * dim * dim * std::log(static_cast<double>(std::max(2L, summary.horizon)));
  std::size_t plateau = 0;
  for (std::size_t i = 0; i < summary.detrimental_final.size(); ++i) {
    const long fin = summary.detrimental_final[i];
    const long early = summary.detrimental_at_checkpoint[i];
    if (static_cast<double>(fin - early) <= 0.1 * static_cast<double>(fin)) ++plateau;
    ti.max_final = std::max(ti.max_final, static_cast<double>(fin));
  }
  const std::size_t n = summary.detrimental_final.size();
  ti.plateau_fraction = n == 0 ? 0.0 : static_cast<double>(plateau) / static_cast<double>(n);
  ti.pass = n > 0 && ti.plateau_fraction >= 0.8 && ti.max_final <= ti.envelope && summary.errors.empty();
  return ti;
}

TransitoryReport transitory_experiment(const ExperimentConfig& cfg, std::vector<std::vector<TrajectoryLog>>* logs) {
  TransitoryReport rep{};
  rep.pass = true;
  for (const auto& s : regret_sweep(cfg, logs, false)) {
    rep.instances.push_back(transitory_check(s, cfg.dim));
    rep.pass = rep.pass && rep.instances.back().pass;
  }
  return rep;
}

// --- lower bound -----------------------------------------------------------

Vec PackingSpec::flip(int coordinate, const Vec& member) const {
  if (coordinate < 2 || coordinate > member.size())
    throw DomainError("flip: coordinate must lie in [2, d]");
  Vec out = member;
  out[coordinate - 1] = -out[coordinate - 1];
  return out;
}

PackingSpec build_packing(const Vec& theta_star, double epsilon) {
  const int d = static_cast<int>(theta_star.size());
  if (d < 2) throw DomainError("build_packing: d >= 2 required");
  if (!(epsilon > 0.0)) throw DomainError("build_packing: epsilon must be positive");
  const double norm = theta_star.norm();
  if (!(theta_star[0] > 0.0) || std::abs(theta_star[0] - norm) > 1e-12 * norm)
    throw DomainError("build_packing: theta_star must be aligned with e_1");
  if (epsilon > norm / std::sqrt(static_cast<double>(d - 1)))
    throw DomainError("build_packing: epsilon exceeds ||theta_star|| / sqrt(d - 1)");
  if (d - 1 >= 62) throw DomainError("build_packing: dimension too large to enumerate");
  PackingSpec p{theta_star, epsilon, {}};
  const std::uint64_t count = std::uint64_t{1} << (d - 1);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    Vec m = theta_star;
    for (int i = 1; i < d; ++i) m[i] += ((mask >> (i - 1)) & 1U) ? -epsilon : epsilon;
    p.members.push_back(std::move(m));
  }
  const double ref = p.members.front().norm();
  for (const auto& m : p.members)
    if (std::abs(m.norm() - ref) > 1e-12 * ref) throw DomainError("build_packing: members differ in norm");
  return p;
}

double epsilon_for_horizon(double kappa_eps, long horizon) {
  if (!(kappa_eps > 0.0) || horizon <= 0) throw DomainError("epsilon_for_horizon: positive inputs required");
  return std::sqrt(std::sqrt(kappa_eps / static_cast<double>(horizon)) / 32.0);
}

std::pair<double, double> tuned_packing_epsilon(const Vec& theta_star, long horizon) {
  const double n2 = theta_star.squaredNorm();
  const double k = static_cast<double>(theta_star.size() - 1);
  double eps = epsilon_for_horizon(1.0 / mu_dot(std::sqrt(n2)), horizon);
  double kappa = 0.0;
  for (int it = 0; it < 100; ++it) {
    kappa = 1.0 / mu_dot(std::sqrt(n2 + k * eps * eps));
    const double next = epsilon_for_horizon(kappa, horizon);
    const bool done = std::abs(next - eps) <= 1e-15 * eps;
    eps = next;
    if (done) break;
  }
  kappa = 1.0 / mu_dot(std::sqrt(n2 + k * eps * eps));
  return {eps, kappa};
}

LowerBoundReport lower_bound_experiment(const ExperimentConfig& cfg, std::vector<std::vector<TrajectoryLog>>* logs) {
  const int d = cfg.dim;
  const Vec theta_star = cfg.theta_star.size() == d ? cfg.theta_star : Vec(Vec::Unit(d, 0) * 2.0);
  LowerBoundReport rep{};
  if (cfg.packing_epsilon) {
    rep.epsilon = *cfg.packing_epsilon;
  } else {
    rep.epsilon = tuned_packing_epsilon(theta_star, cfg.horizon).first;
  }
  const PackingSpec packing = build_packing(theta_star, rep.epsilon);
  const double member_norm = packing.members.front().norm();
  rep.kappa_eps = 1.0 / mu_dot(member_norm);
  rep.reference = d * std::sqrt(static_cast<double>(cfg.horizon) / rep.kappa_eps);
  rep.out_of_regime = static_cast<double>(cfg.horizon) < d * d * rep.kappa_eps;
  rep.members = packing.members;
  rep.fixed_threshold =
      0.5 * (static_cast<double>(cfg.horizon) / rep.kappa_eps) * rep.epsilon * rep.epsilon / (2.0 * theta_star.norm());

  const Vec nominal_arm = Vec::Unit(d, 0);
  for (std::size_t m = 0; m < packing.members.size(); ++m) {
    const Vec& member = packing.members[m];
    const double s = cfg.s_bound ? std::max(*cfg.s_bound, member_norm) : member_norm;
    const ProblemInstance inst(member, s, make_arm_set(cfg));
    const LearnerConfig lc = make_learner(cfg, s);
    PolicyFactory learner = [&](std::uint64_t seed) { return make_policy(cfg.policy, inst, lc, seed); };
    auto runs = run_replications(inst, learner, cfg.horizon, cfg.replications, cfg.base_seed, cfg.threads);
    const RegretSummary sum = summarize_regret(inst, runs, cfg.horizon);
    rep.member_mean_regret.push_back(sum.mean_regret);
    rep.member_se.push_back(sum.se_regret);
    for (const auto& e : sum.errors) rep.errors.push_back("member " + std::to_string(m) + " " + e);

    for (int i = 2; i <= d; ++i) {
      const Vec flipped = packing.flip(i, member);
      std::vector<double> kl;
      for (const auto& log : runs) kl.push_back(kl_traj_bound(log, member, flipped));
      rep.kl.push_back(KlDiagnostic{m, i, mean_of(kl), se_of(kl)});
    }

    PolicyFactory fixed = [&](std::uint64_t) {
      return std::unique_ptr<Policy>(new FixedArmPolicy(nominal_arm, "fixed-nominal"));
    };
    auto fixed_runs = run_replications(inst, fixed, cfg.horizon, 1, cfg.base_seed, 1);
    rep.fixed_member_regret.push_back(summarize_regret(inst, fixed_runs, cfg.horizon).mean_regret);
    if (logs) {
      logs->push_back(std::move(runs));
      logs->push_back(std::move(fixed_runs));
    }
  }
  rep.worst_mean_regret = *std::max_element(rep.member_mean_regret.begin(), rep.member_mean_regret.end());
  rep.fixed_worst_regret = *std::max_element(rep.fixed_member_regret.begin(), rep.fixed_member_regret.end());
  rep.ratio = rep.worst_mean_regret / rep.reference;
  rep.pass = rep.errors.empty() && rep.ratio >= 0.02 && rep.fixed_worst_regret >= rep.fixed_threshold;
  return rep;
}

}  // namespace logbandit
