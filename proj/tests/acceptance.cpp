// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "logb/harness.hpp"
#include "logb/lemmas.hpp"
#include "oracles.hpp"

using namespace logbandit;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ConfidenceState random_state(CounterRng& rng, History& h, double& s) {
  s = rng.uniform(1.0, 3.0);
  h = oracle::random_history(rng, oracle::random_in_ball(rng, 2, s), 20 + static_cast<int>(rng.below(400)));
  ConfidenceParams p;
  p.s_bound = s;
  p.schedule = RegSchedule{2};
  return build_confidence_state(h, p);
}

Outcome coverage() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = coverage_experiment(preset_config(ExperimentKind::Coverage));
  const double secs = seconds_since(t0);
  return {rep.pass && secs < 300,
          fmt("coverage_C=%.3f coverage_E=%.3f threshold=%.3f E>=C on every replication=%s runtime=%.0fs",
              rep.coverage_C, rep.coverage_E, rep.threshold, rep.e_dominates_c ? "yes" : "no", secs)};
}

Outcome containment() {
  CounterRng rng(0xc0417);
  long in_c = 0, violations = 0, samples = 0;
  for (int state = 0; state < 50; ++state) {
    History h(2);
    double s = 0;
    const ConfidenceState st = random_state(rng, h, s);
    const Mat hess = hessian(h, st.theta_hat, st.lambda);
    const Eigen::LLT<Mat> chol(hess);
    for (int i = 0; i < 10000; ++i) {
      Vec theta;
      if (i % 2 == 0) {
        theta = oracle::random_in_ball(rng, 2, s);
      } else {
        // Near theta_hat on the scale of the C-radius.
        const Vec z = oracle::random_in_ball(rng, 2, 1.0) * st.gamma * rng.uniform(0.0, 3.0);
        theta = st.theta_hat + chol.matrixU().solve(z);
      }
      ++samples;
      if (in_C(theta, h, st)) {
        ++in_c;
        if (!in_E(theta, h, st)) ++violations;
      }
    }
  }
  return {violations == 0 && in_c > 0,
          fmt("states=50 samples=%ld in_C=%ld violations=%ld", samples, in_c, violations)};
}

struct RegretRuns {
  ScalingReport scaling;
  double seconds;
};

Outcome scaling(const RegretRuns& r) {
  std::string detail;
  for (const auto& s : r.scaling.instances)
    detail += fmt("norm=%g kappa_X=%.2f regret=%.1f±%.1f ratio=%.2f; ", s.norm, s.kappa.kappa_x, s.mean_regret,
                  s.se_regret, s.normalized_ratio);
  detail += fmt("decreasing=%s spread=%.2f runtime=%.0fs", r.scaling.regret_decreasing_in_kappa ? "yes" : "no",
                r.scaling.ratio_spread, r.seconds);
  return {r.scaling.regret_decreasing_in_kappa && r.scaling.ratio_spread < 3.0 && r.seconds < 1800, detail};
}

const RegretSummary* at_norm(const ScalingReport& rep, double norm) {
  for (const auto& s : rep.instances)
    if (s.norm == norm) return &s;
  return nullptr;
}

Outcome separation(const RegretRuns& r) {
  const RegretSummary* ofu = at_norm(r.scaling, 3.0);
  if (!ofu) return {false, "no norm-3 instance"};
  auto cfg = preset_config(ExperimentKind::Transitory);
  cfg.policy.name = "glm-ucb";
  const auto rep = transitory_experiment(cfg);
  const RegretSummary& glm = rep.instances.at(0).summary;
  const double ratio = glm.mean_regret / ofu->mean_regret;
  return {ratio >= 2.0 && glm.errors.empty(),
          fmt("glm-ucb(kappa=%.2f)=%.1f ofulog-r=%.1f ratio=%.2f", glm.kappa.kappa_global, glm.mean_regret,
              ofu->mean_regret, ratio)};
}

Outcome transitory(const RegretRuns& r) {
  const RegretSummary* s = at_norm(r.scaling, 3.0);
  if (!s) return {false, "no norm-3 instance"};
  const auto t = transitory_check(*s, 2);
  return {t.pass, fmt("plateau on %.0f%% of seeds, max final count=%g, envelope=%.0f", 100 * t.plateau_fraction,
                      t.max_final, t.envelope)};
}

Outcome diagnostics(const RegretRuns& r) {
  long checked = 0, in_e = 0, opt = 0, dev = 0, errors = 0;
  for (const auto& s : r.scaling.instances) {
    checked += s.rounds_checked;
    in_e += s.rounds_theta_in_E;
    opt += s.optimism_violations;
    dev += s.deviation_violations;
    errors += static_cast<long>(s.errors.size());
  }
  return {in_e > 0 && opt == 0 && dev == 0 && errors == 0,
          fmt("rounds=%ld with theta_star in E=%ld optimism violations=%ld deviation violations=%ld", checked, in_e,
              opt, dev)};
}

Outcome planners() {
  CounterRng rng(0x91a4);
  std::vector<Vec> circle;
  for (int k = 0; k < 720; ++k) {
    const double a = 2 * M_PI * k / 720;
    circle.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
  }
  int finite_bad = 0, ball_bad = 0;
  double worst_finite = 0, worst_ball = 0;
  for (int state = 0; state < 50; ++state) {
    History h(2);
    double s = 0;
    ConfidenceState st = random_state(rng, h, s);
    // Shrunk radii so the loss constraint binds inside the ball.
    st.gamma = rng.uniform(0.3, 1.5);
    st.beta = beta_radius(st.gamma, st.lambda);

    std::vector<Vec> arms;
    for (int k = 0; k < 5; ++k) arms.push_back(oracle::random_in_ball(rng, 2, 1.0));
    const auto plan = plan_ofulog_r(h, st, arms);
    const auto grid = plan_grid_oracle(h, st, ArmSet::finite(arms), SetChoice::E, 400);
    const double slack = 2 * (2 * s / 399);
    const double diff = plan.optimistic_value - grid.optimistic_value;
    worst_finite = std::max(worst_finite, std::abs(diff));
    if (diff < -1e-9 || diff > slack || !in_E(plan.theta_tilde, h, st)) ++finite_bad;

    double sweep = -1e300;
    for (const Vec& u : circle) sweep = std::max(sweep, solve_linear_over_E(u, h, st, {}).value);
    BallPlanOptions opts;
    opts.grid = circle;
    const auto ball = plan_ball(h, st, 2, {}, opts);
    worst_ball = std::max(worst_ball, std::abs(ball.optimistic_value - sweep));
    if (std::abs(ball.optimistic_value - sweep) > 1e-3 || !in_E(ball.theta_tilde, h, st)) ++ball_bad;
  }
  return {finite_bad == 0 && ball_bad == 0,
          fmt("finite mismatches=%d (worst |gap|=%.2e), ball mismatches=%d (worst |gap|=%.2e)", finite_bad,
              worst_finite, ball_bad, worst_ball)};
}

Outcome lemmas() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suites = verify_lemmas(100000, 0x1e33a);
  const double secs = seconds_since(t0);
  bool ok = secs < 120;
  std::string detail;
  for (const auto& s : suites) {
    ok = ok && s.pass() && s.cases >= 100000;
    detail += fmt("%s=%ld/%ld ", s.name.c_str(), s.violations, s.cases);
  }
  return {ok, detail + fmt("runtime=%.0fs", secs)};
}

Outcome lower_bound() {
  const auto rep = lower_bound_experiment(preset_config(ExperimentKind::LowerBound));
  return {rep.pass, fmt("eps=%.4f kappa_eps=%.3f worst mean regret=%.1f ratio=%.3f fixed-policy worst=%.4f "
                        "threshold=%.4f",
                        rep.epsilon, rep.kappa_eps, rep.worst_mean_regret, rep.ratio, rep.fixed_worst_regret,
                        rep.fixed_threshold)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "logb_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<ExperimentConfig> configs;
  for (auto kind : {ExperimentKind::Run, ExperimentKind::Coverage, ExperimentKind::Scaling, ExperimentKind::Transitory,
                    ExperimentKind::LowerBound, ExperimentKind::VerifyLemmas}) {
    auto c = preset_config(kind);
    c.horizon = std::min(c.horizon, 400L);
    c.replications = std::min(c.replications, 3);
    c.checkpoint = 100;
    c.lemma_cases = 2000;
    configs.push_back(c);
  }
  int files = 0, differing = 0;
  for (const auto& c : configs) {
    std::vector<std::string> outputs;
    for (const char* run : {"first", "second"}) {
      auto cc = c;
      cc.output_path = (root / to_string(c.kind) / run).string();
      outputs = run_experiment(cc).outputs;
    }
    for (const auto& name : outputs) {
      if (std::filesystem::path(name).extension() != ".csv") continue;
      ++files;
      const auto dir = root / to_string(c.kind);
      if (slurp(dir / "first" / name) != slurp(dir / "second" / name)) ++differing;
    }
  }
  std::filesystem::remove_all(root);
  return {files > 0 && differing == 0, fmt("experiments=%zu csv files=%d differing=%d", configs.size(), files,
                                           differing)};
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %2d %-22s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "coverage", coverage);
  report(2, "containment", containment);

  RegretRuns runs{};
  try {
    const auto t0 = std::chrono::steady_clock::now();
    runs.scaling = scaling_experiment(preset_config(ExperimentKind::Scaling));
    runs.seconds = seconds_since(t0);
  } catch (const std::exception& e) {
    std::printf("scaling runs failed: %s\n", e.what());
  }
  report(3, "regret-kappa scaling", [&] { return scaling(runs); });
  report(4, "baseline separation", [&] { return separation(runs); });
  report(5, "transitory phase", [&] { return transitory(runs); });
  report(6, "optimism and deviation", [&] { return diagnostics(runs); });
  report(7, "planners", planners);
  report(8, "lemma suites", lemmas);
  report(9, "lower bound", lower_bound);
  report(10, "determinism", determinism);
  return all ? 0 : 1;
}
