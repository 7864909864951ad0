#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "logb/digest.hpp"
#include "logb/harness.hpp"

using namespace logbandit;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal coverage config gets defaults") {
  const auto cfg = parse_config(R"(
experiment.kind = "coverage"
experiment.dim = 2
experiment.horizon = 2000
experiment.replications = 200
experiment.seed = 7
)");
  CHECK(cfg.kind == ExperimentKind::Coverage);
  CHECK(cfg.horizon == 2000);
  CHECK(cfg.replications == 200);
  CHECK(cfg.base_seed == 7);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.lambda_floor == 1.0);
  CHECK(cfg.theta_star == Vec::Unit(2, 0));
  CHECK(effective_s_bound(cfg, cfg.theta_star) == 1.0);
  CHECK(effective_s_bound(cfg, Vec::Unit(2, 0) * 3.0) == 3.0);
}

TEST_CASE("sections, comments and nested arrays") {
  const auto cfg = parse_config(R"(
# reference instance
[experiment]
kind = "run"   # inline comment
horizon = 50
[instance]
arm_set = "finite"
arms = [[1, 0], [0, -1], [-0.6, 0.8]]
theta_star = [2.0, -1.5]
[output]
path = "a#b"
trajectories = false
)");
  CHECK(cfg.dim == 2);
  CHECK(cfg.arms.size() == 3);
  CHECK(cfg.arms[2](1) == 0.8);
  CHECK(cfg.theta_star(1) == -1.5);
  CHECK(cfg.output_path == "a#b");
  CHECK_FALSE(cfg.write_trajectories);
}

TEST_CASE("invalid configs name the key") {
  CHECK(key_of("experiment.horizon = 0") == "experiment.horizon");
  CHECK(key_of("experiment.bogus = 1") == "experiment.bogus");
  CHECK(key_of("experiment.horizon = \"ten\"") == "experiment.horizon");
  CHECK(key_of("experiment.horizon = 10\nexperiment.horizon = 20") == "experiment.horizon");
  CHECK(key_of("experiment.delta = 1.5") == "experiment.delta");
  CHECK(key_of("policy.name = \"mystery\"") == "policy.name");
  CHECK(key_of("instance.theta_star = [1, 0]\nexperiment.dim = 3") == "instance.theta_star");
  CHECK(key_of("experiment.kind = \"lowerbound\"\ninstance.theta_star = [2, 0]\npacking.epsilon = 2.5") ==
        "packing.epsilon");
  CHECK(key_of("experiment.kind = \"lowerbound\"\ninstance.theta_star = [2, 0, 0]\npacking.epsilon = 1.5") ==
        "packing.epsilon");
  CHECK(key_of("experiment.kind = \"lowerbound\"\ninstance.theta_star = [2, 0, 0]\npacking.epsilon = 1.4") == "");
  try {
    parse_config("instance.theta_star = [2, 0]\npacking.epsilon = 2.5");
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sqrt(d - 1)") != std::string::npos);
  }
}

TEST_CASE("serialization round trip and digest") {
  for (auto kind : {ExperimentKind::Run, ExperimentKind::Coverage, ExperimentKind::Scaling, ExperimentKind::Transitory,
                    ExperimentKind::LowerBound, ExperimentKind::VerifyLemmas}) {
    const auto cfg = preset_config(kind);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  auto cfg = preset_config(ExperimentKind::Scaling);
  cfg.theta_star << 0.1 + 0.2, 1.0 / 3.0;
  cfg.policy.kappa = 22.135323991;
  cfg.packing_epsilon = 0.01;
  cfg.arm_kind = ArmSetKind::Finite;
  cfg.arms = {(Vec(2) << 1.0 / 7.0, -0.5).finished()};
  CHECK(parse_config(serialize_config(cfg)) == cfg);

  const std::string base = config_digest(cfg);
  CHECK(base == config_digest(parse_config(serialize_config(cfg))));
  auto tweak = [&](auto fn) {
    auto c = cfg;
    fn(c);
    return config_digest(c);
  };
  CHECK(tweak([](ExperimentConfig& c) { c.horizon += 1; }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.base_seed += 1; }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.delta = std::nextafter(c.delta, 1.0); }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.theta_star(1) = -c.theta_star(1); }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.norms.push_back(4.0); }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.policy.name = "glm-ucb"; }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.solver.restarts = 2; }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.output_path = "elsewhere"; }) != base);
  CHECK(tweak([](ExperimentConfig& c) { c.s_bound = 3.0; }) != base);
}

TEST_CASE("digest primitives") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(exact_decimal(0.1) == "0.1");
  CHECK(std::stod(exact_decimal(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fmt12(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("run_experiment writes deterministic outputs") {
  const auto root = std::filesystem::temp_directory_path() / "logb_harness_test";
  std::filesystem::remove_all(root);
  auto cfg = preset_config(ExperimentKind::Run);
  cfg.horizon = 60;
  cfg.replications = 2;
  cfg.theta_star << 1.0, 1.0;
  auto run_into = [&](const std::string& sub) {
    auto c = cfg;
    c.output_path = (root / sub).string();
    return run_experiment(c);
  };
  const auto m1 = run_into("a");
  const auto m2 = run_into("b");
  CHECK(m1.exit_status() == 0);
  CHECK(m1.config_digest != "");
  CHECK(m1.outputs == m2.outputs);
  int csvs = 0;
  for (const auto& name : m1.outputs) {
    if (std::filesystem::path(name).extension() != ".csv") continue;
    ++csvs;
    CHECK(slurp(root / "a" / name) == slurp(root / "b" / name));
  }
  CHECK(csvs >= 3);
  CHECK(std::filesystem::exists(root / "a" / "summary.json"));
  CHECK(std::filesystem::exists(root / "a" / "manifest.json"));

  auto lem = preset_config(ExperimentKind::VerifyLemmas);
  lem.lemma_cases = 500;
  lem.output_path = (root / "lemmas").string();
  const auto ml = run_experiment(lem);
  CHECK(ml.pass);
  CHECK(ml.exit_status() == 0);
  std::filesystem::remove_all(root);
}
