#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "logb/harness.hpp"

namespace {

int execute(logbandit::ExperimentKind kind, const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::string& out, const std::optional<int>& threads) {
  logbandit::ExperimentConfig cfg;
  try {
    if (config_path.empty()) {
      cfg = logbandit::preset_config(kind);
    } else {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot read " << config_path << "\n";
        return 2;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      cfg = logbandit::parse_config(buf.str());
    }
    cfg.kind = kind;
    if (seed) cfg.base_seed = *seed;
    if (!out.empty()) cfg.output_path = out;
    if (threads) cfg.threads = *threads;
    logbandit::validate_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const logbandit::RunManifest m = logbandit::run_experiment(cfg);
  std::cout << logbandit::to_string(m.kind) << " " << (m.exit_status() == 0 ? "PASS" : "FAIL") << " digest "
            << m.config_digest << " -> " << cfg.output_path << "\n";
  for (const auto& e : m.errors) std::cerr << "error: " << e << "\n";
  return m.exit_status();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logistic bandit experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;

  const std::pair<const char*, logbandit::ExperimentKind> commands[] = {
      {"run", logbandit::ExperimentKind::Run},
      {"coverage", logbandit::ExperimentKind::Coverage},
      {"scaling", logbandit::ExperimentKind::Scaling},
      {"transitory", logbandit::ExperimentKind::Transitory},
      {"lowerbound", logbandit::ExperimentKind::LowerBound},
      {"verify-lemmas", logbandit::ExperimentKind::VerifyLemmas},
  };
  std::optional<logbandit::ExperimentKind> chosen;
  for (const auto& [name, kind] : commands) {
    auto* sub = app.add_subcommand(name, "run the " + std::string(name) + " experiment");
    sub->add_option("--config", config_path, "config document (preset when omitted)");
    sub->add_option("--seed", seed, "base seed override");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads, 0 = auto");
    const logbandit::ExperimentKind k = kind;
    sub->callback([&chosen, k] { chosen = k; });
  }

  CLI11_PARSE(app, argc, argv);
  return execute(*chosen, config_path, seed, out, threads);
}
