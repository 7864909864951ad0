#include "logb/harness.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "logb/digest.hpp"
#include "logb/errors.hpp"
#include "logb/lemmas.hpp"

namespace logbandit {

namespace {

using Json = nlohmann::ordered_json;

// --- document model ----------------------------------------------------------

struct Value {
  enum class Type { Number, String, Bool, Array } type = Type::Number;
  std::string text;  // raw token for numbers, decoded text for strings
  bool flag = false;
  std::vector<Value> items;
};

class Lexer {
 public:
  Lexer(std::string_view s, std::string key) : s_(s), key_(std::move(key)) {}

  Value value() {
    skip();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '[') return array();
    if (c == '"') return string();
    Value v;
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != ',' &&
           s_[pos_] != ']')
      ++pos_;
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text == "true" || v.text == "false") {
      v.type = Value::Type::Bool;
      v.flag = v.text == "true";
    }
    return v;
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) fail("trailing characters after value");
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key_, what); }

  Value array() {
    Value v;
    v.type = Value::Type::Array;
    ++pos_;
    skip();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(value());
      skip();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value string() {
    Value v;
    v.type = Value::Type::String;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      v.text.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  std::string_view s_;
  std::string key_;
  std::size_t pos_ = 0;
};

double as_real(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Number) throw ConfigError(key, "expected a number");
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v.text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: " + v.text);
  }
  if (used != v.text.size() || !std::isfinite(x)) throw ConfigError(key, "not a finite number: " + v.text);
  return x;
}

long long as_int(const Value& v, const std::string& key) {
  const double x = as_real(v, key);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError(key, "expected an integer");
  return static_cast<long long>(x);
}

std::uint64_t as_u64(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Number || v.text.empty() || v.text[0] == '-') throw ConfigError(key, "expected a seed");
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(v.text, &used, 10);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an unsigned integer");
  }
  if (used != v.text.size()) throw ConfigError(key, "expected an unsigned integer");
  return x;
}

std::string as_string(const Value& v, const std::string& key) {
  if (v.type != Value::Type::String) throw ConfigError(key, "expected a quoted string");
  return v.text;
}

bool as_bool(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Bool) throw ConfigError(key, "expected true or false");
  return v.flag;
}

Vec as_vec(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Array) throw ConfigError(key, "expected an array");
  Vec out(static_cast<Eigen::Index>(v.items.size()));
  for (std::size_t i = 0; i < v.items.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_real(v.items[i], key);
  return out;
}

std::vector<double> as_reals(const Value& v, const std::string& key) {
  const Vec x = as_vec(v, key);
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<Vec> as_vecs(const Value& v, const std::string& key) {
  if (v.type != Value::Type::Array) throw ConfigError(key, "expected an array of arrays");
  std::vector<Vec> out;
  for (const auto& item : v.items) out.push_back(as_vec(item, key));
  return out;
}

// --- key table ---------------------------------------------------------------

using Setter = std::function<void(const Value&, ExperimentConfig&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.kind",
       [](const Value& v, ExperimentConfig& c) {
         const auto k = parse_experiment_kind(as_string(v, "experiment.kind"));
         if (!k) throw ConfigError("experiment.kind", "unknown experiment kind '" + v.text + "'");
         c.kind = *k;
       }},
      {"experiment.dim", [](const Value& v, ExperimentConfig& c) { c.dim = static_cast<int>(as_int(v, "experiment.dim")); }},
      {"experiment.horizon", [](const Value& v, ExperimentConfig& c) { c.horizon = as_int(v, "experiment.horizon"); }},
      {"experiment.replications",
       [](const Value& v, ExperimentConfig& c) { c.replications = static_cast<int>(as_int(v, "experiment.replications")); }},
      {"experiment.seed", [](const Value& v, ExperimentConfig& c) { c.base_seed = as_u64(v, "experiment.seed"); }},
      {"experiment.delta", [](const Value& v, ExperimentConfig& c) { c.delta = as_real(v, "experiment.delta"); }},
      {"experiment.s_bound", [](const Value& v, ExperimentConfig& c) { c.s_bound = as_real(v, "experiment.s_bound"); }},
      {"experiment.lambda_floor",
       [](const Value& v, ExperimentConfig& c) { c.lambda_floor = as_real(v, "experiment.lambda_floor"); }},
      {"experiment.checkpoint", [](const Value& v, ExperimentConfig& c) { c.checkpoint = as_int(v, "experiment.checkpoint"); }},
      {"experiment.lemma_cases",
       [](const Value& v, ExperimentConfig& c) { c.lemma_cases = static_cast<int>(as_int(v, "experiment.lemma_cases")); }},
      {"experiment.threads", [](const Value& v, ExperimentConfig& c) { c.threads = static_cast<int>(as_int(v, "experiment.threads")); }},
      {"instance.theta_star", [](const Value& v, ExperimentConfig& c) { c.theta_star = as_vec(v, "instance.theta_star"); }},
      {"instance.arm_set",
       [](const Value& v, ExperimentConfig& c) {
         const std::string s = as_string(v, "instance.arm_set");
         if (s == "finite") c.arm_kind = ArmSetKind::Finite;
         else if (s == "sphere") c.arm_kind = ArmSetKind::UnitSphere;
         else if (s == "ball") c.arm_kind = ArmSetKind::UnitBall;
         else throw ConfigError("instance.arm_set", "expected finite, sphere or ball");
       }},
      {"instance.resolution",
       [](const Value& v, ExperimentConfig& c) { c.resolution = static_cast<int>(as_int(v, "instance.resolution")); }},
      {"instance.arms", [](const Value& v, ExperimentConfig& c) { c.arms = as_vecs(v, "instance.arms"); }},
      {"instance.norms", [](const Value& v, ExperimentConfig& c) { c.norms = as_reals(v, "instance.norms"); }},
      {"policy.name", [](const Value& v, ExperimentConfig& c) { c.policy.name = as_string(v, "policy.name"); }},
      {"policy.kappa", [](const Value& v, ExperimentConfig& c) { c.policy.kappa = as_real(v, "policy.kappa"); }},
      {"policy.epsilon", [](const Value& v, ExperimentConfig& c) { c.policy.epsilon = as_real(v, "policy.epsilon"); }},
      {"policy.grid_resolution",
       [](const Value& v, ExperimentConfig& c) {
         c.policy.grid_resolution = static_cast<int>(as_int(v, "policy.grid_resolution"));
       }},
      {"solver.tol", [](const Value& v, ExperimentConfig& c) { c.solver.tol = as_real(v, "solver.tol"); }},
      {"solver.max_iter", [](const Value& v, ExperimentConfig& c) { c.solver.max_iter = static_cast<int>(as_int(v, "solver.max_iter")); }},
      {"solver.restarts", [](const Value& v, ExperimentConfig& c) { c.solver.restarts = static_cast<int>(as_int(v, "solver.restarts")); }},
      {"packing.epsilon", [](const Value& v, ExperimentConfig& c) { c.packing_epsilon = as_real(v, "packing.epsilon"); }},
      {"output.path", [](const Value& v, ExperimentConfig& c) { c.output_path = as_string(v, "output.path"); }},
      {"output.trajectories",
       [](const Value& v, ExperimentConfig& c) { c.write_trajectories = as_bool(v, "output.trajectories"); }},
  };
  return table;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
      continue;
    }
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// --- serialization -------------------------------------------------------------

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string vec_text(const Vec& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + exact_decimal(v[i]);
  return out + "]";
}

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool dim_given = false;
  bool theta_given = false;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string::npos) {
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (seen[key]) throw ConfigError(key, "duplicate key");
    seen[key] = true;
    Lexer lex(std::string_view(body).substr(eq + 1), key);
    const Value v = lex.value();
    lex.finish();
    it->second(v, cfg);
    dim_given = dim_given || key == "experiment.dim";
    theta_given = theta_given || key == "instance.theta_star";
  }
  if (!dim_given && theta_given) cfg.dim = static_cast<int>(cfg.theta_star.size());
  if (!dim_given && !theta_given && !cfg.arms.empty()) cfg.dim = static_cast<int>(cfg.arms.front().size());
  if (!theta_given && cfg.dim >= 1) cfg.theta_star = Vec::Unit(cfg.dim, 0);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& c) {
  if (c.dim < 1) throw ConfigError("experiment.dim", "must be >= 1");
  if (c.horizon < 1) throw ConfigError("experiment.horizon", "must be >= 1");
  if (c.replications < 1) throw ConfigError("experiment.replications", "must be >= 1");
  if (!(c.delta > 0.0 && c.delta <= 1.0)) throw ConfigError("experiment.delta", "must lie in (0, 1]");
  if (c.s_bound && !(*c.s_bound > 0.0)) throw ConfigError("experiment.s_bound", "must be positive");
  if (!(c.lambda_floor > 0.0)) throw ConfigError("experiment.lambda_floor", "must be positive");
  if (c.checkpoint < 1) throw ConfigError("experiment.checkpoint", "must be >= 1");
  if (c.lemma_cases < 1) throw ConfigError("experiment.lemma_cases", "must be >= 1");
  if (c.threads < 0) throw ConfigError("experiment.threads", "must be >= 0");
  if (c.theta_star.size() != c.dim) throw ConfigError("instance.theta_star", "length must equal experiment.dim");
  if (c.s_bound && c.norms.empty() && c.theta_star.norm() > *c.s_bound * (1 + 1e-12))
    throw ConfigError("experiment.s_bound", "smaller than ||theta_star||");
  if (c.resolution && *c.resolution < 8) throw ConfigError("instance.resolution", "must be >= 8");
  if (c.arm_kind == ArmSetKind::Finite) {
    if (c.arms.empty()) throw ConfigError("instance.arms", "a finite arm set needs at least one arm");
    for (const auto& a : c.arms) {
      if (a.size() != c.dim) throw ConfigError("instance.arms", "arm length must equal experiment.dim");
      if (a.norm() > 1.0 + 1e-12) throw ConfigError("instance.arms", "arm norm exceeds 1");
    }
  }
  for (double n : c.norms)
    if (!(n > 0.0)) throw ConfigError("instance.norms", "norms must be positive");
  static const char* names[] = {"ofulog-r", "ofulog-grid", "glm-ucb", "epsilon-greedy", "oracle", "round-robin"};
  if (std::find(std::begin(names), std::end(names), c.policy.name) == std::end(names))
    throw ConfigError("policy.name", "unknown policy '" + c.policy.name + "'");
  if (c.policy.kappa && !(*c.policy.kappa >= 4.0)) throw ConfigError("policy.kappa", "must be >= 4");
  if (!(c.policy.epsilon >= 0.0 && c.policy.epsilon <= 1.0)) throw ConfigError("policy.epsilon", "must lie in [0, 1]");
  if (c.policy.grid_resolution < 2) throw ConfigError("policy.grid_resolution", "must be >= 2");
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  if (c.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (c.solver.restarts < 1) throw ConfigError("solver.restarts", "must be >= 1");
  if (c.packing_epsilon) {
    if (c.dim < 2) throw ConfigError("packing.epsilon", "a packing needs dim >= 2");
    if (!(*c.packing_epsilon > 0.0)) throw ConfigError("packing.epsilon", "must be positive");
    const double cap = c.theta_star.norm() / std::sqrt(static_cast<double>(c.dim - 1));
    if (*c.packing_epsilon > cap)
      throw ConfigError("packing.epsilon", "violates epsilon <= ||theta_star|| / sqrt(d - 1) (cap " + fmt12(cap) + ")");
  }
  if (c.output_path.empty()) throw ConfigError("output.path", "must not be empty");
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment.kind = " << quote(to_string(c.kind)) << "\n";
  os << "experiment.dim = " << c.dim << "\n";
  os << "experiment.horizon = " << c.horizon << "\n";
  os << "experiment.replications = " << c.replications << "\n";
  os << "experiment.seed = " << c.base_seed << "\n";
  os << "experiment.delta = " << exact_decimal(c.delta) << "\n";
  if (c.s_bound) os << "experiment.s_bound = " << exact_decimal(*c.s_bound) << "\n";
  os << "experiment.lambda_floor = " << exact_decimal(c.lambda_floor) << "\n";
  os << "experiment.checkpoint = " << c.checkpoint << "\n";
  os << "experiment.lemma_cases = " << c.lemma_cases << "\n";
  os << "experiment.threads = " << c.threads << "\n";
  os << "instance.theta_star = " << vec_text(c.theta_star) << "\n";
  os << "instance.arm_set = " << quote(to_string(c.arm_kind)) << "\n";
  if (c.resolution) os << "instance.resolution = " << *c.resolution << "\n";
  if (!c.arms.empty()) {
    os << "instance.arms = [";
    for (std::size_t i = 0; i < c.arms.size(); ++i) os << (i ? ", " : "") << vec_text(c.arms[i]);
    os << "]\n";
  }
  if (!c.norms.empty()) {
    os << "instance.norms = [";
    for (std::size_t i = 0; i < c.norms.size(); ++i) os << (i ? ", " : "") << exact_decimal(c.norms[i]);
    os << "]\n";
  }
  os << "policy.name = " << quote(c.policy.name) << "\n";
  if (c.policy.kappa) os << "policy.kappa = " << exact_decimal(*c.policy.kappa) << "\n";
  os << "policy.epsilon = " << exact_decimal(c.policy.epsilon) << "\n";
  os << "policy.grid_resolution = " << c.policy.grid_resolution << "\n";
  os << "solver.tol = " << exact_decimal(c.solver.tol) << "\n";
  os << "solver.max_iter = " << c.solver.max_iter << "\n";
  os << "solver.restarts = " << c.solver.restarts << "\n";
  if (c.packing_epsilon) os << "packing.epsilon = " << exact_decimal(*c.packing_epsilon) << "\n";
  os << "output.path = " << quote(c.output_path) << "\n";
  os << "output.trajectories = " << (c.write_trajectories ? "true" : "false") << "\n";
  return os.str();
}

std::string config_digest(const ExperimentConfig& cfg) { return hex_digest(serialize_config(cfg)); }

ExperimentConfig preset_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.dim = 2;
  switch (kind) {
    case ExperimentKind::Run:
      c.horizon = 1000;
      c.replications = 1;
      c.theta_star = Vec::Unit(2, 0) * 2.0;
      c.arm_kind = ArmSetKind::UnitBall;
      c.resolution = 720;
      break;
    case ExperimentKind::Coverage:
      c.horizon = 2000;
      c.replications = 200;
      c.s_bound = 2.0;
      c.theta_star = (Vec(2) << 1.2, -0.9).finished();
      c.arm_kind = ArmSetKind::UnitBall;
      c.policy.name = "round-robin";
      break;
    case ExperimentKind::Scaling:
    case ExperimentKind::Transitory:
      c.horizon = 10000;
      c.replications = 20;
      c.theta_star = (Vec(2) << std::cos(2.0), std::sin(2.0)).finished();
      c.arm_kind = ArmSetKind::UnitBall;
      c.resolution = 720;
      c.norms = kind == ExperimentKind::Scaling ? std::vector<double>{1.0, 2.0, 3.0} : std::vector<double>{3.0};
      break;
    case ExperimentKind::LowerBound:
      c.horizon = 10000;
      c.replications = 20;
      c.theta_star = Vec::Unit(2, 0) * 2.0;
      c.arm_kind = ArmSetKind::UnitSphere;
      c.resolution = 720;
      break;
    case ExperimentKind::VerifyLemmas:
      c.horizon = 1;
      c.replications = 1;
      c.theta_star = Vec::Unit(2, 0);
      c.lemma_cases = 100000;
      break;
  }
  return c;
}

// --- execution -------------------------------------------------------------------

namespace {

class OutputDir {
 public:
  OutputDir(const std::string& path, RunManifest& manifest) : root_(path), manifest_(manifest) {
    std::filesystem::create_directories(root_);
  }

  std::ofstream open(const std::string& name) {
    const auto p = root_ / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    manifest_.outputs.push_back(name);
    return os;
  }

  void trajectory(const std::string& name, const TrajectoryLog& log) {
    auto os = open(name);
    write_trajectory_csv(os, log);
  }

 private:
  std::filesystem::path root_;
  RunManifest& manifest_;
};

Json check(const std::string& name, bool pass, Json detail = Json::object()) {
  Json j;
  j["name"] = name;
  j["pass"] = pass;
  j["detail"] = std::move(detail);
  return j;
}

Json regret_json(const RegretSummary& s) {
  Json j;
  j["norm"] = s.norm;
  j["s_bound"] = s.s_bound;
  j["kappa_star"] = s.kappa.kappa_star;
  j["kappa_x"] = s.kappa.kappa_x;
  j["kappa_global"] = s.kappa.kappa_global;
  j["horizon"] = s.horizon;
  j["mean_regret"] = s.mean_regret;
  j["se_regret"] = s.se_regret;
  j["normalizer"] = s.normalizer;
  j["normalized_ratio"] = s.normalized_ratio;
  j["final_regret"] = s.final_regret;
  j["checkpoint"] = s.checkpoint;
  j["detrimental_at_checkpoint"] = s.detrimental_at_checkpoint;
  j["detrimental_final"] = s.detrimental_final;
  j["weighted_detrimental_final"] = s.weighted_detrimental_final;
  j["rounds_checked"] = s.rounds_checked;
  j["rounds_theta_in_E"] = s.rounds_theta_in_E;
  j["optimism_violations"] = s.optimism_violations;
  j["deviation_violations"] = s.deviation_violations;
  j["errors"] = s.errors;
  return j;
}

void write_regret_csv(std::ostream& os, const std::vector<RegretSummary>& rows) {
  os << "norm,s_bound,kappa_star,kappa_x,kappa_global,horizon,mean_regret,se_regret,normalizer,normalized_ratio,"
        "mean_detrimental_checkpoint,mean_detrimental_final,optimism_violations,deviation_violations\n";
  for (const auto& s : rows) {
    double cp = 0.0, fin = 0.0;
    for (std::size_t i = 0; i < s.detrimental_final.size(); ++i) {
      cp += static_cast<double>(s.detrimental_at_checkpoint[i]);
      fin += static_cast<double>(s.detrimental_final[i]);
    }
    const double n = std::max<double>(1.0, static_cast<double>(s.detrimental_final.size()));
    os << fmt12(s.norm) << ',' << fmt12(s.s_bound) << ',' << fmt12(s.kappa.kappa_star) << ','
       << fmt12(s.kappa.kappa_x) << ',' << fmt12(s.kappa.kappa_global) << ',' << s.horizon << ','
       << fmt12(s.mean_regret) << ',' << fmt12(s.se_regret) << ',' << fmt12(s.normalizer) << ','
       << fmt12(s.normalized_ratio) << ',' << fmt12(cp / n) << ',' << fmt12(fin / n) << ','
       << s.optimism_violations << ',' << s.deviation_violations << '\n';
  }
}

void write_trajectories(OutputDir& out, const std::string& tag, const std::vector<TrajectoryLog>& logs) {
  for (const auto& log : logs) out.trajectory("traj_" + tag + "_seed" + std::to_string(log.seed) + ".csv", log);
}

bool dispatch(const ExperimentConfig& cfg, OutputDir& out, Json& summary, RunManifest& manifest) {
  Json checks = Json::array();
  bool pass = true;
  auto add = [&](Json c) {
    pass = pass && c["pass"].get<bool>();
    checks.push_back(std::move(c));
  };

  switch (cfg.kind) {
    case ExperimentKind::Run: {
      const ProblemInstance inst = make_instance(cfg, cfg.theta_star);
      const LearnerConfig lc = make_learner(cfg, inst.s_bound);
      PolicyFactory factory = [&](std::uint64_t seed) { return make_policy(cfg.policy, inst, lc, seed); };
      EpisodeOptions opts;
      opts.diagnostics = true;
      auto logs = run_replications(inst, factory, cfg.horizon, cfg.replications, cfg.base_seed, cfg.threads, opts);
      const RegretSummary s = summarize_regret(inst, logs, cfg.checkpoint);
      if (cfg.write_trajectories) write_trajectories(out, "run", logs);
      {
        auto os = out.open("regret.csv");
        write_regret_csv(os, {s});
      }
      summary["instance_digest"] = inst.digest();
      summary["results"] = regret_json(s);
      add(check("episodes-complete", s.errors.empty(), {{"errors", s.errors}}));
      break;
    }
    case ExperimentKind::Coverage: {
      const CoverageReport r = coverage_experiment(cfg);
      {
        auto os = out.open("coverage.csv");
        os << "seed,covered_C,covered_E,first_miss_C,first_miss_E,worst_ratio_C,worst_ratio_E\n";
        for (const auto& rep : r.replications)
          os << rep.seed << ',' << rep.covered_C << ',' << rep.covered_E << ',' << rep.first_miss_C << ','
             << rep.first_miss_E << ',' << fmt12(rep.worst_ratio_C) << ',' << fmt12(rep.worst_ratio_E) << '\n';
      }
      Json res;
      res["coverage_C"] = r.coverage_C;
      res["coverage_E"] = r.coverage_E;
      res["standard_error"] = r.standard_error;
      res["threshold"] = r.threshold;
      res["degenerate_delta"] = r.degenerate_delta;
      summary["results"] = res;
      add(check("delta-not-degenerate", !r.degenerate_delta));
      add(check("coverage-C", r.coverage_C >= r.threshold, {{"coverage", r.coverage_C}, {"threshold", r.threshold}}));
      add(check("E-contains-C", r.e_dominates_c && r.coverage_E >= r.coverage_C));
      break;
    }
    case ExperimentKind::Scaling: {
      std::vector<std::vector<TrajectoryLog>> logs;
      const ScalingReport r = scaling_experiment(cfg, &logs);
      if (cfg.write_trajectories)
        for (std::size_t i = 0; i < logs.size(); ++i) write_trajectories(out, "inst" + std::to_string(i), logs[i]);
      {
        auto os = out.open("scaling.csv");
        write_regret_csv(os, r.instances);
      }
      Json inst = Json::array();
      for (const auto& s : r.instances) inst.push_back(regret_json(s));
      summary["results"] = {{"instances", inst}, {"ratio_spread", r.ratio_spread}};
      add(check("regret-decreasing-in-kappa", r.regret_decreasing_in_kappa));
      add(check("ratio-spread-below-3", r.ratio_spread < 3.0, {{"spread", r.ratio_spread}}));
      add(check("diagnostics-clean", r.diagnostics_clean));
      break;
    }
    case ExperimentKind::Transitory: {
      std::vector<std::vector<TrajectoryLog>> logs;
      const TransitoryReport r = transitory_experiment(cfg, &logs);
      if (cfg.write_trajectories)
        for (std::size_t i = 0; i < logs.size(); ++i) write_trajectories(out, "inst" + std::to_string(i), logs[i]);
      std::vector<RegretSummary> rows;
      Json inst = Json::array();
      for (const auto& ti : r.instances) {
        rows.push_back(ti.summary);
        Json j = regret_json(ti.summary);
        j["plateau_fraction"] = ti.plateau_fraction;
        j["envelope"] = ti.envelope;
        j["max_final"] = ti.max_final;
        inst.push_back(j);
        add(check("plateau-and-envelope norm=" + fmt12(ti.summary.norm), ti.pass,
                  {{"plateau_fraction", ti.plateau_fraction}, {"max_final", ti.max_final}, {"envelope", ti.envelope}}));
      }
      {
        auto os = out.open("transitory.csv");
        write_regret_csv(os, rows);
      }
      summary["results"] = {{"instances", inst}};
      break;
    }
    case ExperimentKind::LowerBound: {
      std::vector<std::vector<TrajectoryLog>> logs;
      const LowerBoundReport r = lower_bound_experiment(cfg, &logs);
      if (cfg.write_trajectories)
        for (std::size_t i = 0; i < logs.size(); ++i)
          write_trajectories(out, "member" + std::to_string(i / 2) + (i % 2 ? "_fixed" : "_policy"), logs[i]);
      {
        auto os = out.open("lowerbound.csv");
        os << "member,coords,mean_regret,se_regret,fixed_regret\n";
        for (std::size_t m = 0; m < r.members.size(); ++m) {
          os << m << ',';
          for (Eigen::Index i = 0; i < r.members[m].size(); ++i) os << (i ? ";" : "") << fmt12(r.members[m][i]);
          os << ',' << fmt12(r.member_mean_regret[m]) << ',' << fmt12(r.member_se[m]) << ','
             << fmt12(r.fixed_member_regret[m]) << '\n';
        }
      }
      Json kl = Json::array();
      for (const auto& k : r.kl)
        kl.push_back({{"member", k.member}, {"coordinate", k.coordinate}, {"mean", k.mean}, {"se", k.standard_error}});
      Json members = Json::array();
      for (const auto& m : r.members) members.push_back(vec_json(m));
      summary["results"] = {{"epsilon", r.epsilon},
                            {"kappa_eps", r.kappa_eps},
                            {"reference", r.reference},
                            {"out_of_regime", r.out_of_regime},
                            {"members", members},
                            {"member_mean_regret", r.member_mean_regret},
                            {"worst_mean_regret", r.worst_mean_regret},
                            {"ratio", r.ratio},
                            {"fixed_member_regret", r.fixed_member_regret},
                            {"fixed_threshold", r.fixed_threshold},
                            {"kl", kl},
                            {"errors", r.errors}};
      add(check("worst-member-ratio", r.ratio >= 0.02, {{"ratio", r.ratio}}));
      add(check("fixed-policy-regret", r.fixed_worst_regret >= r.fixed_threshold,
                {{"worst", r.fixed_worst_regret}, {"threshold", r.fixed_threshold}}));
      add(check("episodes-complete", r.errors.empty()));
      for (const auto& e : r.errors) manifest.errors.push_back(e);
      break;
    }
    case ExperimentKind::VerifyLemmas: {
      const auto suites = verify_lemmas(cfg.lemma_cases, cfg.base_seed);
      auto os = out.open("lemmas.csv");
      os << "suite,cases,violations,worst_excess\n";
      for (const auto& s : suites) {
        os << s.name << ',' << s.cases << ',' << s.violations << ',' << fmt12(s.worst_excess) << '\n';
        add(check(s.name, s.pass(), {{"cases", s.cases}, {"violations", s.violations}}));
      }
      break;
    }
  }
  summary["checks"] = checks;
  return pass;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  RunManifest m;
  m.config_digest = config_digest(cfg);
  m.code_version = kCodeVersion;
  m.kind = cfg.kind;
  m.started_at = now_iso();
  OutputDir out(cfg.output_path, m);
  Json summary;
  summary["kind"] = to_string(cfg.kind);
  summary["config_digest"] = m.config_digest;
  summary["config"] = serialize_config(cfg);
  try {
    m.pass = dispatch(cfg, out, summary, m);
  } catch (const std::exception& e) {
    m.pass = false;
    m.errors.push_back(e.what());
    summary["error"] = e.what();
  }
  {
    auto os = out.open("summary.json");
    os << summary.dump(2) << '\n';
  }
  m.finished_at = now_iso();
  m.outputs.push_back("manifest.json");
  Json j;
  j["config_digest"] = m.config_digest;
  j["code_version"] = m.code_version;
  j["kind"] = to_string(m.kind);
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  j["errors"] = m.errors;
  j["pass"] = m.pass;
  j["exit_status"] = m.exit_status();
  std::ofstream os(std::filesystem::path(cfg.output_path) / "manifest.json", std::ios::binary);
  os << j.dump(2) << '\n';
  return m;
}

}  // namespace logbandit
