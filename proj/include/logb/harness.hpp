#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "logb/experiments.hpp"

namespace logbandit {

/// Rejected configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses a flat `section.key = value` document. Values are numbers, quoted
/// strings, booleans or (nested) arrays of numbers; `#` starts a comment and
/// `[section]` lines prefix the following keys. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Throws ConfigError when a field is out of range.
void validate_config(const ExperimentConfig& cfg);

/// Settings of the reference experiment for each kind.
ExperimentConfig preset_config(ExperimentKind kind);

struct RunManifest {
  std::string config_digest;
  std::string code_version;
  ExperimentKind kind;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
  std::vector<std::string> errors;
  bool pass = false;
  int exit_status() const { return pass && errors.empty() ? 0 : 1; }
};

std::string config_digest(const ExperimentConfig& cfg);

/// Dispatches to the experiment, writes CSVs, summary.json and
/// manifest.json under cfg.output_path.
RunManifest run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kCodeVersion = "logb 1.0.0";

}  // namespace logbandit
