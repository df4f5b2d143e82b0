#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include <nlohmann/json_fwd.hpp>

#include "manas/environment.hpp"
#include "manas/runner.hpp"

namespace manas {

struct TabularSpec {
  std::filesystem::path path;  // relative paths resolve against the config file
  bool noisy = false;
};

using EnvironmentSpec = std::variant<GsdConfig, LinearEnvConfig, TabularSpec>;

struct Experiment {
  ExperimentConfig config;
  EnvironmentSpec environment;
};

// Parses and validates a config document. Unknown fields are rejected with
// the offending field path. base_dir resolves relative benchmark paths.
Experiment parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Experiment load_experiment(const std::filesystem::path& config_path);

// The adversary is shared by all repeats: deterministic schedule components
// (random-walk paths) are seeded from the experiment's base seed.
std::unique_ptr<Environment> build_environment(const Experiment& exp);

// Fully resolved config (defaults expanded) for resolved-config.json.
nlohmann::json experiment_to_json(const Experiment& exp);

// Applies "a.b.c=value" to a config document; value is parsed as JSON when
// possible and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace manas
