#pragma once

// Experiment configuration, read from YAML. See configs/default.yaml for the
// full key list.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gtdispatch/agents.hpp"
#include "gtdispatch/env.hpp"
#include "gtdispatch/scenario.hpp"

namespace gtd {

struct ScenarioSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  std::uint64_t seed = 0;
  std::filesystem::path dir;  // csv only
  // Optional window into the loaded year; hours = 0 keeps everything.
  std::size_t first_hour = 0;
  std::size_t hours = 0;
  SyntheticScenarioParams synthetic;
};

std::shared_ptr<const ScenarioTable> load_scenario(const ScenarioSource& source);

struct ExperimentConfig {
  ScenarioSource scenario;
  EnvConfig env;
  std::vector<AgentConfig> agents;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int episodes = 250;
  std::vector<OmVariant> om_variants{OmVariant::kDynamic};
  std::filesystem::path output_dir = "runs";
  unsigned workers = 0;  // 0 = hardware concurrency
};

ExperimentConfig parse_experiment_config(const std::string& yaml_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Round-trips through parse_experiment_config.
std::string to_yaml(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

}  // namespace gtd
