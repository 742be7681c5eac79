#pragma once

#include <memory>

#include "gtdispatch/agents.hpp"

namespace gtd::detail {

inline nn::Vector scaled_input(const ObservationScaler& scaler, const Observation& obs) {
  const auto a = scaler.transform(obs);
  return Eigen::Map<const nn::Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
}

// Environment with the action kind the algorithm expects, reset on `scenario`.
inline DispatchEnv make_env(EnvConfig config, Algorithm algorithm,
                            std::shared_ptr<const ScenarioTable> scenario) {
  config.action.kind = action_kind(algorithm);
  config.episode_hours = scenario->size();
  DispatchEnv env(std::move(config));
  env.reset(std::move(scenario));
  return env;
}

inline EpisodeStats stats_from(const DispatchEnv& env, int episode) {
  EpisodeStats s;
  s.episode = episode;
  s.reward_cad = env.episode_reward();
  s.gt_hours = env.episode_hours_on();
  s.gt_cycles = env.episode_cycles();
  return s;
}

inline nn::NetworkSpec network_spec(const AgentConfig& config, std::size_t outputs,
                                    nn::OutputHead head) {
  nn::NetworkSpec spec;
  spec.input_dim = kObservationDim;
  spec.hidden_layers = config.hidden_layers;
  spec.activation = config.activation;
  spec.output_dim = outputs;
  spec.output_head = head;
  return spec;
}

// Sets the output-layer bias so the untrained network centres on `value`.
inline void set_output_bias(const nn::NetworkSpec& spec, nn::ParameterSet& params, double value) {
  const auto layers = nn::layer_map(spec);
  params.values.segment(static_cast<Eigen::Index>(layers.back().bias_offset),
                        static_cast<Eigen::Index>(layers.back().out))
      .setConstant(value);
}

void check_finite(double value, const char* what);

}  // namespace gtd::detail
