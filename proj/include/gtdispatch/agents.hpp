#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gtdispatch/env.hpp"
#include "gtdispatch/nn.hpp"

namespace gtd {

enum class Algorithm { kReinforceDiscrete, kReinforceContinuous, kDqn, kPpo, kCem, kRule };

Algorithm parse_algorithm(std::string_view name);
std::string to_string(Algorithm algorithm);
ActionKind action_kind(Algorithm algorithm);

struct AgentConfig {
  Algorithm algorithm = Algorithm::kDqn;
  int episodes = 250;
  double gamma = 0.99;
  std::vector<std::size_t> hidden_layers{64, 64};
  nn::Activation activation = nn::Activation::kTanh;
  nn::AdamHyper optimizer{3e-4, 0.9, 0.999, 1e-8, 10.0};
  nn::AdamHyper value_optimizer{1e-3, 0.9, 0.999, 1e-8, 10.0};

  // Policy-gradient methods.
  double initial_log_std = -0.5;
  double initial_action_mean = 0.5;
  bool normalize_returns = false;  // REINFORCE only

  // DQN.
  std::size_t replay_capacity = 100000;
  std::size_t batch_size = 32;
  std::size_t learning_starts = 1000;
  std::size_t target_sync_steps = 2000;
  std::size_t train_frequency = 1;
  double epsilon_start = 0.8;
  double epsilon_end = 0.001;
  int epsilon_fixed_episodes = 10;
  bool double_dqn = false;
  double huber_delta = 1.0;

  // PPO.
  double clip_ratio = 0.2;
  double gae_lambda = 0.95;
  int epochs = 10;
  std::size_t minibatch_size = 256;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  std::size_t rollout_steps = 0;  // 0 = one full episode
  bool normalize_advantages = true;

  // CEM.
  std::size_t population = 20;
  double elite_fraction = 0.2;
  double init_stddev = 0.5;
  double stddev_floor = 0.05;
  std::vector<std::size_t> cem_hidden_layers{8};

  // Rule search.
  std::vector<double> price_grid;
  std::vector<double> demand_grid;
};

// Defaults for one algorithm (shared fields plus its own).
AgentConfig default_agent_config(Algorithm algorithm);
void validate(const AgentConfig& config);

struct EpisodeStats {
  int episode = 0;
  double reward_cad = 0.0;
  int gt_hours = 0;
  int gt_cycles = 0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
};

using TrainingCurve = std::vector<EpisodeStats>;

// If-then-else baseline: GT at baseload while the condition holds, else off.
enum class RuleKind { kPrice = 0, kDemand = 1, kAnd = 2, kOr = 3 };

std::string to_string(RuleKind kind);
RuleKind parse_rule_kind(std::string_view name);

struct Rule {
  RuleKind kind = RuleKind::kPrice;
  double price_threshold = std::numeric_limits<double>::infinity();
  double demand_threshold = std::numeric_limits<double>::infinity();

  bool fires(const Observation& obs) const;
  std::string describe() const;
};

// A trained (or baseline) deterministic policy.
struct Policy {
  Algorithm algorithm = Algorithm::kRule;
  ObservationScaler scaler;
  nn::NetworkSpec network_spec;
  nn::ParameterSet network;
  // Critic, PPO only.
  nn::NetworkSpec value_spec;
  nn::ParameterSet value;
  std::vector<double> levels = default_discrete_levels();
  Rule rule;

  ActionKind kind() const { return action_kind(algorithm); }
  // Greedy / mean action, in the raw [0, 1] action space.
  double action(const Observation& obs) const;
};

void save_policy(const std::filesystem::path& path, const Policy& policy);
Policy load_policy(const std::filesystem::path& path);

struct TrainResult {
  Policy policy;
  TrainingCurve curve;
  // CEM: best-ever episodic reward after each generation.
  std::vector<double> generation_best;
};

// The environment config's action kind is overridden to match the algorithm.
TrainResult train_reinforce(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                            const AgentConfig& config, bool discrete, std::uint64_t seed);
TrainResult train_dqn(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed);
TrainResult train_ppo(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed);
TrainResult train_cem(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed);

// Dispatches on config.algorithm. Rule search runs once and reports the best
// rule's episode for every configured episode.
TrainResult train_agent(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                        const AgentConfig& config, std::uint64_t seed);

// Epsilon for a 0-based episode: linear from `start` to `end` over the first
// (episodes - fixed_tail) episodes, then held at `end`.
double epsilon_for_episode(int episode, int episodes, double start, double end, int fixed_tail);

// Coefficient multiplying grad log pi in the clipped surrogate objective;
// zero where the clip is active.
double clipped_surrogate_coefficient(double ratio, double advantage, double clip);

// Gradient of the REINFORCE loss -mean_t(log pi(a_t|s_t) * G_t) for a
// softmax policy; columns of `states` are scaled observations.
nn::Vector reinforce_discrete_gradient(const nn::NetworkSpec& spec, const nn::ParameterSet& params,
                                       const nn::Matrix& states, const std::vector<int>& actions,
                                       const std::vector<double>& returns);

// Discounted returns G_t = r_t + gamma * G_{t+1}.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

// Plays one deterministic episode.
EpisodeStats evaluate_policy(const Policy& policy, const EnvConfig& env,
                             std::shared_ptr<const ScenarioTable> scenario);

struct RuleSearchResult {
  Rule best;
  double score = -std::numeric_limits<double>::infinity();
  EpisodeStats stats;
  std::size_t evaluated = 0;
};

// Enumerates price, demand, AND and OR rules over the grids. Ties go to the
// simpler condition (price, demand, and, or), then to lower thresholds.
RuleSearchResult search_rules(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                              std::vector<double> price_grid, std::vector<double> demand_grid);

// Default threshold grids derived from the scenario's price and demand ranges.
std::vector<double> default_price_grid(const ScenarioTable& scenario);
std::vector<double> default_demand_grid(const ScenarioTable& scenario);

}  // namespace gtd
