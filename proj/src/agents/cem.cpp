// Cross-entropy method over the weights of a small deterministic policy
// network.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "detail.hpp"

namespace gtd {

TrainResult train_cem(const EnvConfig& env_config, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed) {
  validate(config);
  DispatchEnv env = detail::make_env(env_config, Algorithm::kCem, scenario);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  TrainResult result;
  Policy& best = result.policy;
  best.algorithm = Algorithm::kCem;
  best.scaler = ObservationScaler::fit(*scenario);
  best.network_spec.input_dim = kObservationDim;
  best.network_spec.hidden_layers = config.cem_hidden_layers;
  best.network_spec.activation = config.activation;
  best.network_spec.output_dim = 1;
  best.network_spec.output_head = nn::OutputHead::kLinear;
  const auto dim = static_cast<Eigen::Index>(nn::parameter_count(best.network_spec));
  best.network.values = nn::Vector::Zero(dim);

  nn::Vector mean = nn::Vector::Zero(dim);
  nn::Vector stddev = nn::Vector::Constant(dim, config.init_stddev);
  double best_reward = -std::numeric_limits<double>::infinity();

  Policy candidate = best;
  int episode = 0;
  while (episode < config.episodes) {
    const auto batch = static_cast<std::size_t>(
        std::min<long>(static_cast<long>(config.population), config.episodes - episode));
    std::vector<nn::Vector> samples(batch);
    std::vector<double> rewards(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      samples[i].resize(dim);
      for (Eigen::Index k = 0; k < dim; ++k) {
        samples[i][k] = mean[k] + std::max(stddev[k], config.stddev_floor) * unit(rng);
      }
      candidate.network.values = samples[i];
      Observation obs = env.reset();
      while (!env.done()) obs = env.step(candidate.action(obs)).observation;
      result.curve.push_back(detail::stats_from(env, episode++));
      rewards[i] = env.episode_reward();
      if (rewards[i] > best_reward) {
        best_reward = rewards[i];
        best.network.values = samples[i];
      }
    }

    std::vector<std::size_t> order(batch);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rewards[a] > rewards[b]; });
    const auto n_elite = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(config.elite_fraction * static_cast<double>(batch))));
    mean.setZero();
    for (std::size_t e = 0; e < n_elite; ++e) mean += samples[order[e]];
    mean /= static_cast<double>(n_elite);
    nn::Vector var = nn::Vector::Zero(dim);
    for (std::size_t e = 0; e < n_elite; ++e) var += (samples[order[e]] - mean).cwiseAbs2();
    stddev = (var / static_cast<double>(n_elite)).cwiseSqrt();
    result.generation_best.push_back(best_reward);
  }
  return result;
}

}  // namespace gtd
