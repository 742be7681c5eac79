// Monte-Carlo policy gradient without a baseline.

#include <cmath>
#include <numbers>
#include <random>

#include "detail.hpp"
#include "gtdispatch/errors.hpp"

namespace gtd {

namespace {

int sample_categorical(const nn::Vector& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (draw < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

nn::Matrix stack_columns(const std::vector<nn::Vector>& columns) {
  nn::Matrix m(static_cast<Eigen::Index>(kObservationDim), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t t = 0; t < columns.size(); ++t) m.col(static_cast<Eigen::Index>(t)) = columns[t];
  return m;
}

void normalize(std::vector<double>& values) {
  if (values.size() < 2) return;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(values.size()));
  for (double& v : values) v = (v - mean) / (sd + 1e-8);
}

}  // namespace

nn::Vector reinforce_discrete_gradient(const nn::NetworkSpec& spec, const nn::ParameterSet& params,
                                       const nn::Matrix& states, const std::vector<int>& actions,
                                       const std::vector<double>& returns) {
  const auto steps = states.cols();
  if (static_cast<std::size_t>(steps) != actions.size() || actions.size() != returns.size()) {
    throw DomainError("REINFORCE batch: states, actions and returns differ in length");
  }
  const nn::ForwardCache cache = nn::forward_batch(spec, params, states);
  // d(-log p_a)/dlogits = p - e_a
  nn::Matrix delta = cache.output;
  double loss = 0.0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(t)]);
    const double g = returns[static_cast<std::size_t>(t)] / static_cast<double>(steps);
    loss -= g * std::log(std::max(cache.output(a, t), 1e-300));
    delta(a, t) -= 1.0;
    delta.col(t) *= g;
  }
  detail::check_finite(loss, "REINFORCE loss");
  return nn::backward_pre_output(spec, params, cache, delta);
}

TrainResult train_reinforce(const EnvConfig& env_config, std::shared_ptr<const ScenarioTable> scenario,
                            const AgentConfig& config, bool discrete, std::uint64_t seed) {
  validate(config);
  const Algorithm algorithm = discrete ? Algorithm::kReinforceDiscrete : Algorithm::kReinforceContinuous;
  DispatchEnv env = detail::make_env(env_config, algorithm, scenario);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  TrainResult result;
  Policy& policy = result.policy;
  policy.algorithm = algorithm;
  policy.scaler = ObservationScaler::fit(*scenario);
  policy.levels = env.action_spec().discrete_levels;
  const std::size_t n_actions = policy.levels.size();
  policy.network_spec = discrete ? detail::network_spec(config, n_actions, nn::OutputHead::kSoftmax)
                                 : detail::network_spec(config, 1, nn::OutputHead::kGaussian);
  policy.network = nn::init_parameters(policy.network_spec, rng, 0.01, config.initial_log_std);
  if (!discrete) detail::set_output_bias(policy.network_spec, policy.network, config.initial_action_mean);
  nn::AdamMoments moments = nn::AdamMoments::zeros(nn::parameter_count(policy.network_spec));
  const auto log_std_at = static_cast<Eigen::Index>(nn::log_std_offset(policy.network_spec));

  const double scale = env.config().reward_scale;
  std::vector<nn::Vector> states;
  std::vector<int> actions;
  std::vector<double> raw_actions;
  std::vector<double> rewards;

  for (int episode = 0; episode < config.episodes; ++episode) {
    states.clear();
    actions.clear();
    raw_actions.clear();
    rewards.clear();
    Observation obs = env.reset();
    while (!env.done()) {
      nn::Vector x = detail::scaled_input(policy.scaler, obs);
      const nn::Vector out = nn::forward(policy.network_spec, policy.network, x);
      StepResult step;
      if (discrete) {
        const int a = sample_categorical(out, rng);
        actions.push_back(a);
        step = env.step_discrete(a);
      } else {
        const double action = out[0] + std::exp(out[1]) * unit(rng);
        raw_actions.push_back(action);
        step = env.step(action);
      }
      states.push_back(std::move(x));
      rewards.push_back(step.reward * scale);
      obs = step.observation;
    }
    result.curve.push_back(detail::stats_from(env, episode));

    std::vector<double> returns = discounted_returns(rewards, config.gamma);
    if (config.normalize_returns) normalize(returns);
    const nn::Matrix batch = stack_columns(states);

    nn::Vector grad;
    if (discrete) {
      grad = reinforce_discrete_gradient(policy.network_spec, policy.network, batch, actions, returns);
    } else {
      const nn::ForwardCache cache = nn::forward_batch(policy.network_spec, policy.network, batch);
      const double log_std = policy.network.values[log_std_at];
      const double var = std::exp(2.0 * log_std);
      const auto steps = static_cast<double>(returns.size());
      nn::Matrix delta(1, batch.cols());
      double log_std_grad = 0.0;
      double loss = 0.0;
      for (Eigen::Index t = 0; t < batch.cols(); ++t) {
        const double g = returns[static_cast<std::size_t>(t)] / steps;
        const double diff = raw_actions[static_cast<std::size_t>(t)] - cache.pre_output(0, t);
        const double log_prob =
            -0.5 * diff * diff / var - log_std - 0.5 * std::log(2.0 * std::numbers::pi);
        loss -= g * log_prob;
        delta(0, t) = -g * diff / var;
        log_std_grad -= g * (diff * diff / var - 1.0);
      }
      detail::check_finite(loss, "REINFORCE loss");
      grad = nn::backward_pre_output(policy.network_spec, policy.network, cache, delta);
      grad[log_std_at] = log_std_grad;
    }
    nn::adam_update_inplace(policy.network, grad, moments, config.optimizer);
  }
  return result;
}

}  // namespace gtd
