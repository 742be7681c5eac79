// Proximal policy optimisation: Gaussian actor, separate critic, GAE,
// clipped surrogate objective.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "detail.hpp"
#include "gtdispatch/errors.hpp"

namespace gtd {

namespace {

constexpr double kMinLogStd = -5.0;
constexpr double kMaxLogStd = 1.0;

double gaussian_log_prob(double action, double mean, double log_std) {
  const double diff = action - mean;
  return -0.5 * diff * diff * std::exp(-2.0 * log_std) - log_std -
         0.5 * std::log(2.0 * std::numbers::pi);
}

struct Rollout {
  std::vector<nn::Vector> states;
  std::vector<double> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<bool> dones;

  void clear() {
    states.clear();
    actions.clear();
    log_probs.clear();
    rewards.clear();
    dones.clear();
  }
  std::size_t size() const { return states.size(); }
};

nn::Matrix gather(const std::vector<nn::Vector>& states, const std::vector<std::size_t>& idx,
                  std::size_t begin, std::size_t end) {
  nn::Matrix m(static_cast<Eigen::Index>(kObservationDim), static_cast<Eigen::Index>(end - begin));
  for (std::size_t k = begin; k < end; ++k) m.col(static_cast<Eigen::Index>(k - begin)) = states[idx[k]];
  return m;
}

}  // namespace

TrainResult train_ppo(const EnvConfig& env_config, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed) {
  validate(config);
  DispatchEnv env = detail::make_env(env_config, Algorithm::kPpo, scenario);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  TrainResult result;
  Policy& policy = result.policy;
  policy.algorithm = Algorithm::kPpo;
  policy.scaler = ObservationScaler::fit(*scenario);
  policy.network_spec = detail::network_spec(config, 1, nn::OutputHead::kGaussian);
  policy.network = nn::init_parameters(policy.network_spec, rng, 0.01, config.initial_log_std);
  detail::set_output_bias(policy.network_spec, policy.network, config.initial_action_mean);
  policy.value_spec = detail::network_spec(config, 1, nn::OutputHead::kLinear);
  policy.value = nn::init_parameters(policy.value_spec, rng);
  nn::AdamMoments actor_moments = nn::AdamMoments::zeros(nn::parameter_count(policy.network_spec));
  nn::AdamMoments critic_moments = nn::AdamMoments::zeros(nn::parameter_count(policy.value_spec));
  const auto log_std_at = static_cast<Eigen::Index>(nn::log_std_offset(policy.network_spec));

  const double scale = env.config().reward_scale;
  const std::size_t horizon =
      config.rollout_steps > 0 ? config.rollout_steps : env.horizon();
  Rollout rollout;

  auto update = [&](const nn::Vector& last_state, bool last_done) {
    const std::size_t n = rollout.size();
    if (n == 0) return;
    nn::Matrix all(static_cast<Eigen::Index>(kObservationDim), static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) all.col(static_cast<Eigen::Index>(t)) = rollout.states[t];
    const nn::Matrix values = nn::forward_batch(policy.value_spec, policy.value, all).output;
    double next_value = last_done ? 0.0 : nn::forward(policy.value_spec, policy.value, last_state)[0];

    std::vector<double> advantages(n), returns(n);
    double gae = 0.0;
    for (std::size_t t = n; t-- > 0;) {
      const double v = values(0, static_cast<Eigen::Index>(t));
      const double mask = rollout.dones[t] ? 0.0 : 1.0;
      const double delta = rollout.rewards[t] + config.gamma * next_value * mask - v;
      gae = delta + config.gamma * config.gae_lambda * mask * gae;
      advantages[t] = gae;
      returns[t] = gae + v;
      next_value = v;
    }
    if (config.normalize_advantages && n > 1) {
      const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / static_cast<double>(n);
      double var = 0.0;
      for (const double a : advantages) var += (a - mean) * (a - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      for (double& a : advantages) a = (a - mean) / (sd + 1e-8);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t begin = 0; begin < n; begin += config.minibatch_size) {
        const std::size_t end = std::min(n, begin + config.minibatch_size);
        const double inv_b = 1.0 / static_cast<double>(end - begin);
        const nn::Matrix batch = gather(rollout.states, order, begin, end);

        // actor
        const nn::ForwardCache actor = nn::forward_batch(policy.network_spec, policy.network, batch);
        const double log_std = policy.network.values[log_std_at];
        const double var = std::exp(2.0 * log_std);
        nn::Matrix delta_mean(1, batch.cols());
        double log_std_grad = -config.entropy_coef;
        double loss = 0.0;
        for (Eigen::Index k = 0; k < batch.cols(); ++k) {
          const std::size_t i = order[begin + static_cast<std::size_t>(k)];
          const double mean = actor.pre_output(0, k);
          const double diff = rollout.actions[i] - mean;
          const double ratio =
              std::exp(gaussian_log_prob(rollout.actions[i], mean, log_std) - rollout.log_probs[i]);
          const double adv = advantages[i];
          const double clipped = std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio);
          loss -= std::min(ratio * adv, clipped * adv) * inv_b;
          const double coeff = clipped_surrogate_coefficient(ratio, adv, config.clip_ratio);
          // d(-coeff * log pi)/d(mean) and d/d(log std)
          delta_mean(0, k) = -coeff * inv_b * diff / var;
          log_std_grad -= coeff * inv_b * (diff * diff / var - 1.0);
        }
        detail::check_finite(loss, "PPO policy loss");
        nn::Vector actor_grad =
            nn::backward_pre_output(policy.network_spec, policy.network, actor, delta_mean);
        actor_grad[log_std_at] = log_std_grad;
        nn::adam_update_inplace(policy.network, actor_grad, actor_moments, config.optimizer);
        policy.network.values[log_std_at] =
            std::clamp(policy.network.values[log_std_at], kMinLogStd, kMaxLogStd);

        // critic
        const nn::ForwardCache critic = nn::forward_batch(policy.value_spec, policy.value, batch);
        nn::Matrix delta_value(1, batch.cols());
        double value_loss = 0.0;
        for (Eigen::Index k = 0; k < batch.cols(); ++k) {
          const std::size_t i = order[begin + static_cast<std::size_t>(k)];
          const double err = critic.output(0, k) - returns[i];
          value_loss += config.value_coef * err * err * inv_b;
          delta_value(0, k) = 2.0 * config.value_coef * err * inv_b;
        }
        detail::check_finite(value_loss, "PPO value loss");
        const nn::Vector critic_grad =
            nn::backward_pre_output(policy.value_spec, policy.value, critic, delta_value);
        nn::adam_update_inplace(policy.value, critic_grad, critic_moments, config.value_optimizer);
      }
    }
    rollout.clear();
  };

  for (int episode = 0; episode < config.episodes; ++episode) {
    Observation obs = env.reset();
    nn::Vector x = detail::scaled_input(policy.scaler, obs);
    while (!env.done()) {
      const nn::Vector out = nn::forward(policy.network_spec, policy.network, x);
      const double action = out[0] + std::exp(out[1]) * unit(rng);
      const StepResult step = env.step(action);
      rollout.states.push_back(x);
      rollout.actions.push_back(action);
      rollout.log_probs.push_back(gaussian_log_prob(action, out[0], out[1]));
      rollout.rewards.push_back(step.reward * scale);
      rollout.dones.push_back(step.done);
      x = detail::scaled_input(policy.scaler, step.observation);
      if (rollout.size() >= horizon) update(x, step.done);
    }
    result.curve.push_back(detail::stats_from(env, episode));
    if (config.rollout_steps == 0) update(x, true);
  }
  // Leftover partial rollout; the final step was terminal.
  update(nn::Vector::Zero(static_cast<Eigen::Index>(kObservationDim)), true);
  return result;
}

}  // namespace gtd
