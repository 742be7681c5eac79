// Deep Q-learning with uniform experience replay and a hard-synced target
// network.

#include <algorithm>
#include <random>

#include "detail.hpp"
#include "gtdispatch/errors.hpp"

namespace gtd {

namespace {

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity)
      : states_(static_cast<Eigen::Index>(kObservationDim), static_cast<Eigen::Index>(capacity)),
        next_states_(static_cast<Eigen::Index>(kObservationDim), static_cast<Eigen::Index>(capacity)),
        actions_(capacity),
        rewards_(capacity),
        terminal_(capacity),
        capacity_(capacity) {}

  void add(const nn::Vector& s, int a, double r, const nn::Vector& s_next, bool terminal) {
    const auto i = static_cast<Eigen::Index>(cursor_);
    states_.col(i) = s;
    next_states_.col(i) = s_next;
    actions_[cursor_] = a;
    rewards_[cursor_] = r;
    terminal_[cursor_] = terminal;
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }

  std::size_t size() const { return size_; }

  struct Batch {
    nn::Matrix states;
    nn::Matrix next_states;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<bool> terminal;
  };

  Batch sample(std::size_t n, std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    Batch b;
    b.states.resize(states_.rows(), static_cast<Eigen::Index>(n));
    b.next_states.resize(states_.rows(), static_cast<Eigen::Index>(n));
    b.actions.resize(n);
    b.rewards.resize(n);
    b.terminal.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = pick(rng);
      b.states.col(static_cast<Eigen::Index>(k)) = states_.col(static_cast<Eigen::Index>(i));
      b.next_states.col(static_cast<Eigen::Index>(k)) = next_states_.col(static_cast<Eigen::Index>(i));
      b.actions[k] = actions_[i];
      b.rewards[k] = rewards_[i];
      b.terminal[k] = terminal_[i];
    }
    return b;
  }

 private:
  nn::Matrix states_;
  nn::Matrix next_states_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<bool> terminal_;
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
};

int greedy(const nn::NetworkSpec& spec, const nn::ParameterSet& params, const nn::Vector& x) {
  const nn::Vector q = nn::forward(spec, params, x);
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

TrainResult train_dqn(const EnvConfig& env_config, std::shared_ptr<const ScenarioTable> scenario,
                      const AgentConfig& config, std::uint64_t seed) {
  validate(config);
  DispatchEnv env = detail::make_env(env_config, Algorithm::kDqn, scenario);
  std::mt19937_64 rng(seed);

  TrainResult result;
  Policy& policy = result.policy;
  policy.algorithm = Algorithm::kDqn;
  policy.scaler = ObservationScaler::fit(*scenario);
  policy.levels = env.action_spec().discrete_levels;
  const int n_actions = static_cast<int>(policy.levels.size());
  policy.network_spec =
      detail::network_spec(config, policy.levels.size(), nn::OutputHead::kLinear);
  policy.network = nn::init_parameters(policy.network_spec, rng);
  nn::ParameterSet target = policy.network;
  nn::AdamMoments moments = nn::AdamMoments::zeros(nn::parameter_count(policy.network_spec));

  ReplayBuffer replay(config.replay_capacity);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> random_action(0, n_actions - 1);
  const double scale = env.config().reward_scale;
  std::size_t total_steps = 0;

  for (int episode = 0; episode < config.episodes; ++episode) {
    const double epsilon = epsilon_for_episode(episode, config.episodes, config.epsilon_start,
                                               config.epsilon_end, config.epsilon_fixed_episodes);
    Observation obs = env.reset();
    nn::Vector x = detail::scaled_input(policy.scaler, obs);
    while (!env.done()) {
      const int a = coin(rng) < epsilon ? random_action(rng)
                                        : greedy(policy.network_spec, policy.network, x);
      const StepResult step = env.step_discrete(a);
      nn::Vector x_next = detail::scaled_input(policy.scaler, step.observation);
      replay.add(x, a, step.reward * scale, x_next, step.done);
      x = std::move(x_next);
      ++total_steps;

      if (total_steps >= config.learning_starts && replay.size() >= config.batch_size &&
          total_steps % config.train_frequency == 0) {
        const auto batch = replay.sample(config.batch_size, rng);
        const nn::ForwardCache online = nn::forward_batch(policy.network_spec, policy.network, batch.states);
        const nn::Matrix q_next = nn::forward_batch(policy.network_spec, target, batch.next_states).output;
        nn::Matrix q_next_online;
        if (config.double_dqn) {
          q_next_online = nn::forward_batch(policy.network_spec, policy.network, batch.next_states).output;
        }
        nn::Matrix delta = nn::Matrix::Zero(online.output.rows(), online.output.cols());
        const double inv_n = 1.0 / static_cast<double>(config.batch_size);
        double loss = 0.0;
        for (Eigen::Index k = 0; k < delta.cols(); ++k) {
          const auto kk = static_cast<std::size_t>(k);
          double bootstrap = 0.0;
          if (!batch.terminal[kk]) {
            if (config.double_dqn) {
              Eigen::Index best = 0;
              q_next_online.col(k).maxCoeff(&best);
              bootstrap = q_next(best, k);
            } else {
              bootstrap = q_next.col(k).maxCoeff();
            }
          }
          const double td_target = batch.rewards[kk] + config.gamma * bootstrap;
          const auto a_k = static_cast<Eigen::Index>(batch.actions[kk]);
          const double err = online.output(a_k, k) - td_target;
          const double kappa = config.huber_delta;
          loss += std::abs(err) <= kappa ? 0.5 * err * err : kappa * (std::abs(err) - 0.5 * kappa);
          delta(a_k, k) = std::clamp(err, -kappa, kappa) * inv_n;
        }
        detail::check_finite(loss, "DQN loss");
        const nn::Vector grad = nn::backward_pre_output(policy.network_spec, policy.network, online, delta);
        nn::adam_update_inplace(policy.network, grad, moments, config.optimizer);
      }
      if (total_steps % config.target_sync_steps == 0) target = policy.network;
    }
    EpisodeStats stats = detail::stats_from(env, episode);
    stats.epsilon = epsilon;
    result.curve.push_back(stats);
  }
  return result;
}

}  // namespace gtd
