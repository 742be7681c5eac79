#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "detail.hpp"
#include "gtdispatch/errors.hpp"

namespace gtd {

Algorithm parse_algorithm(std::string_view name) {
  if (name == "reinforce_disc" || name == "reinforce_discrete") return Algorithm::kReinforceDiscrete;
  if (name == "reinforce_cont" || name == "reinforce_continuous") return Algorithm::kReinforceContinuous;
  if (name == "dqn") return Algorithm::kDqn;
  if (name == "ppo") return Algorithm::kPpo;
  if (name == "cem") return Algorithm::kCem;
  if (name == "rule") return Algorithm::kRule;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kReinforceDiscrete:
      return "reinforce_disc";
    case Algorithm::kReinforceContinuous:
      return "reinforce_cont";
    case Algorithm::kDqn:
      return "dqn";
    case Algorithm::kPpo:
      return "ppo";
    case Algorithm::kCem:
      return "cem";
    case Algorithm::kRule:
      return "rule";
  }
  return "unknown";
}

ActionKind action_kind(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kReinforceDiscrete:
    case Algorithm::kDqn:
    case Algorithm::kRule:
      return ActionKind::kDiscrete;
    case Algorithm::kReinforceContinuous:
    case Algorithm::kPpo:
    case Algorithm::kCem:
      return ActionKind::kContinuous;
  }
  return ActionKind::kDiscrete;
}

AgentConfig default_agent_config(Algorithm algorithm) {
  AgentConfig c;
  c.algorithm = algorithm;
  switch (algorithm) {
    case Algorithm::kReinforceDiscrete:
    case Algorithm::kReinforceContinuous:
      c.optimizer.learning_rate = 1e-3;
      break;
    case Algorithm::kDqn:
      c.gamma = 0.95;
      c.optimizer.learning_rate = 5e-4;
      break;
    case Algorithm::kPpo:
      c.gamma = 0.95;
      c.optimizer.learning_rate = 1e-3;
      c.value_optimizer.learning_rate = 3e-3;
      c.epochs = 30;
      break;
    case Algorithm::kCem:
    case Algorithm::kRule:
      break;
  }
  return c;
}

void validate(const AgentConfig& c) {
  if (c.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(c.epsilon_start >= c.epsilon_end && c.epsilon_end >= 0.0 && c.epsilon_start <= 1.0)) {
    throw ConfigError("epsilon schedule must be non-increasing within [0, 1]");
  }
  if (c.epsilon_fixed_episodes < 0) throw ConfigError("epsilon_fixed_episodes must be >= 0");
  if (c.batch_size == 0 || c.minibatch_size == 0 || c.train_frequency == 0 ||
      c.target_sync_steps == 0 || c.replay_capacity == 0) {
    throw ConfigError("batch sizes, train frequency, target sync and replay capacity must be positive");
  }
  if (!(c.clip_ratio > 0.0) || !(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0) || c.epochs < 1) {
    throw ConfigError("invalid PPO settings");
  }
  if (c.population < 2) throw ConfigError("CEM population must be at least 2");
  if (!(c.elite_fraction > 0.0 && c.elite_fraction <= 1.0)) {
    throw ConfigError("CEM elite fraction must lie in (0, 1]");
  }
  if (c.init_stddev < 0.0 || c.stddev_floor < 0.0) throw ConfigError("CEM std settings must be >= 0");
  for (const auto w : c.hidden_layers) {
    if (w == 0) throw ConfigError("hidden layer widths must be positive");
  }
}

double epsilon_for_episode(int episode, int episodes, double start, double end, int fixed_tail) {
  const int decay_episodes = episodes - fixed_tail;
  if (episode >= decay_episodes || decay_episodes <= 0) return end;
  return start + (end - start) * static_cast<double>(episode) / static_cast<double>(decay_episodes);
}

double clipped_surrogate_coefficient(double ratio, double advantage, double clip) {
  if (advantage > 0.0 && ratio > 1.0 + clip) return 0.0;
  if (advantage < 0.0 && ratio < 1.0 - clip) return 0.0;
  return ratio * advantage;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    out[t] = running;
  }
  return out;
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::kPrice:
      return "price";
    case RuleKind::kDemand:
      return "demand";
    case RuleKind::kAnd:
      return "and";
    case RuleKind::kOr:
      return "or";
  }
  return "price";
}

RuleKind parse_rule_kind(std::string_view name) {
  if (name == "price") return RuleKind::kPrice;
  if (name == "demand") return RuleKind::kDemand;
  if (name == "and") return RuleKind::kAnd;
  if (name == "or") return RuleKind::kOr;
  throw ConfigError("unknown rule kind '" + std::string(name) + "'");
}

bool Rule::fires(const Observation& obs) const {
  const bool price = obs.pool_price > price_threshold;
  const bool demand = obs.load_mw > demand_threshold;
  switch (kind) {
    case RuleKind::kPrice:
      return price;
    case RuleKind::kDemand:
      return demand;
    case RuleKind::kAnd:
      return price && demand;
    case RuleKind::kOr:
      return price || demand;
  }
  return false;
}

std::string Rule::describe() const {
  std::ostringstream s;
  switch (kind) {
    case RuleKind::kPrice:
      s << "price > " << price_threshold;
      break;
    case RuleKind::kDemand:
      s << "demand > " << demand_threshold;
      break;
    case RuleKind::kAnd:
      s << "price > " << price_threshold << " AND demand > " << demand_threshold;
      break;
    case RuleKind::kOr:
      s << "price > " << price_threshold << " OR demand > " << demand_threshold;
      break;
  }
  return s.str();
}

double Policy::action(const Observation& obs) const {
  if (algorithm == Algorithm::kRule) return rule.fires(obs) ? 1.0 : 0.0;
  const nn::Vector x = detail::scaled_input(scaler, obs);
  const nn::ForwardCache cache = nn::forward_batch(network_spec, network, x);
  switch (algorithm) {
    case Algorithm::kReinforceDiscrete:
    case Algorithm::kDqn: {
      Eigen::Index best = 0;
      cache.pre_output.col(0).maxCoeff(&best);
      return levels.at(static_cast<std::size_t>(best));
    }
    case Algorithm::kReinforceContinuous:
    case Algorithm::kPpo:
    case Algorithm::kCem:
      return cache.pre_output(0, 0);
    case Algorithm::kRule:
      break;
  }
  return 0.0;
}

EpisodeStats evaluate_policy(const Policy& policy, const EnvConfig& env_config,
                             std::shared_ptr<const ScenarioTable> scenario) {
  DispatchEnv env = detail::make_env(env_config, policy.algorithm, std::move(scenario));
  Observation obs = env.reset();
  while (!env.done()) obs = env.step(policy.action(obs)).observation;
  return detail::stats_from(env, 0);
}

namespace detail {

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw TrainingError(std::string("non-finite ") + what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// policy files

namespace {

std::string join_numbers(const double* values, std::size_t n) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, values[i]);
    if (i) out += ' ';
    out.append(buf, ptr);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos >= text.size()) break;
    std::size_t end = text.find(' ', pos);
    if (end == std::string::npos) end = text.size();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, v);
    if (ec != std::errc{} || ptr != text.data() + end) {
      throw ParseError("policy", 0, "bad number '" + text.substr(pos, end - pos) + "'");
    }
    out.push_back(v);
    pos = end;
  }
  return out;
}

std::string read_keyed(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(key, 0) != 0) {
    throw ParseError("policy", 0, "expected '" + key + "'");
  }
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

}  // namespace

void save_policy(const std::filesystem::path& path, const Policy& p) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy " + path.string());
  out << "gtdispatch-policy 1\n";
  out << "algorithm " << to_string(p.algorithm) << '\n';
  out << "scaler_min " << join_numbers(p.scaler.min().data(), p.scaler.min().size()) << '\n';
  out << "scaler_max " << join_numbers(p.scaler.max().data(), p.scaler.max().size()) << '\n';
  out << "levels " << join_numbers(p.levels.data(), p.levels.size()) << '\n';
  const double thresholds[2] = {p.rule.price_threshold, p.rule.demand_threshold};
  out << "rule " << to_string(p.rule.kind) << ' ' << join_numbers(thresholds, 2) << '\n';
  const bool has_network = p.network.values.size() > 0;
  const bool has_value = p.value.values.size() > 0;
  out << "networks " << (has_network ? 1 : 0) + (has_value ? 1 : 0) << '\n';
  if (has_network) nn::write_checkpoint(out, p.network_spec, p.network);
  if (has_value) nn::write_checkpoint(out, p.value_spec, p.value);
}

Policy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy " + path.string());
  if (read_keyed(in, "gtdispatch-policy") != "1") throw ParseError("policy", 1, "unsupported version");
  Policy p;
  p.algorithm = parse_algorithm(read_keyed(in, "algorithm"));
  const auto lo = parse_numbers(read_keyed(in, "scaler_min"));
  const auto hi = parse_numbers(read_keyed(in, "scaler_max"));
  if (lo.size() != kObservationDim - 1 || hi.size() != kObservationDim - 1) {
    throw ParseError("policy", 3, "scaler needs five values per bound");
  }
  std::array<double, kObservationDim - 1> mn{}, mx{};
  std::copy(lo.begin(), lo.end(), mn.begin());
  std::copy(hi.begin(), hi.end(), mx.begin());
  p.scaler = ObservationScaler(mn, mx);
  p.levels = parse_numbers(read_keyed(in, "levels"));
  {
    const std::string rule = read_keyed(in, "rule");
    const auto space = rule.find(' ');
    p.rule.kind = parse_rule_kind(rule.substr(0, space));
    const auto th = parse_numbers(rule.substr(space + 1));
    if (th.size() != 2) throw ParseError("policy", 6, "rule needs two thresholds");
    p.rule.price_threshold = th[0];
    p.rule.demand_threshold = th[1];
  }
  const auto networks = parse_numbers(read_keyed(in, "networks"));
  const int count = networks.empty() ? 0 : static_cast<int>(networks[0]);
  if (count >= 1) nn::read_checkpoint(in, p.network_spec, p.network);
  if (count >= 2) nn::read_checkpoint(in, p.value_spec, p.value);
  return p;
}

}  // namespace gtd
