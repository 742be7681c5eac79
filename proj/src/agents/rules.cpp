#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"
#include "gtdispatch/errors.hpp"

namespace gtd {

namespace {

std::vector<double> sorted_unique(std::vector<double> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(lo + (hi - lo) * i / steps);
  return out;
}

}  // namespace

std::vector<double> default_price_grid(const ScenarioTable& scenario) {
  // 5 C$/MWh steps up to 200, then coarse steps to the cap.
  std::vector<double> grid = linear_grid(0.0, 200.0, 40);
  for (const double p : {250.0, 300.0, 400.0, 500.0, 750.0}) grid.push_back(p);
  const auto prices = scenario.prices();
  if (!prices.empty()) grid.push_back(*std::max_element(prices.begin(), prices.end()));
  return sorted_unique(grid);
}

std::vector<double> default_demand_grid(const ScenarioTable& scenario) {
  const auto demand = scenario.demands();
  const double hi = demand.empty() ? 0.0 : *std::max_element(demand.begin(), demand.end());
  std::vector<double> grid = linear_grid(0.0, std::ceil(hi), static_cast<int>(std::max(1.0, std::ceil(hi))));
  return sorted_unique(grid);
}

RuleSearchResult search_rules(const EnvConfig& env_config, std::shared_ptr<const ScenarioTable> scenario,
                              std::vector<double> price_grid, std::vector<double> demand_grid) {
  if (price_grid.empty() || demand_grid.empty()) throw ConfigError("rule search grids must not be empty");
  price_grid = sorted_unique(std::move(price_grid));
  demand_grid = sorted_unique(std::move(demand_grid));
  DispatchEnv env = detail::make_env(env_config, Algorithm::kRule, std::move(scenario));

  RuleSearchResult result;
  // Strict improvement only: enumeration order is the tie-break order.
  auto consider = [&](const Rule& rule) {
    Observation obs = env.reset();
    while (!env.done()) obs = env.step(rule.fires(obs) ? 1.0 : 0.0).observation;
    ++result.evaluated;
    if (env.episode_reward() > result.score) {
      result.score = env.episode_reward();
      result.best = rule;
      result.stats = detail::stats_from(env, 0);
    }
  };
  const double unused = std::numeric_limits<double>::infinity();
  for (const double p : price_grid) consider(Rule{RuleKind::kPrice, p, unused});
  for (const double d : demand_grid) consider(Rule{RuleKind::kDemand, unused, d});
  for (const RuleKind kind : {RuleKind::kAnd, RuleKind::kOr}) {
    for (const double p : price_grid) {
      for (const double d : demand_grid) consider(Rule{kind, p, d});
    }
  }
  return result;
}

TrainResult train_agent(const EnvConfig& env, std::shared_ptr<const ScenarioTable> scenario,
                        const AgentConfig& config, std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::kReinforceDiscrete:
      return train_reinforce(env, std::move(scenario), config, true, seed);
    case Algorithm::kReinforceContinuous:
      return train_reinforce(env, std::move(scenario), config, false, seed);
    case Algorithm::kDqn:
      return train_dqn(env, std::move(scenario), config, seed);
    case Algorithm::kPpo:
      return train_ppo(env, std::move(scenario), config, seed);
    case Algorithm::kCem:
      return train_cem(env, std::move(scenario), config, seed);
    case Algorithm::kRule: {
      validate(config);
      const auto prices = config.price_grid.empty() ? default_price_grid(*scenario) : config.price_grid;
      const auto demands = config.demand_grid.empty() ? default_demand_grid(*scenario) : config.demand_grid;
      const RuleSearchResult search = search_rules(env, scenario, prices, demands);
      TrainResult r;
      r.policy.algorithm = Algorithm::kRule;
      r.policy.scaler = ObservationScaler::fit(*scenario);
      r.policy.rule = search.best;
      for (int e = 0; e < config.episodes; ++e) {
        EpisodeStats s = search.stats;
        s.episode = e;
        r.curve.push_back(s);
      }
      return r;
    }
  }
  throw ConfigError("unsupported algorithm");
}

}  // namespace gtd
