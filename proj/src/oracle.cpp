#include "gtdispatch/oracle.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "gtdispatch/errors.hpp"

namespace gtd {

namespace {

GtState state_from_capped(int hcount, int threshold) {
  if (hcount == 0) return GtState{};
  return GtState{hcount >= threshold ? GtMode::kExtended : GtMode::kRunning, hcount};
}

void check_levels(std::span<const double> levels) {
  if (levels.empty()) throw ConfigError("oracle needs at least one action level");
  for (const double l : levels) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("oracle action levels must lie in [0, 1]");
  }
}

}  // namespace

OracleResult dp_optimal(const ScenarioTable& scenario, std::span<const double> levels,
                        const EnvConfig& config) {
  check_levels(levels);
  const int threshold = config.om.hour_threshold();
  const std::size_t hours = scenario.size();
  const std::size_t states = static_cast<std::size_t>(threshold) + 1;
  const std::size_t actions = levels.size();

  // value[h * states + s]: optimal cost-to-go from hour h in capped state s.
  std::vector<double> value((hours + 1) * states, 0.0);
  std::vector<int> policy(hours * states, 0);
  OracleResult result;

  for (std::size_t h = hours; h-- > 0;) {
    const ScenarioRow& row = scenario[h];
    for (std::size_t s = 0; s < states; ++s) {
      const GtState state = state_from_capped(static_cast<int>(s), threshold);
      double best = std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (std::size_t a = 0; a < actions; ++a) {
        const HourOutcome o = simulate_hour(row, state, levels[a], config);
        const std::size_t next = static_cast<std::size_t>(std::min(o.next.hcount, threshold));
        const double total = o.cost.total + value[(h + 1) * states + next];
        ++result.evaluated;
        if (total < best) {
          best = total;
          best_a = static_cast<int>(a);
        }
      }
      value[h * states + s] = best;
      policy[h * states + s] = best_a;
    }
  }

  // Roll the policy forward from the cold start, summing in hour order.
  GtState state{};
  result.level_indices.reserve(hours);
  result.load_fractions.reserve(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    const std::size_t s = static_cast<std::size_t>(std::min(state.hcount, threshold));
    const int a = policy[h * states + s];
    const HourOutcome o = simulate_hour(scenario[h], state, levels[static_cast<std::size_t>(a)], config);
    result.cost += o.cost.total;
    result.level_indices.push_back(a);
    result.load_fractions.push_back(levels[static_cast<std::size_t>(a)]);
    state = o.next;
  }
  return result;
}

namespace {

struct Enumerator {
  const ScenarioTable& scenario;
  std::span<const double> levels;
  const EnvConfig& config;
  std::vector<int> current;
  OracleResult best;

  void descend(std::size_t hour, const GtState& state, double accumulated) {
    if (hour == scenario.size()) {
      ++best.evaluated;
      if (accumulated < best.cost) {
        best.cost = accumulated;
        best.level_indices = current;
      }
      return;
    }
    for (std::size_t a = 0; a < levels.size(); ++a) {
      const HourOutcome o = simulate_hour(scenario[hour], state, levels[a], config);
      current[hour] = static_cast<int>(a);
      descend(hour + 1, o.next, accumulated + o.cost.total);
    }
  }
};

}  // namespace

OracleResult exhaustive_optimal(const ScenarioTable& scenario, std::span<const double> levels,
                                const EnvConfig& config, std::size_t max_sequences) {
  check_levels(levels);
  const double sequences =
      std::pow(static_cast<double>(levels.size()), static_cast<double>(scenario.size()));
  if (sequences > static_cast<double>(max_sequences)) {
    throw ConfigError("exhaustive search over " + std::to_string(levels.size()) + "^" +
                      std::to_string(scenario.size()) + " sequences exceeds the limit of " +
                      std::to_string(max_sequences));
  }
  Enumerator e{scenario, levels, config, std::vector<int>(scenario.size(), 0), {}};
  e.best.cost = std::numeric_limits<double>::infinity();
  if (scenario.empty()) {
    e.best.cost = 0.0;
    e.best.evaluated = 1;
    return e.best;
  }
  e.descend(0, GtState{}, 0.0);
  for (const int a : e.best.level_indices) {
    e.best.load_fractions.push_back(levels[static_cast<std::size_t>(a)]);
  }
  return e.best;
}

ReplayResult replay_schedule(const ScenarioTable& scenario, std::span<const double> load_fractions,
                             const EnvConfig& config) {
  if (load_fractions.size() != scenario.size()) {
    throw ConfigError("schedule length does not match scenario length");
  }
  EnvConfig replay_config = config;
  replay_config.episode_hours = scenario.size();
  // Continuous resolution keeps 0 and every level >= min_load unchanged.
  replay_config.action.kind = ActionKind::kContinuous;
  replay_config.action.off_threshold = 0.0;
  replay_config.action.min_load = 0.0;
  DispatchEnv env(replay_config);
  env.reset(std::make_shared<const ScenarioTable>(scenario));

  ReplayResult r;
  r.hours.reserve(scenario.size());
  for (const double load : load_fractions) {
    StepResult step = env.step(load);
    r.cost += step.info.cost.total;
    r.hours.push_back(step.info);
  }
  r.reward = env.episode_reward();
  r.hours_on = env.episode_hours_on();
  r.cycles = env.episode_cycles();
  return r;
}

}  // namespace gtd
