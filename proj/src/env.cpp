#include "gtdispatch/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gtdispatch/errors.hpp"

namespace gtd {

double discrete_action_map(int index) {
  const auto& levels = default_discrete_levels();
  if (index < 0 || index >= static_cast<int>(levels.size())) {
    throw DomainError("discrete action index must lie in 0..6, got " + std::to_string(index));
  }
  return levels[static_cast<std::size_t>(index)];
}

double ActionSpec::resolve(double action) const {
  if (!std::isfinite(action)) throw DomainError("action must be finite");
  const double a = std::clamp(action, 0.0, 1.0);
  if (kind == ActionKind::kContinuous) {
    return a < off_threshold ? 0.0 : std::max(a, min_load);
  }
  double best = discrete_levels.front();
  for (const double level : discrete_levels) {
    if (std::abs(level - a) < std::abs(best - a)) best = level;
  }
  return best;
}

void validate(const EnvConfig& config) {
  validate(config.surrogate);
  validate(config.om);
  const auto& spec = config.action;
  if (spec.discrete_levels.empty()) throw ConfigError("discrete action levels must not be empty");
  for (const double level : spec.discrete_levels) {
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("discrete levels must lie in [0, 1]");
  }
  if (!std::is_sorted(spec.discrete_levels.begin(), spec.discrete_levels.end())) {
    throw ConfigError("discrete levels must be sorted");
  }
  if (!(spec.off_threshold >= 0.0 && spec.off_threshold <= 1.0 && spec.min_load >= 0.0 &&
        spec.min_load <= 1.0)) {
    throw ConfigError("off_threshold and min_load must lie in [0, 1]");
  }
  if (!(config.fuel_price_cad_per_gj >= 0.0)) throw ConfigError("fuel price must be non-negative");
  if (!(config.reward_scale > 0.0)) throw ConfigError("reward_scale must be positive");
  if (config.episode_hours == 0) throw ConfigError("episode_hours must be positive");
}

HourOutcome simulate_hour(const ScenarioRow& row, const GtState& state, double load_fraction,
                          const EnvConfig& config) {
  HourOutcome out;
  out.load_fraction = load_fraction;
  out.gt_on = load_fraction > 0.0;
  out.p_max_mw = max_power(row.ambient, config.surrogate);

  const double commanded_power = load_fraction * out.p_max_mw;
  const double commanded_fuel = fuel_rate(load_fraction, row.ambient, config.surrogate);
  out.started = out.gt_on && state.mode == GtMode::kOff;
  if (out.started) {
    const StartupResult start =
        startup_correction(commanded_power, commanded_fuel,
                           mechanical_idle_fuel_rate(row.ambient, config.surrogate),
                           row.ambient.temperature_c);
    out.p_gt_mwh = start.net_energy_mwh;
    out.fuel_gj = start.fuel_gj;
  } else {
    out.p_gt_mwh = commanded_power;
    out.fuel_gj = commanded_fuel;
  }

  const double demand = row.demand_mw;
  out.p_grid_mwh = std::max(0.0, demand - out.p_gt_mwh);
  out.p_waste_mwh = std::max(0.0, out.p_gt_mwh - demand);

  const OmStep om = om_step(state, out.gt_on, config.om, config.om_variant);
  out.cost = om.cost;
  out.cost.grid = grid_cost(row.price_cad_per_mwh, out.p_grid_mwh);
  out.cost.fuel = fuel_cost(out.fuel_gj, config.fuel_price_cad_per_gj);
  out.cost.total = out.cost.fuel + out.cost.grid + out.cost.om_fixed + out.cost.om_cycle +
                   out.cost.om_hourly;
  out.next = om.next;
  return out;
}

std::array<double, kObservationDim> Observation::to_array() const {
  return {pool_price, load_mw, temperature_c, pressure_kpa, rel_humidity_pct,
          static_cast<double>(gt_mode)};
}

Observation make_observation(const ScenarioRow& row, const GtState& state) {
  return Observation{row.price_cad_per_mwh,    row.demand_mw,
                     row.ambient.temperature_c, row.ambient.pressure_kpa,
                     row.ambient.rel_humidity_pct, static_cast<int>(state.mode)};
}

DispatchEnv::DispatchEnv(EnvConfig config) : config_(std::move(config)) { validate(config_); }

Observation DispatchEnv::reset(std::shared_ptr<const ScenarioTable> scenario) {
  if (!scenario || scenario->size() != config_.episode_hours) {
    throw ConfigError("scenario must have exactly " + std::to_string(config_.episode_hours) +
                      " hours, got " + std::to_string(scenario ? scenario->size() : 0));
  }
  scenario_ = std::move(scenario);
  return reset();
}

Observation DispatchEnv::reset() {
  if (!scenario_) throw UsageError("reset() called before a scenario was provided");
  hour_ = 0;
  state_ = GtState{};
  episode_reward_ = 0.0;
  hours_on_ = 0;
  cycles_ = 0;
  return current_observation();
}

Observation DispatchEnv::current_observation() const {
  const std::size_t row = std::min(hour_, horizon() - 1);
  return make_observation((*scenario_)[row], state_);
}

StepResult DispatchEnv::step(double action) {
  if (!scenario_) throw UsageError("step() called before reset()");
  if (done()) throw UsageError("step() called after the episode ended");
  const double load = config_.action.resolve(action);

  StepResult result;
  result.info = simulate_hour((*scenario_)[hour_], state_, load, config_);
  result.reward = -result.info.cost.total;
  state_ = result.info.next;
  ++hour_;
  episode_reward_ += result.reward;
  if (result.info.gt_on) ++hours_on_;
  if (result.info.started) ++cycles_;
  result.done = done();
  result.observation = current_observation();
  return result;
}

StepResult DispatchEnv::step_discrete(int index) {
  if (index < 0 || index >= static_cast<int>(config_.action.discrete_levels.size())) {
    throw DomainError("discrete action index out of range: " + std::to_string(index));
  }
  return step(config_.action.discrete_levels[static_cast<std::size_t>(index)]);
}

ObservationScaler::ObservationScaler(std::array<double, kObservationDim - 1> min,
                                     std::array<double, kObservationDim - 1> max)
    : min_(min), max_(max) {}

ObservationScaler ObservationScaler::fit(const ScenarioTable& scenario) {
  std::array<double, kObservationDim - 1> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& row : scenario.rows()) {
    const auto obs = make_observation(row, GtState{}).to_array();
    for (std::size_t k = 0; k + 1 < kObservationDim; ++k) {
      lo[k] = std::min(lo[k], obs[k]);
      hi[k] = std::max(hi[k], obs[k]);
    }
  }
  if (scenario.empty()) {
    lo.fill(0.0);
    hi.fill(0.0);
  }
  return ObservationScaler(lo, hi);
}

std::array<double, kObservationDim> ObservationScaler::transform(const Observation& obs) const {
  const auto raw = obs.to_array();
  std::array<double, kObservationDim> out{};
  for (std::size_t k = 0; k + 1 < kObservationDim; ++k) {
    const double span = max_[k] - min_[k];
    out[k] = span > 0.0 ? (raw[k] - min_[k]) / span : 0.0;
  }
  out[kObservationDim - 1] = raw[kObservationDim - 1] / 2.0;
  return out;
}

}  // namespace gtd
