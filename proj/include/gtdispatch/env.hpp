#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "gtdispatch/cost.hpp"
#include "gtdispatch/scenario.hpp"
#include "gtdispatch/surrogate.hpp"

namespace gtd {

enum class ActionKind { kDiscrete, kContinuous };

inline const std::vector<double>& default_discrete_levels() {
  static const std::vector<double> levels{0.0, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  return levels;
}

// Load fraction for one of the seven discrete actions.
double discrete_action_map(int index);

struct ActionSpec {
  ActionKind kind = ActionKind::kDiscrete;
  std::vector<double> discrete_levels = default_discrete_levels();
  // Continuous only: commands below off_threshold switch the GT off, the
  // rest are lifted to at least min_load.
  double off_threshold = 0.25;
  double min_load = 0.5;

  // Maps a raw action to a load fraction. The action is clamped to [0, 1];
  // discrete specs snap to the nearest level. Throws DomainError if
  // non-finite.
  double resolve(double action) const;
};

struct EnvConfig {
  ActionSpec action;
  OmVariant om_variant = OmVariant::kDynamic;
  SurrogateParams surrogate;
  OmParameters om;
  double fuel_price_cad_per_gj = kDefaultFuelPrice;
  // Agents see reward * reward_scale; everything reported stays in C$.
  double reward_scale = 1e-3;
  std::size_t episode_hours = 8760;
};

void validate(const EnvConfig& config);

// Everything that happens in one hour for a given load fraction.
struct HourOutcome {
  CostBreakdown cost;
  GtState next;
  double load_fraction = 0.0;
  double p_max_mw = 0.0;
  double p_gt_mwh = 0.0;
  double p_grid_mwh = 0.0;
  double p_waste_mwh = 0.0;
  double fuel_gj = 0.0;
  bool gt_on = false;
  bool started = false;
};

// Pure hour transition shared by the environment and the oracle.
HourOutcome simulate_hour(const ScenarioRow& row, const GtState& state, double load_fraction,
                          const EnvConfig& config);

inline constexpr std::size_t kObservationDim = 6;

struct Observation {
  double pool_price = 0.0;
  double load_mw = 0.0;
  double temperature_c = 0.0;
  double pressure_kpa = 0.0;
  double rel_humidity_pct = 0.0;
  int gt_mode = 0;

  std::array<double, kObservationDim> to_array() const;
};

Observation make_observation(const ScenarioRow& row, const GtState& state);

struct StepResult {
  Observation observation;
  double reward = 0.0;  // C$, equals -info.cost.total
  bool done = false;
  HourOutcome info;
};

// Hourly dispatch MDP over one scenario.
class DispatchEnv {
 public:
  explicit DispatchEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const ActionSpec& action_spec() const { return config_.action; }

  // Throws ConfigError if the scenario length differs from episode_hours.
  Observation reset(std::shared_ptr<const ScenarioTable> scenario);
  Observation reset();

  // Throws UsageError after the episode ended, DomainError on non-finite action.
  StepResult step(double action);
  StepResult step_discrete(int index);

  std::size_t hour() const { return hour_; }
  bool done() const { return hour_ >= horizon(); }
  std::size_t horizon() const { return scenario_ ? scenario_->size() : 0; }
  const GtState& gt_state() const { return state_; }
  const ScenarioTable& scenario() const { return *scenario_; }
  std::shared_ptr<const ScenarioTable> scenario_ptr() const { return scenario_; }

  // Running totals for the current episode.
  double episode_reward() const { return episode_reward_; }
  int episode_hours_on() const { return hours_on_; }
  int episode_cycles() const { return cycles_; }

 private:
  Observation current_observation() const;

  EnvConfig config_;
  std::shared_ptr<const ScenarioTable> scenario_;
  std::size_t hour_ = 0;
  GtState state_;
  double episode_reward_ = 0.0;
  int hours_on_ = 0;
  int cycles_ = 0;
};

// Per-feature affine scaling to [0, 1]; GT mode maps to {0, 0.5, 1}.
class ObservationScaler {
 public:
  ObservationScaler() = default;
  ObservationScaler(std::array<double, kObservationDim - 1> min,
                    std::array<double, kObservationDim - 1> max);
  static ObservationScaler fit(const ScenarioTable& scenario);

  std::array<double, kObservationDim> transform(const Observation& obs) const;

  const std::array<double, kObservationDim - 1>& min() const { return min_; }
  const std::array<double, kObservationDim - 1>& max() const { return max_; }

 private:
  std::array<double, kObservationDim - 1> min_{};
  std::array<double, kObservationDim - 1> max_{};
};

}  // namespace gtd
