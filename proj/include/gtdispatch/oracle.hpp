#pragma once

// Perfect-foresight optimal dispatch for a known scenario.
//
// The O&M state machine only distinguishes OFF, RUNNING and EXTENDED, and
// hcount matters only up to the extended-operation threshold. Capping hcount
// at that threshold therefore loses nothing: every state above it has the
// same costs and the same successor. Backward induction over
// (hour, capped hcount) is exact.

#include <cstddef>
#include <span>
#include <vector>

#include "gtdispatch/env.hpp"
#include "gtdispatch/scenario.hpp"

namespace gtd {

struct OracleResult {
  // Summed forward in hour order, so it is bit-comparable across oracles.
  double cost = 0.0;
  std::vector<int> level_indices;
  std::vector<double> load_fractions;
  std::size_t evaluated = 0;  // transitions (DP) or full sequences (enumeration)
};

OracleResult dp_optimal(const ScenarioTable& scenario, std::span<const double> levels,
                        const EnvConfig& config);

inline constexpr std::size_t kExhaustiveLimit = 6'000'000;

// Enumerates every action sequence. Throws ConfigError if
// levels^hours exceeds `max_sequences`.
OracleResult exhaustive_optimal(const ScenarioTable& scenario, std::span<const double> levels,
                                const EnvConfig& config, std::size_t max_sequences = kExhaustiveLimit);

struct ReplayResult {
  double cost = 0.0;
  double reward = 0.0;
  int hours_on = 0;
  int cycles = 0;
  std::vector<HourOutcome> hours;
};

// Runs a load schedule through DispatchEnv.
ReplayResult replay_schedule(const ScenarioTable& scenario, std::span<const double> load_fractions,
                             const EnvConfig& config);

}  // namespace gtd
