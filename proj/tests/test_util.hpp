#pragma once

#include <memory>
#include <random>
#include <vector>

#include "gtdispatch/scenario.hpp"

namespace gtd::fixtures {

inline ScenarioTable constant_scenario(std::size_t hours, double price, double demand,
                                       AmbientConditions ambient = {}) {
  std::vector<ScenarioRow> rows;
  const HourStamp start = hour_stamp(2018, 3, 1);
  for (std::size_t t = 0; t < hours; ++t) {
    rows.push_back(ScenarioRow{start + static_cast<HourStamp>(t), price, demand, ambient});
  }
  return ScenarioTable(std::move(rows));
}

// Random short scenario straddling the cold-start boundary and both sides of
// the GT's marginal cost.
inline ScenarioTable random_scenario(std::mt19937_64& rng, std::size_t hours) {
  std::uniform_real_distribution<double> price(0.0, 160.0);
  std::uniform_real_distribution<double> demand(0.0, 32.0);
  std::uniform_real_distribution<double> temp(-15.0, 30.0);
  std::uniform_real_distribution<double> pressure(90.0, 98.0);
  std::vector<ScenarioRow> rows;
  const HourStamp start = hour_stamp(2018, 1, 1) + static_cast<HourStamp>(rng() % 8000);
  for (std::size_t t = 0; t < hours; ++t) {
    AmbientConditions a;
    a.temperature_c = temp(rng);
    a.pressure_kpa = pressure(rng);
    rows.push_back(ScenarioRow{start + static_cast<HourStamp>(t), price(rng), demand(rng), a});
  }
  return ScenarioTable(std::move(rows));
}

inline std::shared_ptr<const ScenarioTable> share(ScenarioTable t) {
  return std::make_shared<const ScenarioTable>(std::move(t));
}

}  // namespace gtd::fixtures
