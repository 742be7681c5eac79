#pragma once

#include <string>
#include <string_view>

namespace gtd {

inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kDefaultFuelPrice = 3.9;  // C$/GJ

// Lifetime-based O&M cost parameters.
struct OmParameters {
  double life_hours = 200000.0;
  double life_cycles = 26000.0;
  double fixed_annual_cad = 780000.0;
  double variable_lifetime_cad = 33000000.0;
  double hours_per_year = kHoursPerYear;

  double fixed_hourly() const { return fixed_annual_cad / hours_per_year; }
  double cycle_cost() const { return variable_lifetime_cad / life_cycles; }
  double hourly_cost() const { return variable_lifetime_cad / life_hours; }
  // Consecutive-hour count at which the GT enters extended operation.
  int hour_threshold() const;
};

void validate(const OmParameters& params);

enum class GtMode { kOff = 0, kRunning = 1, kExtended = 2 };

// O&M state machine: operating mode plus consecutive operating hours.
struct GtState {
  GtMode mode = GtMode::kOff;
  int hcount = 0;

  friend bool operator==(const GtState&, const GtState&) = default;
};

// Throws DomainError if mode and hcount disagree under the given threshold.
void validate(const GtState& state, const OmParameters& params);

enum class OmVariant { kDynamic, kHourlyOnly, kNoVariable };

OmVariant parse_om_variant(std::string_view name);
std::string to_string(OmVariant variant);

struct CostBreakdown {
  double fuel = 0.0;
  double grid = 0.0;
  double om_fixed = 0.0;
  double om_cycle = 0.0;
  double om_hourly = 0.0;
  double total = 0.0;

  double om() const { return om_fixed + om_cycle + om_hourly; }
};

struct OmStep {
  CostBreakdown cost;  // only the om_* fields and total are populated
  GtState next;

  double om_cost() const { return cost.total; }
};

// One hour of the O&M state machine. Costs are assessed against the state
// at the start of the hour, then the state advances.
OmStep om_step(const GtState& state, bool gt_on, const OmParameters& params,
               OmVariant variant);

// C$ paid for grid energy. Negative prices pass through unchanged.
double grid_cost(double price_cad_per_mwh, double grid_mwh);

double fuel_cost(double fuel_gj, double fuel_price_cad_per_gj = kDefaultFuelPrice);

struct StartupResult {
  double net_energy_mwh = 0.0;
  double fuel_gj = 0.0;
  double duration_min = 0.0;
};

// Minutes from turn-on to load: 20, or 35 when starting below 0 degC.
double startup_duration_min(double temperature_c);

// Net energy and fuel for an hour in which the GT starts from cold.
StartupResult startup_correction(double commanded_power_mw, double commanded_fuel_gj_per_h,
                                 double idle_fuel_gj_per_h, double temperature_c);

}  // namespace gtd
