#include "gtdispatch/cost.hpp"

#include <cmath>

#include "gtdispatch/errors.hpp"

namespace gtd {

int OmParameters::hour_threshold() const {
  return static_cast<int>(std::lround(life_hours / life_cycles));
}

void validate(const OmParameters& params) {
  if (!(params.life_hours > 0.0 && params.life_cycles > 0.0 && params.fixed_annual_cad > 0.0 &&
        params.variable_lifetime_cad > 0.0 && params.hours_per_year > 0.0)) {
    throw ConfigError("O&M parameters must be strictly positive");
  }
  if (params.hour_threshold() < 1) {
    throw ConfigError("round(life_hours / life_cycles) must be at least 1");
  }
}

void validate(const GtState& state, const OmParameters& params) {
  const int threshold = params.hour_threshold();
  bool ok = false;
  switch (state.mode) {
    case GtMode::kOff:
      ok = state.hcount == 0;
      break;
    case GtMode::kRunning:
      ok = state.hcount >= 1 && state.hcount < threshold;
      break;
    case GtMode::kExtended:
      ok = state.hcount >= threshold;
      break;
  }
  if (!ok) {
    throw DomainError("inconsistent GT state: mode " +
                      std::to_string(static_cast<int>(state.mode)) + ", hcount " +
                      std::to_string(state.hcount));
  }
}

OmVariant parse_om_variant(std::string_view name) {
  if (name == "dynamic") return OmVariant::kDynamic;
  if (name == "hourly_only" || name == "hourly") return OmVariant::kHourlyOnly;
  if (name == "no_variable" || name == "none") return OmVariant::kNoVariable;
  throw ConfigError("unknown O&M variant '" + std::string(name) +
                    "' (expected dynamic, hourly_only or no_variable)");
}

std::string to_string(OmVariant variant) {
  switch (variant) {
    case OmVariant::kDynamic:
      return "dynamic";
    case OmVariant::kHourlyOnly:
      return "hourly_only";
    case OmVariant::kNoVariable:
      return "no_variable";
  }
  return "unknown";
}

OmStep om_step(const GtState& state, bool gt_on, const OmParameters& params,
               OmVariant variant) {
  OmStep out;
  CostBreakdown& c = out.cost;
  if (gt_on) {
    switch (variant) {
      case OmVariant::kDynamic:
        if (state.mode == GtMode::kOff) c.om_cycle = params.cycle_cost();
        if (state.mode == GtMode::kExtended) c.om_hourly = params.hourly_cost();
        break;
      case OmVariant::kHourlyOnly:
        c.om_hourly = params.hourly_cost();
        break;
      case OmVariant::kNoVariable:
        break;
    }
  }
  c.om_fixed = params.fixed_hourly();
  c.total = c.om_fixed + c.om_cycle + c.om_hourly;

  if (!gt_on) {
    out.next = GtState{};
  } else {
    out.next.hcount = state.hcount + 1;
    out.next.mode =
        out.next.hcount >= params.hour_threshold() ? GtMode::kExtended : GtMode::kRunning;
  }
  return out;
}

double grid_cost(double price_cad_per_mwh, double grid_mwh) {
  if (!(grid_mwh >= 0.0)) {
    throw DomainError("grid purchase must be non-negative, got " + std::to_string(grid_mwh));
  }
  return price_cad_per_mwh * grid_mwh;
}

double fuel_cost(double fuel_gj, double fuel_price_cad_per_gj) {
  if (!(fuel_gj >= 0.0)) {
    throw DomainError("fuel quantity must be non-negative, got " + std::to_string(fuel_gj));
  }
  return fuel_price_cad_per_gj * fuel_gj;
}

double startup_duration_min(double temperature_c) {
  return temperature_c < 0.0 ? 35.0 : 20.0;
}

StartupResult startup_correction(double commanded_power_mw, double commanded_fuel_gj_per_h,
                                 double idle_fuel_gj_per_h, double temperature_c) {
  StartupResult r;
  r.duration_min = startup_duration_min(temperature_c);
  const double start_share = r.duration_min / 60.0;
  const double run_share = 1.0 - start_share;
  r.net_energy_mwh = commanded_power_mw * run_share;
  r.fuel_gj = idle_fuel_gj_per_h * start_share + commanded_fuel_gj_per_h * run_share;
  return r;
}

}  // namespace gtd
