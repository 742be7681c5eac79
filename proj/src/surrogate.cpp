#include "gtdispatch/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gtdispatch/errors.hpp"

namespace gtd {

void validate(const AmbientConditions& ambient) {
  if (!(ambient.pressure_kpa > 0.0)) {
    throw DomainError("ambient pressure must be positive, got " +
                      std::to_string(ambient.pressure_kpa));
  }
  if (!(ambient.rel_humidity_pct >= 0.0 && ambient.rel_humidity_pct <= 100.0)) {
    throw DomainError("relative humidity must lie in [0, 100], got " +
                      std::to_string(ambient.rel_humidity_pct));
  }
  if (!(ambient.temperature_c >= -60.0 && ambient.temperature_c <= 60.0)) {
    throw DomainError("ambient temperature must lie in [-60, 60] degC, got " +
                      std::to_string(ambient.temperature_c));
  }
}

void validate(const SurrogateParams& params) {
  if (!(params.p_iso_mw > 0.0 && params.p_flat_mw > 0.0 && params.c_temp_per_k >= 0.0)) {
    throw ConfigError("surrogate power parameters must be positive");
  }
  if (!(params.eta_full > 0.0 && params.eta_full < 1.0)) {
    throw ConfigError("surrogate eta_full must lie in (0, 1)");
  }
  // c_idle = 0 is accepted as a degenerate configuration (no idle burn).
  if (!(params.c_idle >= 0.0 && params.c_idle < 1.0)) {
    throw ConfigError("surrogate c_idle must lie in [0, 1)");
  }
}

double max_power(const AmbientConditions& ambient, const SurrogateParams& params) {
  const double pressure_ratio = ambient.pressure_kpa / kIsoPressureKpa;
  const double temp_factor =
      1.0 - params.c_temp_per_k * (ambient.temperature_c - kIsoTemperatureC);
  const double humidity_factor =
      1.0 - params.c_humidity_per_pct * (ambient.rel_humidity_pct - 60.0);
  const double unclamped = params.p_iso_mw * pressure_ratio * temp_factor * humidity_factor;
  return std::clamp(unclamped, 0.0, params.p_flat_mw);
}

double fuel_rate(double load_fraction, const AmbientConditions& ambient,
                 const SurrogateParams& params) {
  if (!(load_fraction >= 0.0 && load_fraction <= 1.0)) {
    throw DomainError("load fraction must lie in [0, 1], got " + std::to_string(load_fraction));
  }
  if (load_fraction == 0.0) return 0.0;
  const double full_load_rate = max_power(ambient, params) * kGjPerMwh / params.eta_full;
  return (params.c_idle + (1.0 - params.c_idle) * load_fraction) * full_load_rate;
}

double mechanical_idle_fuel_rate(const AmbientConditions& ambient,
                                 const SurrogateParams& params) {
  return params.c_idle * max_power(ambient, params) * kGjPerMwh / params.eta_full;
}

GtOperatingPoint operating_point(double load_fraction, const AmbientConditions& ambient,
                                 const SurrogateParams& params) {
  GtOperatingPoint point;
  point.load_fraction = load_fraction;
  point.fuel_energy_rate_gj_per_h = fuel_rate(load_fraction, ambient, params);
  point.net_power_mw = load_fraction * max_power(ambient, params);
  return point;
}

}  // namespace gtd
