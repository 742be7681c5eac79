#pragma once

// Gas-turbine performance surrogate.
//
// Stands in for a vendor thermodynamic deck. Baseload power derates linearly
// with ambient temperature and scales with ambient pressure, capped by a
// flat rating. Fuel flow follows a Willans line: an idle intercept plus a
// term proportional to load, which makes part-load efficiency strictly lower
// than full-load efficiency.

namespace gtd {

inline constexpr double kIsoTemperatureC = 15.0;
inline constexpr double kIsoPressureKpa = 101.325;
inline constexpr double kGjPerMwh = 3.6;

struct AmbientConditions {
  double temperature_c = kIsoTemperatureC;
  double pressure_kpa = kIsoPressureKpa;
  double rel_humidity_pct = 60.0;
};

// Throws DomainError if any field is outside its physical range.
void validate(const AmbientConditions& ambient);

struct SurrogateParams {
  double p_iso_mw = 32.0;   // baseload at 15 degC and 101.325 kPa
  double p_flat_mw = 30.3;  // generator / mechanical ceiling
  double c_temp_per_k = 0.007;
  double eta_full = 0.40;
  double c_idle = 0.2;
  // Fractional derate per percentage point of humidity above 60 %. Zero by
  // default; the default model ignores humidity.
  double c_humidity_per_pct = 0.0;
};

void validate(const SurrogateParams& params);

struct GtOperatingPoint {
  double load_fraction = 0.0;
  double net_power_mw = 0.0;
  double fuel_energy_rate_gj_per_h = 0.0;
};

// Maximum deliverable power under the given ambient, in MW.
double max_power(const AmbientConditions& ambient, const SurrogateParams& params);

// Fuel energy flow at the given load fraction, in GJ/h. Zero when off.
double fuel_rate(double load_fraction, const AmbientConditions& ambient,
                 const SurrogateParams& params);

// Fuel energy flow at mechanical idle (the Willans-line intercept), in GJ/h.
double mechanical_idle_fuel_rate(const AmbientConditions& ambient,
                                 const SurrogateParams& params);

GtOperatingPoint operating_point(double load_fraction, const AmbientConditions& ambient,
                                 const SurrogateParams& params);

}  // namespace gtd
