#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gtdispatch/surrogate.hpp"

namespace gtd {

// Hours since 1970-01-01T00:00 UTC.
using HourStamp = std::int64_t;

HourStamp hour_stamp(int year, unsigned month, unsigned day, unsigned hour = 0);
std::string format_timestamp(HourStamp stamp);
// Accepts "YYYY-MM-DDTHH:MM[:SS]" (or a space separator) on an exact hour.
// Throws std::invalid_argument otherwise.
HourStamp parse_timestamp(std::string_view text);
// 0 = Sunday .. 6 = Saturday.
int weekday(HourStamp stamp);
int hour_of_day(HourStamp stamp);
// 0-based day of the calendar year.
int day_of_year(HourStamp stamp);
// Days since epoch, for calendar-date comparisons.
std::int64_t day_index(HourStamp stamp);

struct ScenarioRow {
  HourStamp stamp = 0;
  double price_cad_per_mwh = 0.0;
  double demand_mw = 0.0;
  AmbientConditions ambient;
};

// Aligned hourly inputs for one episode. Rows are strictly hourly and
// contiguous; demand is non-negative and prices are finite.
class ScenarioTable {
 public:
  ScenarioTable() = default;
  // Throws ConfigError or AlignmentError if the rows violate the invariants.
  explicit ScenarioTable(std::vector<ScenarioRow> rows);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const ScenarioRow& operator[](std::size_t hour) const { return rows_[hour]; }
  std::span<const ScenarioRow> rows() const { return rows_; }

  ScenarioTable slice(std::size_t first, std::size_t count) const;

  std::vector<double> temperatures() const;
  std::vector<double> prices() const;
  std::vector<double> demands() const;

 private:
  std::vector<ScenarioRow> rows_;
};

struct WeatherParams {
  double mean_temp_c = 3.0;
  double annual_amplitude_c = 18.0;
  double coldest_day = 20.0;  // day of year of the annual minimum
  double diurnal_amplitude_c = 6.0;
  double coldest_hour = 4.0;
  double ar_coefficient = 0.98;
  double ar_stddev_c = 6.0;  // stationary std of the AR(1) anomaly
  double pressure_mean_kpa = 93.0;
  double pressure_stddev_kpa = 0.6;
  double pressure_min_kpa = 88.0;
  double pressure_max_kpa = 98.0;
  double humidity_mean_pct = 60.0;
  double humidity_stddev_pct = 15.0;
  double humidity_min_pct = 5.0;
  double humidity_max_pct = 100.0;
};

struct PriceParams {
  double median_cad_per_mwh = 50.0;
  double log_stddev = 0.45;
  double ar_coefficient = 0.9;
  // Log-space diurnal swing; peak in late afternoon.
  double diurnal_log_amplitude = 0.25;
  double peak_hour = 17.0;
  double spike_probability = 0.02;
  double spike_multiplier_min = 3.0;
  double spike_multiplier_max = 15.0;
  double price_floor = 0.0;
  double price_cap = 999.99;
};

struct DemandParams {
  double day_shift_level_mw = 25.0;
  double night_level_mw = 8.0;
  double weekend_level_mw = 6.0;
  int shift_start_hour = 6;  // inclusive
  int shift_end_hour = 16;   // exclusive
  double noise_fraction = 0.1;
  double weekly_noise_fraction = 0.05;
  double hot_cold_boost_mw = 3.0;
  double hot_percentile = 0.9;
  double cold_percentile = 0.1;
  std::vector<std::string> holiday_calendar = default_holidays();
  std::uint64_t seed = 0;

  static std::vector<std::string> default_holidays();
};

void validate(const DemandParams& params);

// Consecutive hourly stamps starting at `start`.
std::vector<HourStamp> hourly_stamps(HourStamp start, std::size_t hours);

std::vector<AmbientConditions> generate_weather(std::uint64_t seed, std::span<const HourStamp> stamps,
                                                const WeatherParams& params = {});
std::vector<double> generate_prices(std::uint64_t seed, std::span<const HourStamp> stamps,
                                    const PriceParams& params = {});
// Demand follows the weekly shift template with noise, temperature boosts and
// closures. `temperatures` must be aligned with `stamps`.
std::vector<double> generate_demand(const DemandParams& params, std::span<const HourStamp> stamps,
                                    std::span<const double> temperatures);

struct SyntheticScenarioParams {
  HourStamp start = hour_stamp(2018, 1, 1);
  std::size_t hours = 8760;
  WeatherParams weather;
  PriceParams prices;
  DemandParams demand;
};

// Weather, prices and demand derived from one seed.
ScenarioTable make_synthetic_scenario(std::uint64_t seed, const SyntheticScenarioParams& params = {});

inline constexpr std::string_view kPriceFile = "price.csv";
inline constexpr std::string_view kWeatherFile = "weather.csv";
inline constexpr std::string_view kDemandFile = "demand.csv";

ScenarioTable load_scenario_csv(const std::filesystem::path& price_path,
                                const std::filesystem::path& weather_path,
                                const std::filesystem::path& demand_path);
// Loads price.csv, weather.csv and demand.csv from a directory.
ScenarioTable load_scenario_dir(const std::filesystem::path& dir);
void write_scenario_csv(const ScenarioTable& table, const std::filesystem::path& dir);

}  // namespace gtd
