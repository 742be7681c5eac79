#include "gtdispatch/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gtdispatch/errors.hpp"

namespace gtd {

namespace chr = std::chrono;

HourStamp hour_stamp(int year, unsigned month, unsigned day, unsigned hour) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  const auto days = chr::sys_days{ymd}.time_since_epoch().count();
  return static_cast<HourStamp>(days) * 24 + hour;
}

std::int64_t day_index(HourStamp stamp) {
  // floor division so pre-epoch stamps land on the right day
  return stamp >= 0 ? stamp / 24 : -((-stamp + 23) / 24);
}

int hour_of_day(HourStamp stamp) { return static_cast<int>(stamp - day_index(stamp) * 24); }

int weekday(HourStamp stamp) {
  const chr::sys_days days{chr::days{day_index(stamp)}};
  return static_cast<int>(chr::weekday{days}.c_encoding());
}

int day_of_year(HourStamp stamp) {
  const chr::sys_days days{chr::days{day_index(stamp)}};
  const chr::year_month_day ymd{days};
  const chr::sys_days jan1{ymd.year() / chr::January / 1};
  return static_cast<int>((days - jan1).count());
}

std::string format_timestamp(HourStamp stamp) {
  const chr::sys_days days{chr::days{day_index(stamp)}};
  const chr::year_month_day ymd{days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                hour_of_day(stamp));
  return buf;
}

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw std::invalid_argument("timestamp too short");
  int value = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) throw std::invalid_argument("bad timestamp digits");
  return value;
}

}  // namespace

HourStamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM[:SS]
  if (text.size() < 16 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
    throw std::invalid_argument("timestamp '" + std::string(text) + "' is not ISO-8601");
  }
  const int year = parse_fixed_int(text, 0, 4);
  const int month = parse_fixed_int(text, 5, 2);
  const int day = parse_fixed_int(text, 8, 2);
  const int hour = parse_fixed_int(text, 11, 2);
  const int minute = parse_fixed_int(text, 14, 2);
  int second = 0;
  if (text.size() > 16) {
    if (text.size() != 19 || text[16] != ':') {
      throw std::invalid_argument("timestamp '" + std::string(text) + "' is not ISO-8601");
    }
    second = parse_fixed_int(text, 17, 2);
  }
  if (hour > 23 || minute != 0 || second != 0 || month < 1 || day < 1) {
    throw std::invalid_argument("timestamp '" + std::string(text) + "' is not on an exact hour");
  }
  return hour_stamp(year, static_cast<unsigned>(month), static_cast<unsigned>(day),
                    static_cast<unsigned>(hour));
}

ScenarioTable::ScenarioTable(std::vector<ScenarioRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const ScenarioRow& row = rows_[i];
    if (i > 0 && row.stamp != rows_[i - 1].stamp + 1) {
      throw AlignmentError(format_timestamp(rows_[i - 1].stamp + 1),
                           "scenario rows are not contiguous hourly");
    }
    if (!(row.demand_mw >= 0.0) || !std::isfinite(row.demand_mw)) {
      throw ConfigError("negative or non-finite demand at " + format_timestamp(row.stamp));
    }
    if (!std::isfinite(row.price_cad_per_mwh)) {
      throw ConfigError("non-finite price at " + format_timestamp(row.stamp));
    }
    validate(row.ambient);
  }
}

ScenarioTable ScenarioTable::slice(std::size_t first, std::size_t count) const {
  if (first + count > rows_.size()) throw ConfigError("scenario slice out of range");
  return ScenarioTable(std::vector<ScenarioRow>(rows_.begin() + static_cast<std::ptrdiff_t>(first),
                                                rows_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

std::vector<double> ScenarioTable::temperatures() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.ambient.temperature_c);
  return out;
}

std::vector<double> ScenarioTable::prices() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.price_cad_per_mwh);
  return out;
}

std::vector<double> ScenarioTable::demands() const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.demand_mw);
  return out;
}

std::vector<std::string> DemandParams::default_holidays() {
  // Alberta 2018 statutory holidays plus a year-end plant closure.
  return {"2018-01-01", "2018-02-19", "2018-03-30", "2018-05-21", "2018-07-02",
          "2018-08-06", "2018-09-03", "2018-10-08", "2018-11-12", "2018-12-24",
          "2018-12-25", "2018-12-26", "2018-12-27", "2018-12-28", "2018-12-31"};
}

void validate(const DemandParams& params) {
  if (params.day_shift_level_mw < 0.0 || params.night_level_mw < 0.0 ||
      params.weekend_level_mw < 0.0 || params.hot_cold_boost_mw < 0.0) {
    throw ConfigError("demand levels must be non-negative");
  }
  if (!(params.noise_fraction >= 0.0 && params.noise_fraction <= 0.5) ||
      !(params.weekly_noise_fraction >= 0.0 && params.weekly_noise_fraction <= 0.5)) {
    throw ConfigError("demand noise fractions must lie in [0, 0.5]");
  }
  if (params.shift_start_hour < 0 || params.shift_end_hour > 24 ||
      params.shift_start_hour >= params.shift_end_hour) {
    throw ConfigError("day shift must satisfy 0 <= start < end <= 24");
  }
}

std::vector<HourStamp> hourly_stamps(HourStamp start, std::size_t hours) {
  std::vector<HourStamp> out(hours);
  for (std::size_t i = 0; i < hours; ++i) out[i] = start + static_cast<HourStamp>(i);
  return out;
}

std::vector<AmbientConditions> generate_weather(std::uint64_t seed, std::span<const HourStamp> stamps,
                                                const WeatherParams& p) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double innovation_sd = p.ar_stddev_c * std::sqrt(1.0 - p.ar_coefficient * p.ar_coefficient);

  std::vector<AmbientConditions> out;
  out.reserve(stamps.size());
  double anomaly = p.ar_stddev_c * unit(rng);
  for (const HourStamp stamp : stamps) {
    const double day = day_of_year(stamp) + hour_of_day(stamp) / 24.0;
    const double seasonal = -p.annual_amplitude_c * std::cos(two_pi * (day - p.coldest_day) / 365.0);
    const double diurnal =
        -p.diurnal_amplitude_c * std::cos(two_pi * (hour_of_day(stamp) - p.coldest_hour) / 24.0);
    anomaly = p.ar_coefficient * anomaly + innovation_sd * unit(rng);

    AmbientConditions a;
    a.temperature_c = std::clamp(p.mean_temp_c + seasonal + diurnal + anomaly, -60.0, 60.0);
    a.pressure_kpa = std::clamp(p.pressure_mean_kpa + p.pressure_stddev_kpa * unit(rng),
                                p.pressure_min_kpa, p.pressure_max_kpa);
    a.rel_humidity_pct = std::clamp(p.humidity_mean_pct + p.humidity_stddev_pct * unit(rng),
                                    p.humidity_min_pct, p.humidity_max_pct);
    out.push_back(a);
  }
  return out;
}

std::vector<double> generate_prices(std::uint64_t seed, std::span<const HourStamp> stamps,
                                    const PriceParams& p) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> spike(p.spike_multiplier_min, p.spike_multiplier_max);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double innovation_sd = p.log_stddev * std::sqrt(1.0 - p.ar_coefficient * p.ar_coefficient);

  std::vector<double> out;
  out.reserve(stamps.size());
  double log_anomaly = p.log_stddev * unit(rng);
  for (const HourStamp stamp : stamps) {
    log_anomaly = p.ar_coefficient * log_anomaly + innovation_sd * unit(rng);
    const double diurnal =
        p.diurnal_log_amplitude * std::cos(two_pi * (hour_of_day(stamp) - p.peak_hour) / 24.0);
    double price = p.median_cad_per_mwh * std::exp(log_anomaly + diurnal);
    // Draw both variates every hour so the stream layout is independent of outcomes.
    const double u = coin(rng);
    const double multiplier = spike(rng);
    if (u < p.spike_probability) price *= multiplier;
    out.push_back(std::clamp(price, p.price_floor, p.price_cap));
  }
  return out;
}

namespace {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

std::vector<double> generate_demand(const DemandParams& params, std::span<const HourStamp> stamps,
                                    std::span<const double> temperatures) {
  validate(params);
  if (temperatures.size() != stamps.size()) {
    throw ConfigError("temperature series must align with demand stamps");
  }
  std::set<std::int64_t> closed_days;
  for (const auto& date : params.holiday_calendar) {
    try {
      closed_days.insert(day_index(parse_timestamp(date + "T00:00:00")));
    } catch (const std::invalid_argument&) {
      throw ConfigError("invalid holiday date '" + date + "'");
    }
  }
  const std::vector<double> temps(temperatures.begin(), temperatures.end());
  const double hot = percentile(temps, params.hot_percentile);
  const double cold = percentile(temps, params.cold_percentile);

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> hourly(1.0 - params.noise_fraction, 1.0 + params.noise_fraction);
  std::uniform_real_distribution<double> weekly(1.0 - params.weekly_noise_fraction,
                                                1.0 + params.weekly_noise_fraction);

  std::vector<double> out;
  out.reserve(stamps.size());
  std::int64_t current_week = std::numeric_limits<std::int64_t>::min();
  double week_factor = 1.0;
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const HourStamp stamp = stamps[i];
    // Weeks start on Monday.
    const std::int64_t week = (day_index(stamp) + 3) / 7;
    if (week != current_week) {
      current_week = week;
      week_factor = params.weekly_noise_fraction > 0.0 ? weekly(rng) : 1.0;
    }
    const double noise = params.noise_fraction > 0.0 ? hourly(rng) : 1.0;

    const int wd = weekday(stamp);
    const int hod = hour_of_day(stamp);
    double level;
    if (wd == 0 || wd == 6) {
      level = params.weekend_level_mw;
    } else if (hod >= params.shift_start_hour && hod < params.shift_end_hour) {
      level = params.day_shift_level_mw;
    } else {
      level = params.night_level_mw;
    }
    double demand = level * week_factor * noise;
    if (temperatures[i] > hot || temperatures[i] < cold) demand += params.hot_cold_boost_mw;
    if (closed_days.contains(day_index(stamp))) demand = 0.0;
    out.push_back(demand);
  }
  return out;
}

ScenarioTable make_synthetic_scenario(std::uint64_t seed, const SyntheticScenarioParams& params) {
  const auto stamps = hourly_stamps(params.start, params.hours);
  // Independent streams per series.
  std::seed_seq seq{seed, std::uint64_t{0x6774'6469'7370}};
  std::uint64_t sub[3];
  {
    std::uint32_t words[6];
    seq.generate(words, words + 6);
    for (int k = 0; k < 3; ++k) {
      sub[k] = (std::uint64_t{words[2 * k]} << 32) | words[2 * k + 1];
    }
  }
  const auto weather = generate_weather(sub[0], stamps, params.weather);
  const auto prices = generate_prices(sub[1], stamps, params.prices);
  std::vector<double> temps(weather.size());
  std::transform(weather.begin(), weather.end(), temps.begin(),
                 [](const AmbientConditions& a) { return a.temperature_c; });
  DemandParams demand_params = params.demand;
  demand_params.seed = sub[2] ^ params.demand.seed;
  const auto demand = generate_demand(demand_params, stamps, temps);

  std::vector<ScenarioRow> rows(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    rows[i] = ScenarioRow{stamps[i], prices[i], demand[i], weather[i]};
  }
  return ScenarioTable(std::move(rows));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

double parse_number(std::string_view field, const std::string& file, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(file, line, "non-numeric field '" + std::string(field) + "'");
  }
  return value;
}

struct CsvSeries {
  std::vector<HourStamp> stamps;
  std::vector<std::vector<double>> columns;
};

CsvSeries read_series(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  const std::string file = path.filename().string();
  CsvSeries series;
  series.columns.resize(header.size() - 1);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(file, 1, "missing header row");
  ++line_no;
  const auto head = split_fields(line);
  if (head.size() != header.size() ||
      !std::equal(head.begin(), head.end(), header.begin(),
                  [](std::string_view a, const std::string& b) { return a == b; })) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw ParseError(file, 1, "expected header '" + expected + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(file, line_no,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    HourStamp stamp;
    try {
      stamp = parse_timestamp(fields[0]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(file, line_no, e.what());
    }
    if (!series.stamps.empty()) {
      const HourStamp expected = series.stamps.back() + 1;
      if (stamp > expected) {
        throw AlignmentError(format_timestamp(expected), file + ": missing hour");
      }
      if (stamp < expected) {
        throw AlignmentError(format_timestamp(stamp),
                             file + ": duplicate or out-of-order hour (line " +
                                 std::to_string(line_no) + ")");
      }
    }
    series.stamps.push_back(stamp);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      series.columns[c - 1].push_back(parse_number(fields[c], file, line_no));
    }
  }
  return series;
}

void check_aligned(const CsvSeries& reference, const CsvSeries& other, const std::string& name) {
  const std::size_t n = std::min(reference.stamps.size(), other.stamps.size());
  if (n > 0 && reference.stamps[0] != other.stamps[0]) {
    throw AlignmentError(format_timestamp(std::min(reference.stamps[0], other.stamps[0])),
                         name + ": series start differs from price.csv");
  }
  if (reference.stamps.size() != other.stamps.size()) {
    const HourStamp first_missing =
        (n == 0 ? (reference.stamps.empty() ? other.stamps[0] : reference.stamps[0])
                : reference.stamps[0] + static_cast<HourStamp>(n));
    throw AlignmentError(format_timestamp(first_missing),
                         name + ": series length differs from price.csv");
  }
}

void write_number(std::ostream& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.write(buf, ptr - buf);
}

}  // namespace

ScenarioTable load_scenario_csv(const std::filesystem::path& price_path,
                                const std::filesystem::path& weather_path,
                                const std::filesystem::path& demand_path) {
  const auto price = read_series(price_path, {"timestamp", "pool_price_cad_per_mwh"});
  const auto weather =
      read_series(weather_path, {"timestamp", "temp_c", "pressure_kpa", "rel_humidity_pct"});
  const auto demand = read_series(demand_path, {"timestamp", "demand_mw"});
  check_aligned(price, weather, weather_path.filename().string());
  check_aligned(price, demand, demand_path.filename().string());

  std::vector<ScenarioRow> rows(price.stamps.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].stamp = price.stamps[i];
    rows[i].price_cad_per_mwh = price.columns[0][i];
    rows[i].ambient = {weather.columns[0][i], weather.columns[1][i], weather.columns[2][i]};
    rows[i].demand_mw = demand.columns[0][i];
  }
  return ScenarioTable(std::move(rows));
}

ScenarioTable load_scenario_dir(const std::filesystem::path& dir) {
  return load_scenario_csv(dir / kPriceFile, dir / kWeatherFile, dir / kDemandFile);
}

void write_scenario_csv(const ScenarioTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream price(dir / kPriceFile);
  std::ofstream weather(dir / kWeatherFile);
  std::ofstream demand(dir / kDemandFile);
  if (!price || !weather || !demand) throw ConfigError("cannot write scenario to " + dir.string());
  price << "timestamp,pool_price_cad_per_mwh\n";
  weather << "timestamp,temp_c,pressure_kpa,rel_humidity_pct\n";
  demand << "timestamp,demand_mw\n";
  for (const auto& row : table.rows()) {
    const std::string ts = format_timestamp(row.stamp);
    price << ts << ',';
    write_number(price, row.price_cad_per_mwh);
    price << '\n';
    weather << ts << ',';
    write_number(weather, row.ambient.temperature_c);
    weather << ',';
    write_number(weather, row.ambient.pressure_kpa);
    weather << ',';
    write_number(weather, row.ambient.rel_humidity_pct);
    weather << '\n';
    demand << ts << ',';
    write_number(demand, row.demand_mw);
    demand << '\n';
  }
}

}  // namespace gtd
