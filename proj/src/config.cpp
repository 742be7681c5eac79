#include "gtdispatch/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gtdispatch/errors.hpp"

namespace gtd {

std::shared_ptr<const ScenarioTable> load_scenario(const ScenarioSource& source) {
  ScenarioTable table = source.kind == ScenarioSource::Kind::kCsv
                            ? load_scenario_dir(source.dir)
                            : make_synthetic_scenario(source.seed, source.synthetic);
  if (source.hours > 0 || source.first_hour > 0) {
    const std::size_t hours = source.hours > 0 ? source.hours : table.size() - source.first_hour;
    table = table.slice(source.first_hour, hours);
  }
  return std::make_shared<const ScenarioTable>(std::move(table));
}

namespace {

// Reads keys from a mapping and rejects any key nobody asked for.
class Section {
 public:
  Section(const YAML::Node& node, std::string name) : name_(std::move(name)) {
    if (node.IsDefined() && !node.IsNull()) node_ = node;
    if (node_ && !node_.IsMap()) throw ConfigError("config section '" + name_ + "' must be a mapping");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_[key]) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError("config " + name_ + "." + key + ": " + e.what());
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined), name_ + "." + key);
  }

  YAML::Node raw(const char* key) {
    seen_.insert(key);
    return node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
    }
  }

 private:
  YAML::Node node_{YAML::NodeType::Undefined};
  std::string name_;
  std::set<std::string> seen_;
};

void read_weather(Section s, WeatherParams& p) {
  s.get("mean_temp_c", p.mean_temp_c);
  s.get("annual_amplitude_c", p.annual_amplitude_c);
  s.get("coldest_day", p.coldest_day);
  s.get("diurnal_amplitude_c", p.diurnal_amplitude_c);
  s.get("coldest_hour", p.coldest_hour);
  s.get("ar_coefficient", p.ar_coefficient);
  s.get("ar_stddev_c", p.ar_stddev_c);
  s.get("pressure_mean_kpa", p.pressure_mean_kpa);
  s.get("pressure_stddev_kpa", p.pressure_stddev_kpa);
  s.get("humidity_mean_pct", p.humidity_mean_pct);
  s.get("humidity_stddev_pct", p.humidity_stddev_pct);
  s.finish();
}

void read_prices(Section s, PriceParams& p) {
  s.get("median_cad_per_mwh", p.median_cad_per_mwh);
  s.get("log_stddev", p.log_stddev);
  s.get("ar_coefficient", p.ar_coefficient);
  s.get("diurnal_log_amplitude", p.diurnal_log_amplitude);
  s.get("peak_hour", p.peak_hour);
  s.get("spike_probability", p.spike_probability);
  s.get("spike_multiplier_min", p.spike_multiplier_min);
  s.get("spike_multiplier_max", p.spike_multiplier_max);
  s.get("price_cap", p.price_cap);
  s.finish();
}

void read_demand(Section s, DemandParams& p) {
  s.get("day_shift_level_mw", p.day_shift_level_mw);
  s.get("night_level_mw", p.night_level_mw);
  s.get("weekend_level_mw", p.weekend_level_mw);
  s.get("shift_start_hour", p.shift_start_hour);
  s.get("shift_end_hour", p.shift_end_hour);
  s.get("noise_fraction", p.noise_fraction);
  s.get("weekly_noise_fraction", p.weekly_noise_fraction);
  s.get("hot_cold_boost_mw", p.hot_cold_boost_mw);
  s.get("holidays", p.holiday_calendar);
  s.get("seed", p.seed);
  s.finish();
}

AgentConfig read_agent(const YAML::Node& node, int default_episodes) {
  if (!node.IsMap() || !node["algorithm"]) throw ConfigError("each agent needs an 'algorithm' key");
  AgentConfig c = default_agent_config(parse_algorithm(node["algorithm"].as<std::string>()));
  c.episodes = default_episodes;
  Section s(node, "agents." + to_string(c.algorithm));
  std::string unused;
  s.get("algorithm", unused);
  s.get("episodes", c.episodes);
  s.get("gamma", c.gamma);
  s.get("hidden", c.hidden_layers);
  std::string activation = nn::to_string(c.activation);
  s.get("activation", activation);
  c.activation = nn::parse_activation(activation);
  s.get("learning_rate", c.optimizer.learning_rate);
  s.get("value_learning_rate", c.value_optimizer.learning_rate);
  s.get("max_grad_norm", c.optimizer.max_grad_norm);
  c.value_optimizer.max_grad_norm = c.optimizer.max_grad_norm;
  s.get("initial_log_std", c.initial_log_std);
  s.get("initial_action_mean", c.initial_action_mean);
  s.get("normalize_returns", c.normalize_returns);
  s.get("replay_capacity", c.replay_capacity);
  s.get("batch_size", c.batch_size);
  s.get("learning_starts", c.learning_starts);
  s.get("target_sync_steps", c.target_sync_steps);
  s.get("train_frequency", c.train_frequency);
  s.get("epsilon_start", c.epsilon_start);
  s.get("epsilon_end", c.epsilon_end);
  s.get("epsilon_fixed_episodes", c.epsilon_fixed_episodes);
  s.get("double_dqn", c.double_dqn);
  s.get("huber_delta", c.huber_delta);
  s.get("clip_ratio", c.clip_ratio);
  s.get("gae_lambda", c.gae_lambda);
  s.get("epochs", c.epochs);
  s.get("minibatch_size", c.minibatch_size);
  s.get("value_coef", c.value_coef);
  s.get("entropy_coef", c.entropy_coef);
  s.get("rollout_steps", c.rollout_steps);
  s.get("normalize_advantages", c.normalize_advantages);
  s.get("population", c.population);
  s.get("elite_fraction", c.elite_fraction);
  s.get("init_stddev", c.init_stddev);
  s.get("stddev_floor", c.stddev_floor);
  s.get("cem_hidden", c.cem_hidden_layers);
  s.get("price_grid", c.price_grid);
  s.get("demand_grid", c.demand_grid);
  s.finish();
  validate(c);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  Section top(root, "config");
  ExperimentConfig cfg;

  {
    Section s = top.child("scenario");
    std::string source = "synthetic";
    s.get("source", source);
    if (source == "synthetic") {
      cfg.scenario.kind = ScenarioSource::Kind::kSynthetic;
    } else if (source == "csv") {
      cfg.scenario.kind = ScenarioSource::Kind::kCsv;
    } else {
      throw ConfigError("scenario.source must be 'synthetic' or 'csv'");
    }
    s.get("seed", cfg.scenario.seed);
    std::string dir;
    s.get("dir", dir);
    cfg.scenario.dir = dir;
    s.get("first_hour", cfg.scenario.first_hour);
    s.get("hours", cfg.scenario.hours);
    std::string start = format_timestamp(cfg.scenario.synthetic.start);
    s.get("start", start);
    try {
      cfg.scenario.synthetic.start = parse_timestamp(start);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scenario.start: ") + e.what());
    }
    s.get("synthetic_hours", cfg.scenario.synthetic.hours);
    read_weather(s.child("weather"), cfg.scenario.synthetic.weather);
    read_prices(s.child("prices"), cfg.scenario.synthetic.prices);
    read_demand(s.child("demand"), cfg.scenario.synthetic.demand);
    s.finish();
  }
  {
    Section s = top.child("env");
    std::string variant = to_string(cfg.env.om_variant);
    s.get("om_variant", variant);
    cfg.env.om_variant = parse_om_variant(variant);
    s.get("fuel_price", cfg.env.fuel_price_cad_per_gj);
    s.get("reward_scale", cfg.env.reward_scale);
    s.get("off_threshold", cfg.env.action.off_threshold);
    s.get("min_load", cfg.env.action.min_load);
    s.get("levels", cfg.env.action.discrete_levels);
    s.finish();
  }
  {
    Section s = top.child("surrogate");
    auto& p = cfg.env.surrogate;
    s.get("p_iso", p.p_iso_mw);
    s.get("p_flat", p.p_flat_mw);
    s.get("c_temp", p.c_temp_per_k);
    s.get("eta_full", p.eta_full);
    s.get("c_idle", p.c_idle);
    s.get("c_humidity", p.c_humidity_per_pct);
    s.finish();
  }
  {
    Section s = top.child("om");
    auto& p = cfg.env.om;
    s.get("life_hours", p.life_hours);
    s.get("life_cycles", p.life_cycles);
    s.get("fixed_annual", p.fixed_annual_cad);
    s.get("variable_lifetime", p.variable_lifetime_cad);
    s.get("hours_per_year", p.hours_per_year);
    s.finish();
  }
  {
    Section s = top.child("experiment");
    s.get("seeds", cfg.seeds);
    s.get("episodes", cfg.episodes);
    std::vector<std::string> variants;
    s.get("om_variants", variants);
    if (!variants.empty()) {
      cfg.om_variants.clear();
      for (const auto& v : variants) cfg.om_variants.push_back(parse_om_variant(v));
    }
    std::string out = cfg.output_dir.string();
    s.get("output_dir", out);
    cfg.output_dir = out;
    s.get("workers", cfg.workers);
    s.finish();
  }
  {
    const YAML::Node agents = top.raw("agents");
    if (agents) {
      if (!agents.IsSequence()) throw ConfigError("'agents' must be a list");
      for (const auto& a : agents) cfg.agents.push_back(read_agent(a, cfg.episodes));
    }
  }
  top.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

void validate(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw ConfigError("at least one seed is required");
  if (config.episodes < 1) throw ConfigError("experiment.episodes must be positive");
  if (config.om_variants.empty()) throw ConfigError("at least one O&M variant is required");
  validate(config.env);
  for (const auto& a : config.agents) validate(a);
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value
      << (c.scenario.kind == ScenarioSource::Kind::kCsv ? "csv" : "synthetic");
  out << YAML::Key << "seed" << YAML::Value << c.scenario.seed;
  if (!c.scenario.dir.empty()) out << YAML::Key << "dir" << YAML::Value << c.scenario.dir.string();
  out << YAML::Key << "first_hour" << YAML::Value << c.scenario.first_hour;
  out << YAML::Key << "hours" << YAML::Value << c.scenario.hours;
  out << YAML::Key << "start" << YAML::Value << format_timestamp(c.scenario.synthetic.start);
  out << YAML::Key << "synthetic_hours" << YAML::Value << c.scenario.synthetic.hours;
  const auto& w = c.scenario.synthetic.weather;
  out << YAML::Key << "weather" << YAML::Value << YAML::BeginMap
      << YAML::Key << "mean_temp_c" << YAML::Value << w.mean_temp_c
      << YAML::Key << "annual_amplitude_c" << YAML::Value << w.annual_amplitude_c
      << YAML::Key << "coldest_day" << YAML::Value << w.coldest_day
      << YAML::Key << "diurnal_amplitude_c" << YAML::Value << w.diurnal_amplitude_c
      << YAML::Key << "coldest_hour" << YAML::Value << w.coldest_hour
      << YAML::Key << "ar_coefficient" << YAML::Value << w.ar_coefficient
      << YAML::Key << "ar_stddev_c" << YAML::Value << w.ar_stddev_c
      << YAML::Key << "pressure_mean_kpa" << YAML::Value << w.pressure_mean_kpa
      << YAML::Key << "pressure_stddev_kpa" << YAML::Value << w.pressure_stddev_kpa
      << YAML::Key << "humidity_mean_pct" << YAML::Value << w.humidity_mean_pct
      << YAML::Key << "humidity_stddev_pct" << YAML::Value << w.humidity_stddev_pct << YAML::EndMap;
  const auto& p = c.scenario.synthetic.prices;
  out << YAML::Key << "prices" << YAML::Value << YAML::BeginMap
      << YAML::Key << "median_cad_per_mwh" << YAML::Value << p.median_cad_per_mwh
      << YAML::Key << "log_stddev" << YAML::Value << p.log_stddev
      << YAML::Key << "ar_coefficient" << YAML::Value << p.ar_coefficient
      << YAML::Key << "diurnal_log_amplitude" << YAML::Value << p.diurnal_log_amplitude
      << YAML::Key << "peak_hour" << YAML::Value << p.peak_hour
      << YAML::Key << "spike_probability" << YAML::Value << p.spike_probability
      << YAML::Key << "spike_multiplier_min" << YAML::Value << p.spike_multiplier_min
      << YAML::Key << "spike_multiplier_max" << YAML::Value << p.spike_multiplier_max
      << YAML::Key << "price_cap" << YAML::Value << p.price_cap << YAML::EndMap;
  const auto& d = c.scenario.synthetic.demand;
  out << YAML::Key << "demand" << YAML::Value << YAML::BeginMap
      << YAML::Key << "day_shift_level_mw" << YAML::Value << d.day_shift_level_mw
      << YAML::Key << "night_level_mw" << YAML::Value << d.night_level_mw
      << YAML::Key << "weekend_level_mw" << YAML::Value << d.weekend_level_mw
      << YAML::Key << "shift_start_hour" << YAML::Value << d.shift_start_hour
      << YAML::Key << "shift_end_hour" << YAML::Value << d.shift_end_hour
      << YAML::Key << "noise_fraction" << YAML::Value << d.noise_fraction
      << YAML::Key << "weekly_noise_fraction" << YAML::Value << d.weekly_noise_fraction
      << YAML::Key << "hot_cold_boost_mw" << YAML::Value << d.hot_cold_boost_mw
      << YAML::Key << "holidays" << YAML::Value << YAML::Flow << d.holiday_calendar
      << YAML::Key << "seed" << YAML::Value << d.seed << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "env" << YAML::Value << YAML::BeginMap
      << YAML::Key << "om_variant" << YAML::Value << to_string(c.env.om_variant)
      << YAML::Key << "fuel_price" << YAML::Value << c.env.fuel_price_cad_per_gj
      << YAML::Key << "reward_scale" << YAML::Value << c.env.reward_scale
      << YAML::Key << "off_threshold" << YAML::Value << c.env.action.off_threshold
      << YAML::Key << "min_load" << YAML::Value << c.env.action.min_load
      << YAML::Key << "levels" << YAML::Value << YAML::Flow << c.env.action.discrete_levels
      << YAML::EndMap;

  const auto& s = c.env.surrogate;
  out << YAML::Key << "surrogate" << YAML::Value << YAML::BeginMap
      << YAML::Key << "p_iso" << YAML::Value << s.p_iso_mw
      << YAML::Key << "p_flat" << YAML::Value << s.p_flat_mw
      << YAML::Key << "c_temp" << YAML::Value << s.c_temp_per_k
      << YAML::Key << "eta_full" << YAML::Value << s.eta_full
      << YAML::Key << "c_idle" << YAML::Value << s.c_idle
      << YAML::Key << "c_humidity" << YAML::Value << s.c_humidity_per_pct << YAML::EndMap;

  const auto& om = c.env.om;
  out << YAML::Key << "om" << YAML::Value << YAML::BeginMap
      << YAML::Key << "life_hours" << YAML::Value << om.life_hours
      << YAML::Key << "life_cycles" << YAML::Value << om.life_cycles
      << YAML::Key << "fixed_annual" << YAML::Value << om.fixed_annual_cad
      << YAML::Key << "variable_lifetime" << YAML::Value << om.variable_lifetime_cad
      << YAML::Key << "hours_per_year" << YAML::Value << om.hours_per_year << YAML::EndMap;

  std::vector<std::string> variants;
  for (const auto v : c.om_variants) variants.push_back(to_string(v));
  out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap
      << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds
      << YAML::Key << "episodes" << YAML::Value << c.episodes
      << YAML::Key << "om_variants" << YAML::Value << YAML::Flow << variants
      << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string()
      << YAML::Key << "workers" << YAML::Value << c.workers << YAML::EndMap;

  out << YAML::Key << "agents" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : c.agents) {
    out << YAML::BeginMap
        << YAML::Key << "algorithm" << YAML::Value << to_string(a.algorithm)
        << YAML::Key << "episodes" << YAML::Value << a.episodes
        << YAML::Key << "gamma" << YAML::Value << a.gamma
        << YAML::Key << "hidden" << YAML::Value << YAML::Flow << a.hidden_layers
        << YAML::Key << "activation" << YAML::Value << nn::to_string(a.activation)
        << YAML::Key << "learning_rate" << YAML::Value << a.optimizer.learning_rate
        << YAML::Key << "value_learning_rate" << YAML::Value << a.value_optimizer.learning_rate
        << YAML::Key << "max_grad_norm" << YAML::Value << a.optimizer.max_grad_norm
        << YAML::Key << "initial_log_std" << YAML::Value << a.initial_log_std
        << YAML::Key << "initial_action_mean" << YAML::Value << a.initial_action_mean
        << YAML::Key << "normalize_returns" << YAML::Value << a.normalize_returns
        << YAML::Key << "replay_capacity" << YAML::Value << a.replay_capacity
        << YAML::Key << "batch_size" << YAML::Value << a.batch_size
        << YAML::Key << "learning_starts" << YAML::Value << a.learning_starts
        << YAML::Key << "target_sync_steps" << YAML::Value << a.target_sync_steps
        << YAML::Key << "train_frequency" << YAML::Value << a.train_frequency
        << YAML::Key << "epsilon_start" << YAML::Value << a.epsilon_start
        << YAML::Key << "epsilon_end" << YAML::Value << a.epsilon_end
        << YAML::Key << "epsilon_fixed_episodes" << YAML::Value << a.epsilon_fixed_episodes
        << YAML::Key << "double_dqn" << YAML::Value << a.double_dqn
        << YAML::Key << "huber_delta" << YAML::Value << a.huber_delta
        << YAML::Key << "clip_ratio" << YAML::Value << a.clip_ratio
        << YAML::Key << "gae_lambda" << YAML::Value << a.gae_lambda
        << YAML::Key << "epochs" << YAML::Value << a.epochs
        << YAML::Key << "minibatch_size" << YAML::Value << a.minibatch_size
        << YAML::Key << "value_coef" << YAML::Value << a.value_coef
        << YAML::Key << "entropy_coef" << YAML::Value << a.entropy_coef
        << YAML::Key << "rollout_steps" << YAML::Value << a.rollout_steps
        << YAML::Key << "normalize_advantages" << YAML::Value << a.normalize_advantages
        << YAML::Key << "population" << YAML::Value << a.population
        << YAML::Key << "elite_fraction" << YAML::Value << a.elite_fraction
        << YAML::Key << "init_stddev" << YAML::Value << a.init_stddev
        << YAML::Key << "stddev_floor" << YAML::Value << a.stddev_floor
        << YAML::Key << "cem_hidden" << YAML::Value << YAML::Flow << a.cem_hidden_layers;
    if (!a.price_grid.empty()) out << YAML::Key << "price_grid" << YAML::Value << YAML::Flow << a.price_grid;
    if (!a.demand_grid.empty()) out << YAML::Key << "demand_grid" << YAML::Value << YAML::Flow << a.demand_grid;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace gtd
