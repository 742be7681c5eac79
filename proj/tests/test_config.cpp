#include <gtest/gtest.h>

#include "gtdispatch/config.hpp"
#include "gtdispatch/errors.hpp"

using namespace gtd;

TEST(Config, EmptyTextGivesDefaults) {
  const ExperimentConfig c = parse_experiment_config("");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(c.episodes, 250);
  EXPECT_EQ(c.env.om_variant, OmVariant::kDynamic);
  EXPECT_TRUE(c.agents.empty());
}

TEST(Config, NestedSectionsOverride) {
  const ExperimentConfig c = parse_experiment_config(R"(
scenario:
  seed: 9
  hours: 336
  prices:
    median_cad_per_mwh: 42
env:
  om_variant: hourly_only
  fuel_price: 4.2
surrogate:
  c_idle: 0.25
om:
  life_cycles: 20000
experiment:
  seeds: [3, 4]
  episodes: 20
  om_variants: [dynamic, no_variable]
agents:
  - algorithm: dqn
    hidden: [32, 32]
    epsilon_fixed_episodes: 10
  - algorithm: ppo
    episodes: 30
    activation: relu
)");
  EXPECT_EQ(c.scenario.seed, 9u);
  EXPECT_EQ(c.scenario.hours, 336u);
  EXPECT_EQ(c.scenario.synthetic.prices.median_cad_per_mwh, 42.0);
  EXPECT_EQ(c.env.om_variant, OmVariant::kHourlyOnly);
  EXPECT_EQ(c.env.fuel_price_cad_per_gj, 4.2);
  EXPECT_EQ(c.env.surrogate.c_idle, 0.25);
  EXPECT_EQ(c.env.om.life_cycles, 20000.0);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  ASSERT_EQ(c.agents.size(), 2u);
  EXPECT_EQ(c.agents[0].episodes, 20);  // inherits experiment.episodes
  EXPECT_EQ(c.agents[0].hidden_layers, (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(c.agents[1].episodes, 30);
  EXPECT_EQ(c.agents[1].activation, nn::Activation::kRelu);
  EXPECT_EQ(c.om_variants, (std::vector<OmVariant>{OmVariant::kDynamic, OmVariant::kNoVariable}));
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(parse_experiment_config("experiment:\n  sedes: [1]\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("agents:\n  - algorithm: dqn\n    gama: 0.9\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("agents:\n  - hidden: [3]\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("experiment:\n  seeds: []\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("env:\n  om_variant: sometimes\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("experiment:\n  episodes: many\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("scenario: [1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("a: [\n"), ConfigError);
}

TEST(Config, YamlRoundTrip) {
  ExperimentConfig c = parse_experiment_config(R"(
scenario: {seed: 5, first_hour: 24, hours: 48}
experiment: {seeds: [7], episodes: 12, om_variants: [no_variable]}
agents:
  - {algorithm: cem, population: 6, elite_fraction: 0.5}
  - {algorithm: rule, price_grid: [10, 95.5], demand_grid: [3]}
)");
  const std::string text = to_yaml(c);
  const ExperimentConfig d = parse_experiment_config(text);
  EXPECT_EQ(to_yaml(d), text);
  EXPECT_EQ(d.agents[0].population, 6u);
  EXPECT_EQ(d.agents[1].price_grid, (std::vector<double>{10, 95.5}));
  EXPECT_EQ(d.scenario.first_hour, 24u);
}

TEST(Config, ScenarioSlice) {
  ScenarioSource s;
  s.seed = 2;
  s.first_hour = 100;
  s.hours = 24;
  const auto t = load_scenario(s);
  ASSERT_EQ(t->size(), 24u);
  EXPECT_EQ((*t)[0].stamp, make_synthetic_scenario(2)[100].stamp);
}

// The shipped configs must load and restate the built-in defaults.
TEST(Config, ShippedConfigsLoad) {
  const ExperimentConfig d = load_experiment_config(GTDISPATCH_CONFIG_DIR "/default.yaml");
  EXPECT_EQ(d.agents.size(), 6u);
  const ExperimentConfig defaults;
  EXPECT_EQ(d.scenario.synthetic.prices.median_cad_per_mwh, defaults.scenario.synthetic.prices.median_cad_per_mwh);
  EXPECT_EQ(d.env.surrogate.p_iso_mw, defaults.env.surrogate.p_iso_mw);
  for (const auto& a : d.agents) {
    const AgentConfig ref = default_agent_config(a.algorithm);
    EXPECT_EQ(a.gamma, ref.gamma) << to_string(a.algorithm);
    EXPECT_EQ(a.optimizer.learning_rate, ref.optimizer.learning_rate) << to_string(a.algorithm);
    EXPECT_EQ(a.epochs, ref.epochs) << to_string(a.algorithm);
  }
  const ExperimentConfig om = load_experiment_config(GTDISPATCH_CONFIG_DIR "/compare_om.yaml");
  EXPECT_EQ(om.episodes, 50);
  EXPECT_EQ(om.agents.size(), 2u);
}
