#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "gtdispatch/agents.hpp"
#include "gtdispatch/errors.hpp"
#include "gtdispatch/oracle.hpp"
#include "test_util.hpp"

using namespace gtd;

namespace {

// Grid at 5 C$/MWh: running the GT always loses money.
std::shared_ptr<const ScenarioTable> always_lose() { return fixtures::share(fixtures::constant_scenario(3, 5.0, 20.0)); }

EnvConfig env_for(const ScenarioTable& sc) {
  EnvConfig c;
  c.episode_hours = sc.size();
  return c;
}

AgentConfig small(Algorithm a, int episodes) {
  AgentConfig c = default_agent_config(a);
  c.episodes = episodes;
  c.hidden_layers = {16, 16};
  return c;
}

void expect_same_curves(const TrainingCurve& a, const TrainingCurve& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].reward_cad, b[i].reward_cad);
    EXPECT_EQ(a[i].gt_hours, b[i].gt_hours);
    EXPECT_EQ(a[i].gt_cycles, b[i].gt_cycles);
  }
}

}  // namespace

TEST(Epsilon, ShortModeSchedule) {
  EXPECT_EQ(epsilon_for_episode(0, 20, 0.8, 0.001, 10), 0.8);
  EXPECT_NEAR(epsilon_for_episode(5, 20, 0.8, 0.001, 10), 0.8 - 0.799 * 0.5, 1e-15);
  for (int e = 10; e < 20; ++e) EXPECT_EQ(epsilon_for_episode(e, 20, 0.8, 0.001, 10), 0.001);
  for (int e = 1; e < 10; ++e) {
    EXPECT_LT(epsilon_for_episode(e, 20, 0.8, 0.001, 10), epsilon_for_episode(e - 1, 20, 0.8, 0.001, 10));
  }
}

TEST(Epsilon, RecordedPerEpisodeByDqn) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kDqn, 20);
  c.learning_starts = 8;
  const TrainResult r = train_dqn(env_for(*sc), sc, c, 0);
  ASSERT_EQ(r.curve.size(), 20u);
  EXPECT_EQ(r.curve[0].epsilon, 0.8);
  for (int e = 10; e < 20; ++e) EXPECT_EQ(r.curve[static_cast<std::size_t>(e)].epsilon, 0.001);
}

TEST(ClippedSurrogate, ZeroWhereClipIsActive) {
  EXPECT_EQ(clipped_surrogate_coefficient(1.3, 2.0, 0.2), 0.0);
  EXPECT_EQ(clipped_surrogate_coefficient(0.7, -1.0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate_coefficient(1.3, -1.0, 0.2), -1.3);
  EXPECT_DOUBLE_EQ(clipped_surrogate_coefficient(1.1, 2.0, 0.2), 2.2);
}

TEST(DiscountedReturns, Backwards) {
  const auto g = discounted_returns({1.0, 2.0, 3.0}, 0.5);
  EXPECT_DOUBLE_EQ(g[2], 3.0);
  EXPECT_DOUBLE_EQ(g[1], 2.0 + 1.5);
  EXPECT_DOUBLE_EQ(g[0], 1.0 + 0.5 * 3.5);
}

TEST(Reinforce, SingleStepGradientIsScaledLogProbGradient) {
  nn::NetworkSpec s;
  s.hidden_layers = {8};
  s.output_dim = 7;
  s.output_head = nn::OutputHead::kSoftmax;
  std::mt19937_64 rng(3);
  nn::ParameterSet p = nn::init_parameters(s, rng);
  nn::Matrix x = nn::Matrix::Random(6, 1);
  const nn::Vector g1 = reinforce_discrete_gradient(s, p, x, {4}, {1.0});
  const nn::Vector g3 = reinforce_discrete_gradient(s, p, x, {4}, {-3.0});
  EXPECT_LT((g3 + 3.0 * g1).norm(), 1e-12 * g1.norm());
  // -grad log pi(a) via the output-gradient path: d/dtheta of -log p_4
  const nn::Vector probs = nn::forward(s, p, nn::Vector(x.col(0)));
  nn::Vector og = nn::Vector::Zero(7);
  og[4] = -1.0 / probs[4];
  EXPECT_LT((g1 - nn::backward(s, p, nn::Vector(x.col(0)), og)).norm(), 1e-10 * g1.norm());
}

TEST(Reinforce, DiscreteLearnsToStayOffWhenGtAlwaysLoses) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kReinforceDiscrete, 400);
  c.optimizer.learning_rate = 0.01;
  const TrainResult r = train_reinforce(env_for(*sc), sc, c, true, 1);
  const auto scaled = r.policy.scaler.transform(make_observation((*sc)[0], {}));
  const nn::Vector probs = nn::forward(r.policy.network_spec, r.policy.network,
                                       nn::Vector(Eigen::Map<const nn::Vector>(scaled.data(), 6)));
  EXPECT_GT(probs[0], 0.95);
  EXPECT_EQ(dp_optimal(*sc, default_discrete_levels(), env_for(*sc)).level_indices, (std::vector<int>{0, 0, 0}));
}

TEST(Reinforce, ContinuousRunsAndIsDeterministic) {
  std::mt19937_64 rng(4);
  const auto sc = fixtures::share(fixtures::random_scenario(rng, 24));
  const AgentConfig c = small(Algorithm::kReinforceContinuous, 5);
  const TrainResult a = train_reinforce(env_for(*sc), sc, c, false, 9);
  const TrainResult b = train_reinforce(env_for(*sc), sc, c, false, 9);
  expect_same_curves(a.curve, b.curve);
  EXPECT_EQ(a.policy.network.values, b.policy.network.values);
}

TEST(Dqn, GreedyPolicyMatchesOracleOnAlwaysLose) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kDqn, 200);
  c.learning_starts = 30;
  c.target_sync_steps = 30;
  c.batch_size = 16;
  c.optimizer.learning_rate = 1e-3;
  const TrainResult r = train_dqn(env_for(*sc), sc, c, 2);
  const EpisodeStats s = evaluate_policy(r.policy, env_for(*sc), sc);
  EXPECT_EQ(s.gt_hours, 0);
  const double dp = dp_optimal(*sc, default_discrete_levels(), env_for(*sc)).cost;
  EXPECT_NEAR(-s.reward_cad, dp, 1e-9);
}

TEST(Ppo, MeanActionBelowOffThresholdOnAlwaysLose) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kPpo, 300);
  c.optimizer.learning_rate = 3e-3;
  const TrainResult r = train_ppo(env_for(*sc), sc, c, 3);
  for (std::size_t t = 0; t < sc->size(); ++t) {
    EXPECT_LT(r.policy.action(make_observation((*sc)[t], {})), 0.25);
  }
  EXPECT_EQ(evaluate_policy(r.policy, env_for(*sc), sc).gt_hours, 0);
}

TEST(Ppo, CriticLearnsConstantReward) {
  // Free fuel, no demand and fixed-only O&M: every action costs the same.
  const auto sc = fixtures::share(fixtures::constant_scenario(16, 50.0, 0.0));
  EnvConfig env = env_for(*sc);
  env.fuel_price_cad_per_gj = 0.0;
  env.om_variant = OmVariant::kNoVariable;
  AgentConfig c = small(Algorithm::kPpo, 150);
  c.gamma = 0.0;
  c.value_optimizer.learning_rate = 3e-3;
  const TrainResult r = train_ppo(env, sc, c, 4);
  const auto scaled = r.policy.scaler.transform(make_observation((*sc)[0], {}));
  const double v = nn::forward(r.policy.value_spec, r.policy.value,
                               nn::Vector(Eigen::Map<const nn::Vector>(scaled.data(), 6)))[0];
  EXPECT_NEAR(v, -780000.0 / 8760.0 * 1e-3, 2e-3);
}

TEST(Cem, BestEverIsMonotoneAndFloorExplores) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kCem, 60);
  c.init_stddev = 0.0;
  c.stddev_floor = 0.5;
  const TrainResult r = train_cem(env_for(*sc), sc, c, 5);
  ASSERT_EQ(r.generation_best.size(), 3u);
  for (std::size_t g = 1; g < r.generation_best.size(); ++g) {
    EXPECT_GE(r.generation_best[g], r.generation_best[g - 1]);
  }
  bool varied = false;
  for (std::size_t i = 1; i < 20; ++i) varied |= r.curve[i].reward_cad != r.curve[0].reward_cad;
  EXPECT_TRUE(varied);
}

TEST(Cem, FullEliteFractionRuns) {
  const auto sc = always_lose();
  AgentConfig c = small(Algorithm::kCem, 40);
  c.elite_fraction = 1.0;
  EXPECT_EQ(train_cem(env_for(*sc), sc, c, 6).curve.size(), 40u);
}

TEST(Rules, InfiniteThresholdsAreNeverAndAlways) {
  std::mt19937_64 rng(12);
  const auto sc = fixtures::share(fixtures::random_scenario(rng, 24));
  const double inf = std::numeric_limits<double>::infinity();
  const RuleSearchResult never = search_rules(env_for(*sc), sc, {inf}, {inf});
  EXPECT_EQ(never.stats.gt_hours, 0);
  double all_off = 0.0;
  for (const auto& row : sc->rows()) all_off += row.price_cad_per_mwh * row.demand_mw + 780000.0 / 8760.0;
  EXPECT_NEAR(never.score, -all_off, 1e-6);

  const Rule always{RuleKind::kPrice, -inf, inf};
  Policy p;
  p.algorithm = Algorithm::kRule;
  p.rule = always;
  const EpisodeStats s = evaluate_policy(p, env_for(*sc), sc);
  EXPECT_EQ(s.gt_hours, 24);
  EXPECT_EQ(s.gt_cycles, 1);
}

TEST(Rules, SearchNeverLosesToAGridMember) {
  std::mt19937_64 rng(13);
  const auto sc = fixtures::share(fixtures::random_scenario(rng, 48));
  const RuleSearchResult r = search_rules(env_for(*sc), sc, {20, 60, 100}, {5, 15, 25});
  EXPECT_EQ(r.evaluated, 3u + 3u + 9u + 9u);
  Policy p;
  p.algorithm = Algorithm::kRule;
  for (const double th : {20.0, 60.0, 100.0}) {
    p.rule = Rule{RuleKind::kPrice, th, std::numeric_limits<double>::infinity()};
    EXPECT_GE(r.score, evaluate_policy(p, env_for(*sc), sc).reward_cad);
  }
}

TEST(Determinism, SameSeedSameCurves) {
  std::mt19937_64 rng(14);
  const auto sc = fixtures::share(fixtures::random_scenario(rng, 48));
  for (const Algorithm a : {Algorithm::kReinforceDiscrete, Algorithm::kReinforceContinuous, Algorithm::kDqn,
                            Algorithm::kPpo, Algorithm::kCem, Algorithm::kRule}) {
    AgentConfig c = small(a, 6);
    c.learning_starts = 20;
    c.price_grid = {10, 50, 90};
    c.demand_grid = {5, 20};
    const TrainResult x = train_agent(env_for(*sc), sc, c, 21);
    const TrainResult y = train_agent(env_for(*sc), sc, c, 21);
    expect_same_curves(x.curve, y.curve);
  }
}

TEST(Policy, SaveLoadRoundTrip) {
  std::mt19937_64 rng(15);
  const auto sc = fixtures::share(fixtures::random_scenario(rng, 24));
  const auto dir = std::filesystem::temp_directory_path() / "gtdispatch_policy";
  std::filesystem::create_directories(dir);
  for (const Algorithm a : {Algorithm::kDqn, Algorithm::kPpo, Algorithm::kCem, Algorithm::kReinforceDiscrete}) {
    AgentConfig c = small(a, 2);
    c.learning_starts = 10;
    const TrainResult r = train_agent(env_for(*sc), sc, c, 1);
    save_policy(dir / "p.txt", r.policy);
    const Policy back = load_policy(dir / "p.txt");
    EXPECT_EQ(evaluate_policy(back, env_for(*sc), sc).reward_cad,
              evaluate_policy(r.policy, env_for(*sc), sc).reward_cad);
  }
  Policy rule;
  rule.rule = Rule{RuleKind::kAnd, 72.5, 11.0};
  save_policy(dir / "r.txt", rule);
  const Policy back = load_policy(dir / "r.txt");
  EXPECT_EQ(back.rule.kind, RuleKind::kAnd);
  EXPECT_EQ(back.rule.price_threshold, 72.5);
}

TEST(AgentConfig, ValidationAndNames) {
  for (const Algorithm a : {Algorithm::kReinforceDiscrete, Algorithm::kReinforceContinuous, Algorithm::kDqn,
                            Algorithm::kPpo, Algorithm::kCem, Algorithm::kRule}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
    EXPECT_NO_THROW(validate(default_agent_config(a)));
  }
  AgentConfig c;
  c.gamma = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_THROW(parse_algorithm("sac"), ConfigError);
}
