// gtdispatch: command-line front end for data generation, training,
// baselines, the oracle and reporting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gtdispatch/agents.hpp"
#include "gtdispatch/config.hpp"
#include "gtdispatch/errors.hpp"
#include "gtdispatch/harness.hpp"
#include "gtdispatch/oracle.hpp"

namespace fs = std::filesystem;
using namespace gtd;

namespace {

constexpr int kExitIncomplete = 2;

struct Common {
  std::string config;
  std::string scenario_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::string out;
  std::string om_variant;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Common& c, bool training) {
  cmd->add_option("--config", c.config, "experiment YAML file")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", c.scenario_dir, "directory with price/weather/demand CSVs")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--om-variant", c.om_variant, "dynamic | hourly_only | no_variable");
  if (training) {
    cmd->add_option("--seed", c.seed, "run a single training seed");
    cmd->add_option("--episodes", c.episodes, "episodes per run");
    cmd->add_option("--workers", c.workers, "parallel runs (0 = all cores)");
  }
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (!c.scenario_dir.empty()) {
    cfg.scenario.kind = ScenarioSource::Kind::kCsv;
    cfg.scenario.dir = c.scenario_dir;
  }
  if (c.seed) cfg.seeds = {*c.seed};
  if (c.episodes) {
    cfg.episodes = *c.episodes;
    for (auto& a : cfg.agents) a.episodes = *c.episodes;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.om_variant.empty()) {
    cfg.env.om_variant = parse_om_variant(c.om_variant);
    cfg.om_variants = {cfg.env.om_variant};
  }
  if (c.workers) cfg.workers = *c.workers;
  validate(cfg);
  return cfg;
}

EnvConfig env_for(const ExperimentConfig& cfg, const ScenarioTable& scenario) {
  EnvConfig env = cfg.env;
  env.episode_hours = scenario.size();
  return env;
}

void print_report(const MetricsReport& report) {
  std::printf("%-15s %-12s %7s %14s %14s %9s %9s %9s %9s\n", "algorithm", "om_variant", "seeds", "acc_reward_M",
              "sample_eff_M", "hours10", "cycles10", "hours_ev", "cycles_ev");
  for (const auto& c : report.cells) {
    std::printf("%-15s %-12s %3zu/%-3zu %14.4f %14.4f %9.1f %9.1f %9.1f %9.1f\n", to_string(c.algorithm).c_str(),
                to_string(c.variant).c_str(), c.seeds_ok, c.seeds_total, c.accumulated_reward_cad / 1e6,
                c.sample_efficiency_cad / 1e6, c.hours_last10, c.cycles_last10, c.hours_eval, c.cycles_eval);
  }
  if (!report.complete()) std::printf("report is INCOMPLETE: some runs failed\n");
}

int cmd_generate(std::uint64_t seed, const std::string& config, const std::string& out) {
  SyntheticScenarioParams params;
  if (!config.empty()) params = load_experiment_config(config).scenario.synthetic;
  const ScenarioTable table = make_synthetic_scenario(seed, params);
  write_scenario_csv(table, out);
  std::printf("wrote %zu hours to %s\n", table.size(), out.c_str());
  return 0;
}

int cmd_train(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  if (cfg.agents.empty()) {
    for (const Algorithm a : {Algorithm::kReinforceDiscrete, Algorithm::kReinforceContinuous, Algorithm::kDqn,
                              Algorithm::kPpo, Algorithm::kCem, Algorithm::kRule}) {
      cfg.agents.push_back(default_agent_config(a));
      cfg.agents.back().episodes = cfg.episodes;
    }
  }
  RunOptions options;
  options.on_run_done = [](const RunRecord& r) {
    std::fprintf(stderr, "%s/%s/seed_%llu %s\n", to_string(r.algorithm).c_str(), to_string(r.variant).c_str(),
                 static_cast<unsigned long long>(r.seed), r.ok ? "done" : "FAILED");
  };
  const MetricsReport report = run_experiment(cfg, options);
  print_report(report);
  return report.complete() ? 0 : kExitIncomplete;
}

int cmd_evaluate(const Common& c, const std::string& policy_path) {
  const ExperimentConfig cfg = resolve(c);
  const auto scenario = load_scenario(cfg.scenario);
  const Policy policy = load_policy(policy_path);
  const EpisodeStats s = evaluate_policy(policy, env_for(cfg, *scenario), scenario);
  std::printf("reward_cad %.2f\ncost_cad %.2f\ngt_hours %d\ngt_cycles %d\n", s.reward_cad, -s.reward_cad,
              s.gt_hours, s.gt_cycles);
  return 0;
}

int cmd_baseline(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const auto scenario = load_scenario(cfg.scenario);
  const RuleSearchResult r =
      search_rules(env_for(cfg, *scenario), scenario, default_price_grid(*scenario), default_demand_grid(*scenario));
  std::printf("best rule: %s\nreward_cad %.2f\ngt_hours %d\ngt_cycles %d\nrules evaluated %zu\n",
              r.best.describe().c_str(), r.score, r.stats.gt_hours, r.stats.gt_cycles, r.evaluated);
  return 0;
}

int cmd_oracle(const Common& c, const std::string& schedule_out) {
  const ExperimentConfig cfg = resolve(c);
  const auto scenario = load_scenario(cfg.scenario);
  const EnvConfig env = env_for(cfg, *scenario);
  const OracleResult r = dp_optimal(*scenario, env.action.discrete_levels, env);
  const ReplayResult replay = replay_schedule(*scenario, r.load_fractions, env);
  std::printf("optimal_cost_cad %.2f\ngt_hours %d\ngt_cycles %d\n", r.cost, replay.hours_on, replay.cycles);

  std::ofstream out(schedule_out);
  if (!out) throw std::runtime_error("cannot write " + schedule_out);
  out << "timestamp,level_index,load_fraction,p_gt_mwh,p_grid_mwh,cost_cad\n";
  for (std::size_t t = 0; t < scenario->size(); ++t) {
    const HourOutcome& h = replay.hours[t];
    out << format_timestamp((*scenario)[t].stamp) << "," << r.level_indices[t] << ","
        << format_double(r.load_fractions[t]) << "," << format_double(h.p_gt_mwh) << ","
        << format_double(h.p_grid_mwh) << "," << format_double(h.cost.total) << "\n";
  }
  std::printf("schedule written to %s\n", schedule_out.c_str());
  return 0;
}

int cmd_compare(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  RunOptions options;
  options.on_run_done = [](const RunRecord& r) {
    std::fprintf(stderr, "%s/%s/seed_%llu %s\n", to_string(r.algorithm).c_str(), to_string(r.variant).c_str(),
                 static_cast<unsigned long long>(r.seed), r.ok ? "done" : "FAILED");
  };
  const OmComparison cmp = compare_om_variants(cfg, options);
  print_report(cmp.report);
  std::printf("\nincrease vs dynamic   hours_eval  cycles_eval  hours_last10  cycles_last10\n");
  for (const auto& i : cmp.increases) {
    std::printf("%-20s %10.1f%% %11.1f%% %12.1f%% %13.1f%%\n", to_string(i.variant).c_str(), 100 * i.hours_eval,
                100 * i.cycles_eval, 100 * i.hours_last10, 100 * i.cycles_last10);
  }
  return cmp.report.complete() ? 0 : kExitIncomplete;
}

int cmd_report(const std::string& dir, const std::string& out) {
  const MetricsReport report = report_from_directory(dir);
  write_metrics_csv(out.empty() ? fs::path(dir) / "metrics.csv" : fs::path(out), report);
  print_report(report);
  return report.complete() ? 0 : kExitIncomplete;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gas-turbine economic dispatch: simulator, agents and oracle"};
  app.require_subcommand(1);

  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_config;
  auto* gen = app.add_subcommand("generate-data", "write a synthetic scenario year as CSV");
  gen->add_option("--seed", gen_seed, "scenario seed");
  gen->add_option("--config", gen_config, "take synthetic parameters from this config")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output directory")->required();

  Common train_opts;
  auto* train = app.add_subcommand("train", "train every configured agent over all seeds");
  add_common(train, train_opts, true);
  train->add_option("--out", train_opts.out, "output directory");

  Common eval_opts;
  std::string policy_path;
  auto* eval = app.add_subcommand("evaluate", "run a saved policy greedily for one episode");
  add_common(eval, eval_opts, false);
  eval->add_option("--policy", policy_path, "policy file")->required()->check(CLI::ExistingFile);

  Common base_opts;
  auto* base = app.add_subcommand("baseline", "search if-then-else rules");
  add_common(base, base_opts, false);

  Common oracle_opts;
  std::string schedule_out = "schedule.csv";
  auto* oracle = app.add_subcommand("oracle", "perfect-foresight optimal dispatch");
  add_common(oracle, oracle_opts, false);
  oracle->add_option("--out", schedule_out, "schedule CSV");

  Common cmp_opts;
  auto* cmp = app.add_subcommand("compare-om", "DQN and PPO under the three O&M variants");
  add_common(cmp, cmp_opts, true);
  cmp->add_option("--out", cmp_opts.out, "output directory");

  std::string report_dir, report_out;
  auto* report = app.add_subcommand("report", "recompute metrics from run directories");
  report->add_option("--dir", report_dir, "experiment output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "metrics CSV (default <dir>/metrics.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(gen_seed, gen_config, gen_out);
    if (*train) return cmd_train(train_opts);
    if (*eval) return cmd_evaluate(eval_opts, policy_path);
    if (*base) return cmd_baseline(base_opts);
    if (*oracle) return cmd_oracle(oracle_opts, schedule_out);
    if (*cmp) return cmd_compare(cmp_opts);
    if (*report) return cmd_report(report_dir, report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
