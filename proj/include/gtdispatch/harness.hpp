#pragma once

// Multi-seed experiment runner, metrics and on-disk artifacts.
//
// Layout under the output directory:
//   <alg>/<variant>/seed_<s>/{config.yaml,seed.txt,episodes.csv,evaluation.csv,policy.txt|error.txt}
//   <alg>/<variant>/curve.csv
//   metrics.csv

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gtdispatch/agents.hpp"
#include "gtdispatch/config.hpp"

namespace gtd {

constexpr int kFinalWindow = 10;
constexpr int kInitialWindow = 20;

// Mean over runs of the mean over the last kFinalWindow episodes.
double accumulated_reward(const std::vector<TrainingCurve>& runs);
// Mean over runs of the mean over the first kInitialWindow episodes; NaN when
// any run is shorter than that.
double sample_efficiency(const std::vector<TrainingCurve>& runs);

struct CurveStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std across runs
};
// Truncated to the shortest run.
CurveStats curve_stats(const std::vector<TrainingCurve>& runs);

// Mean of a per-episode field over the last `window` episodes of one run.
double tail_mean(const TrainingCurve& run, int window, double EpisodeStats::*field);
double tail_mean(const TrainingCurve& run, int window, int EpisodeStats::*field);

struct CellMetrics {
  Algorithm algorithm = Algorithm::kDqn;
  OmVariant variant = OmVariant::kDynamic;
  std::size_t seeds_total = 0;
  std::size_t seeds_ok = 0;
  double accumulated_reward_cad = 0.0;
  double sample_efficiency_cad = 0.0;
  // Last-10 training means, averaged over seeds.
  double hours_last10 = 0.0;
  double cycles_last10 = 0.0;
  // Final training episode, averaged over seeds.
  double reward_final_cad = 0.0;
  double hours_final = 0.0;
  double cycles_final = 0.0;
  // Deterministic evaluation of the final policy, averaged over seeds.
  double reward_eval_cad = 0.0;
  double hours_eval = 0.0;
  double cycles_eval = 0.0;
  CurveStats curve;

  bool complete() const { return seeds_ok == seeds_total; }
};

struct MetricsReport {
  std::vector<CellMetrics> cells;
  bool complete() const;
  const CellMetrics* find(Algorithm algorithm, OmVariant variant) const;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::kDqn;
  OmVariant variant = OmVariant::kDynamic;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  TrainingCurve curve;
  EpisodeStats evaluation;
};

// Aggregates runs of one (algorithm, variant) cell; failed runs count toward
// seeds_total only. Runs are combined in ascending seed order.
CellMetrics aggregate_cell(Algorithm algorithm, OmVariant variant, std::vector<RunRecord> runs);

using Trainer = std::function<TrainResult(const EnvConfig&, std::shared_ptr<const ScenarioTable>,
                                          const AgentConfig&, std::uint64_t)>;

struct RunOptions {
  Trainer trainer = train_agent;
  // Called from worker threads after each run; must be thread-safe.
  std::function<void(const RunRecord&)> on_run_done;
};

// Trains every (agent, variant, seed) on a worker pool and writes artifacts.
MetricsReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Rebuilds the report purely from the run directories.
MetricsReport report_from_directory(const std::filesystem::path& dir);

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_curve_csv(const std::filesystem::path& path, const CurveStats& curve);

void write_episodes_csv(const std::filesystem::path& path, const TrainingCurve& curve);
TrainingCurve read_episodes_csv(const std::filesystem::path& path);

struct VariantIncrease {
  OmVariant variant = OmVariant::kHourlyOnly;
  // Relative to DYNAMIC, as ratio of sums over algorithms. Fractions, not %.
  double hours_eval = 0.0;
  double cycles_eval = 0.0;
  double hours_last10 = 0.0;
  double cycles_last10 = 0.0;
};

struct OmComparison {
  MetricsReport report;
  std::vector<VariantIncrease> increases;  // HOURLY_ONLY, NO_VARIABLE
};

// Relative increases of the non-dynamic variants; algorithms missing any
// variant are skipped.
std::vector<VariantIncrease> variant_increases(const MetricsReport& report);

// Runs DQN and PPO (from config.agents if present, else defaults) under all
// three variants and writes om_comparison.csv and om_increases.csv.
OmComparison compare_om_variants(ExperimentConfig config, const RunOptions& options = {});
void write_om_comparison_csv(const std::filesystem::path& dir, const OmComparison& comparison);

// Shortest round-trip text for a double.
std::string format_double(double value);

}  // namespace gtd
