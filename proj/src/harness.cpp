#include "gtdispatch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "gtdispatch/errors.hpp"

namespace gtd {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kEpisodesHeader = "episode,reward_cad,gt_hours,gt_cycles,epsilon";

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double head_mean(const TrainingCurve& run, int window) {
  double s = 0.0;
  for (int i = 0; i < window; ++i) s += run[static_cast<std::size_t>(i)].reward_cad;
  return s / window;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& text, const fs::path& file, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(file.string(), line, "bad number '" + text + "'");
  }
  return value;
}

fs::path cell_dir(const fs::path& root, Algorithm a, OmVariant v) {
  return root / to_string(a) / to_string(v);
}

void write_evaluation_csv(const fs::path& path, const EpisodeStats& s) {
  write_text(path, "reward_cad,gt_hours,gt_cycles\n" + format_double(s.reward_cad) + "," +
                       std::to_string(s.gt_hours) + "," + std::to_string(s.gt_cycles) + "\n");
}

EpisodeStats read_evaluation_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw ParseError(path.string(), 2, "missing evaluation row");
  const auto f = split(line, ',');
  if (f.size() != 3) throw ParseError(path.string(), 2, "expected 3 fields");
  EpisodeStats s;
  s.reward_cad = parse_number<double>(f[0], path, 2);
  s.gt_hours = parse_number<int>(f[1], path, 2);
  s.gt_cycles = parse_number<int>(f[2], path, 2);
  return s;
}

struct Job {
  const AgentConfig* agent;
  OmVariant variant;
  std::uint64_t seed;
};

RunRecord execute(const Job& job, const ExperimentConfig& config,
                  const std::shared_ptr<const ScenarioTable>& scenario, const Trainer& trainer) {
  RunRecord rec;
  rec.algorithm = job.agent->algorithm;
  rec.variant = job.variant;
  rec.seed = job.seed;
  const fs::path dir =
      cell_dir(config.output_dir, rec.algorithm, rec.variant) / ("seed_" + std::to_string(job.seed));
  fs::create_directories(dir);
  for (const char* stale : {"episodes.csv", "evaluation.csv", "policy.txt", "error.txt"}) {
    fs::remove(dir / stale);
  }

  ExperimentConfig snapshot = config;
  snapshot.agents = {*job.agent};
  snapshot.seeds = {job.seed};
  snapshot.om_variants = {job.variant};
  snapshot.env.om_variant = job.variant;
  snapshot.workers = 1;
  write_text(dir / "config.yaml", to_yaml(snapshot));
  write_text(dir / "seed.txt", std::to_string(job.seed) + "\n");

  try {
    EnvConfig env = snapshot.env;
    env.episode_hours = scenario->size();
    TrainResult result = trainer(env, scenario, *job.agent, job.seed);
    rec.evaluation = evaluate_policy(result.policy, env, scenario);
    rec.curve = std::move(result.curve);
    save_policy(dir / "policy.txt", result.policy);
    write_evaluation_csv(dir / "evaluation.csv", rec.evaluation);
    write_episodes_csv(dir / "episodes.csv", rec.curve);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    fs::remove(dir / "episodes.csv");
    write_text(dir / "error.txt", rec.error + "\n");
  }
  return rec;
}

MetricsReport aggregate_all(const std::vector<RunRecord>& records) {
  std::map<std::pair<Algorithm, OmVariant>, std::vector<RunRecord>> cells;
  for (const auto& r : records) cells[{r.algorithm, r.variant}].push_back(r);
  MetricsReport report;
  for (auto& [key, runs] : cells) report.cells.push_back(aggregate_cell(key.first, key.second, std::move(runs)));
  return report;
}

void write_cell_curves(const fs::path& root, const MetricsReport& report) {
  for (const auto& c : report.cells) write_curve_csv(cell_dir(root, c.algorithm, c.variant) / "curve.csv", c.curve);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double accumulated_reward(const std::vector<TrainingCurve>& runs) {
  std::vector<double> per_run;
  for (const auto& r : runs) per_run.push_back(tail_mean(r, kFinalWindow, &EpisodeStats::reward_cad));
  return mean_of(per_run);
}

double sample_efficiency(const std::vector<TrainingCurve>& runs) {
  std::vector<double> per_run;
  for (const auto& r : runs) {
    if (r.size() < static_cast<std::size_t>(kInitialWindow)) return kNaN;
    per_run.push_back(head_mean(r, kInitialWindow));
  }
  return mean_of(per_run);
}

double tail_mean(const TrainingCurve& run, int window, double EpisodeStats::*field) {
  if (run.empty()) return kNaN;
  const std::size_t n = std::min(run.size(), static_cast<std::size_t>(window));
  double s = 0.0;
  for (std::size_t i = run.size() - n; i < run.size(); ++i) s += run[i].*field;
  return s / static_cast<double>(n);
}

double tail_mean(const TrainingCurve& run, int window, int EpisodeStats::*field) {
  if (run.empty()) return kNaN;
  const std::size_t n = std::min(run.size(), static_cast<std::size_t>(window));
  double s = 0.0;
  for (std::size_t i = run.size() - n; i < run.size(); ++i) s += run[i].*field;
  return s / static_cast<double>(n);
}

CurveStats curve_stats(const std::vector<TrainingCurve>& runs) {
  CurveStats out;
  if (runs.empty()) return out;
  std::size_t n = runs.front().size();
  for (const auto& r : runs) n = std::min(n, r.size());
  const double k = static_cast<double>(runs.size());
  for (std::size_t e = 0; e < n; ++e) {
    double m = 0.0;
    for (const auto& r : runs) m += r[e].reward_cad;
    m /= k;
    double var = 0.0;
    for (const auto& r : runs) var += (r[e].reward_cad - m) * (r[e].reward_cad - m);
    out.mean.push_back(m);
    out.stddev.push_back(std::sqrt(var / k));
  }
  return out;
}

CellMetrics aggregate_cell(Algorithm algorithm, OmVariant variant, std::vector<RunRecord> runs) {
  std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  CellMetrics m;
  m.algorithm = algorithm;
  m.variant = variant;
  m.seeds_total = runs.size();
  std::vector<TrainingCurve> curves;
  std::vector<double> h10, c10, rf, hf, cf, re, he, ce;
  for (const auto& r : runs) {
    if (!r.ok || r.curve.empty()) continue;
    curves.push_back(r.curve);
    h10.push_back(tail_mean(r.curve, kFinalWindow, &EpisodeStats::gt_hours));
    c10.push_back(tail_mean(r.curve, kFinalWindow, &EpisodeStats::gt_cycles));
    rf.push_back(r.curve.back().reward_cad);
    hf.push_back(r.curve.back().gt_hours);
    cf.push_back(r.curve.back().gt_cycles);
    re.push_back(r.evaluation.reward_cad);
    he.push_back(r.evaluation.gt_hours);
    ce.push_back(r.evaluation.gt_cycles);
  }
  m.seeds_ok = curves.size();
  m.accumulated_reward_cad = curves.empty() ? kNaN : accumulated_reward(curves);
  m.sample_efficiency_cad = curves.empty() ? kNaN : sample_efficiency(curves);
  m.hours_last10 = mean_of(h10);
  m.cycles_last10 = mean_of(c10);
  m.reward_final_cad = mean_of(rf);
  m.hours_final = mean_of(hf);
  m.cycles_final = mean_of(cf);
  m.reward_eval_cad = mean_of(re);
  m.hours_eval = mean_of(he);
  m.cycles_eval = mean_of(ce);
  m.curve = curve_stats(curves);
  return m;
}

bool MetricsReport::complete() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellMetrics& c) { return c.complete(); });
}

const CellMetrics* MetricsReport::find(Algorithm algorithm, OmVariant variant) const {
  for (const auto& c : cells) {
    if (c.algorithm == algorithm && c.variant == variant) return &c;
  }
  return nullptr;
}

void write_episodes_csv(const fs::path& path, const TrainingCurve& curve) {
  std::string text = std::string(kEpisodesHeader) + "\n";
  for (const auto& s : curve) {
    text += std::to_string(s.episode) + "," + format_double(s.reward_cad) + "," + std::to_string(s.gt_hours) +
            "," + std::to_string(s.gt_cycles) + "," + (std::isnan(s.epsilon) ? "" : format_double(s.epsilon)) +
            "\n";
  }
  write_text(path, text);
}

TrainingCurve read_episodes_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != split(kEpisodesHeader, ',')) {
    throw ParseError(path.string(), 1, "expected header '" + std::string(kEpisodesHeader) + "'");
  }
  TrainingCurve curve;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ParseError(path.string(), line_no, "expected 5 fields");
    EpisodeStats s;
    s.episode = parse_number<int>(f[0], path, line_no);
    s.reward_cad = parse_number<double>(f[1], path, line_no);
    s.gt_hours = parse_number<int>(f[2], path, line_no);
    s.gt_cycles = parse_number<int>(f[3], path, line_no);
    if (!f[4].empty()) s.epsilon = parse_number<double>(f[4], path, line_no);
    curve.push_back(s);
  }
  return curve;
}

void write_curve_csv(const fs::path& path, const CurveStats& curve) {
  std::string text = "episode,mean_reward_cad,std_reward_cad,mean_minus_std,mean_plus_std\n";
  for (std::size_t e = 0; e < curve.mean.size(); ++e) {
    const double m = curve.mean[e];
    const double s = curve.stddev[e];
    text += std::to_string(e) + "," + format_double(m) + "," + format_double(s) + "," + format_double(m - s) +
            "," + format_double(m + s) + "\n";
  }
  write_text(path, text);
}

void write_metrics_csv(const fs::path& path, const MetricsReport& report) {
  std::string text =
      "algorithm,om_variant,seeds_ok,seeds_total,complete,"
      "accumulated_reward_cad,accumulated_reward_mcad,sample_efficiency_cad,sample_efficiency_mcad,"
      "reward_final_cad,hours_last10,cycles_last10,hours_final,cycles_final,"
      "reward_eval_cad,hours_eval,cycles_eval\n";
  for (const auto& c : report.cells) {
    text += to_string(c.algorithm) + "," + to_string(c.variant) + "," + std::to_string(c.seeds_ok) + "," +
            std::to_string(c.seeds_total) + "," + (c.complete() ? "true" : "false") + "," +
            format_double(c.accumulated_reward_cad) + "," + format_double(c.accumulated_reward_cad / 1e6) + "," +
            format_double(c.sample_efficiency_cad) + "," + format_double(c.sample_efficiency_cad / 1e6) + "," +
            format_double(c.reward_final_cad) + "," + format_double(c.hours_last10) + "," +
            format_double(c.cycles_last10) + "," + format_double(c.hours_final) + "," +
            format_double(c.cycles_final) + "," + format_double(c.reward_eval_cad) + "," +
            format_double(c.hours_eval) + "," + format_double(c.cycles_eval) + "\n";
  }
  write_text(path, text);
}

MetricsReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  if (config.agents.empty()) throw ConfigError("experiment lists no agents");
  std::set<Algorithm> algorithms;
  for (const auto& a : config.agents) {
    if (!algorithms.insert(a.algorithm).second) {
      throw ConfigError("algorithm '" + to_string(a.algorithm) + "' listed twice");
    }
  }
  const auto scenario = load_scenario(config.scenario);

  std::vector<Job> jobs;
  for (const auto& agent : config.agents) {
    for (const auto variant : config.om_variants) {
      for (const auto seed : config.seeds) jobs.push_back(Job{&agent, variant, seed});
    }
  }
  const Trainer trainer = options.trainer ? options.trainer : Trainer(train_agent);
  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      records[i] = execute(jobs[i], config, scenario, trainer);
      if (options.on_run_done) options.on_run_done(records[i]);
    }
  };
  unsigned n_workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, jobs.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& r : records) {
    if (!r.ok) {
      std::cerr << "warning: run " << to_string(r.algorithm) << "/" << to_string(r.variant) << "/seed_" << r.seed
                << " failed: " << r.error << "\n";
    }
  }
  MetricsReport report = aggregate_all(records);
  write_cell_curves(config.output_dir, report);
  write_metrics_csv(config.output_dir / "metrics.csv", report);
  return report;
}

MetricsReport report_from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<RunRecord> records;
  for (const auto& alg_entry : fs::directory_iterator(dir)) {
    if (!alg_entry.is_directory()) continue;
    const Algorithm algorithm = parse_algorithm(alg_entry.path().filename().string());
    for (const auto& var_entry : fs::directory_iterator(alg_entry.path())) {
      if (!var_entry.is_directory()) continue;
      const OmVariant variant = parse_om_variant(var_entry.path().filename().string());
      for (const auto& run_entry : fs::directory_iterator(var_entry.path())) {
        const fs::path run = run_entry.path();
        if (!run_entry.is_directory() || run.filename().string().rfind("seed_", 0) != 0) continue;
        RunRecord rec;
        rec.algorithm = algorithm;
        rec.variant = variant;
        const std::string seed_text = read_text(run / "seed.txt");
        rec.seed = parse_number<std::uint64_t>(seed_text.substr(0, seed_text.find_first_of("\r\n")),
                                               run / "seed.txt", 1);
        if (fs::exists(run / "error.txt") || !fs::exists(run / "episodes.csv")) {
          rec.ok = false;
          rec.error = fs::exists(run / "error.txt") ? read_text(run / "error.txt") : "missing episodes.csv";
        } else {
          rec.ok = true;
          rec.curve = read_episodes_csv(run / "episodes.csv");
          rec.evaluation = read_evaluation_csv(run / "evaluation.csv");
        }
        records.push_back(std::move(rec));
      }
    }
  }
  return aggregate_all(records);
}

std::vector<VariantIncrease> variant_increases(const MetricsReport& report) {
  std::vector<VariantIncrease> out;
  std::set<Algorithm> algorithms;
  for (const auto& c : report.cells) algorithms.insert(c.algorithm);
  for (const OmVariant v : {OmVariant::kHourlyOnly, OmVariant::kNoVariable}) {
    double d[4] = {0, 0, 0, 0};
    double x[4] = {0, 0, 0, 0};
    for (const Algorithm a : algorithms) {
      const CellMetrics* dyn = report.find(a, OmVariant::kDynamic);
      const CellMetrics* var = report.find(a, v);
      if (!dyn || !var || dyn->seeds_ok == 0 || var->seeds_ok == 0) continue;
      d[0] += dyn->hours_eval;
      d[1] += dyn->cycles_eval;
      d[2] += dyn->hours_last10;
      d[3] += dyn->cycles_last10;
      x[0] += var->hours_eval;
      x[1] += var->cycles_eval;
      x[2] += var->hours_last10;
      x[3] += var->cycles_last10;
    }
    auto rel = [](double base, double value) { return base == 0.0 ? kNaN : (value - base) / base; };
    out.push_back(VariantIncrease{v, rel(d[0], x[0]), rel(d[1], x[1]), rel(d[2], x[2]), rel(d[3], x[3])});
  }
  return out;
}

OmComparison compare_om_variants(ExperimentConfig config, const RunOptions& options) {
  std::vector<AgentConfig> agents;
  for (const Algorithm a : {Algorithm::kDqn, Algorithm::kPpo}) {
    const auto it = std::find_if(config.agents.begin(), config.agents.end(),
                                 [a](const AgentConfig& c) { return c.algorithm == a; });
    if (it != config.agents.end()) {
      agents.push_back(*it);
    } else {
      AgentConfig c = default_agent_config(a);
      c.episodes = config.episodes;
      agents.push_back(c);
    }
  }
  config.agents = agents;
  config.om_variants = {OmVariant::kDynamic, OmVariant::kHourlyOnly, OmVariant::kNoVariable};
  OmComparison out;
  out.report = run_experiment(config, options);
  out.increases = variant_increases(out.report);
  write_om_comparison_csv(config.output_dir, out);
  return out;
}

void write_om_comparison_csv(const fs::path& dir, const OmComparison& comparison) {
  std::string cells =
      "algorithm,om_variant,seeds_ok,seeds_total,reward_last10_mcad,reward_final_mcad,"
      "hours_last10,cycles_last10,hours_final,cycles_final,hours_eval,cycles_eval\n";
  for (const auto& c : comparison.report.cells) {
    cells += to_string(c.algorithm) + "," + to_string(c.variant) + "," + std::to_string(c.seeds_ok) + "," +
             std::to_string(c.seeds_total) + "," + format_double(c.accumulated_reward_cad / 1e6) + "," +
             format_double(c.reward_final_cad / 1e6) + "," + format_double(c.hours_last10) + "," +
             format_double(c.cycles_last10) + "," + format_double(c.hours_final) + "," +
             format_double(c.cycles_final) + "," + format_double(c.hours_eval) + "," +
             format_double(c.cycles_eval) + "\n";
  }
  write_text(dir / "om_comparison.csv", cells);
  std::string inc = "om_variant,hours_eval_pct,cycles_eval_pct,hours_last10_pct,cycles_last10_pct\n";
  for (const auto& i : comparison.increases) {
    inc += to_string(i.variant) + "," + format_double(100.0 * i.hours_eval) + "," +
           format_double(100.0 * i.cycles_eval) + "," + format_double(100.0 * i.hours_last10) + "," +
           format_double(100.0 * i.cycles_last10) + "\n";
  }
  write_text(dir / "om_increases.csv", inc);
}

}  // namespace gtd
