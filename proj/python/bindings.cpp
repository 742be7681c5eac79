#include <memory>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gtdispatch/agents.hpp"
#include "gtdispatch/config.hpp"
#include "gtdispatch/errors.hpp"
#include "gtdispatch/harness.hpp"
#include "gtdispatch/oracle.hpp"

namespace py = pybind11;
using namespace gtd;

namespace {

using ScenarioPtr = std::shared_ptr<ScenarioTable>;

ScenarioPtr share(ScenarioTable t) { return std::make_shared<ScenarioTable>(std::move(t)); }

py::dict breakdown(const CostBreakdown& c) {
  py::dict d;
  d["fuel"] = c.fuel;
  d["grid"] = c.grid;
  d["om_fixed"] = c.om_fixed;
  d["om_cycle"] = c.om_cycle;
  d["om_hourly"] = c.om_hourly;
  d["total"] = c.total;
  return d;
}

py::dict hour_info(const HourOutcome& h) {
  py::dict d;
  d["cost"] = breakdown(h.cost);
  d["load_fraction"] = h.load_fraction;
  d["p_max_mw"] = h.p_max_mw;
  d["p_gt_mwh"] = h.p_gt_mwh;
  d["p_grid_mwh"] = h.p_grid_mwh;
  d["p_waste_mwh"] = h.p_waste_mwh;
  d["fuel_gj"] = h.fuel_gj;
  d["gt_on"] = h.gt_on;
  d["started"] = h.started;
  d["mode"] = static_cast<int>(h.next.mode);
  d["hcount"] = h.next.hcount;
  return d;
}

py::dict episode(const EpisodeStats& s) {
  py::dict d;
  d["episode"] = s.episode;
  d["reward_cad"] = s.reward_cad;
  d["gt_hours"] = s.gt_hours;
  d["gt_cycles"] = s.gt_cycles;
  d["epsilon"] = s.epsilon;
  return d;
}

py::dict cell(const CellMetrics& c) {
  py::dict d;
  d["algorithm"] = to_string(c.algorithm);
  d["om_variant"] = to_string(c.variant);
  d["seeds_ok"] = c.seeds_ok;
  d["seeds_total"] = c.seeds_total;
  d["accumulated_reward_cad"] = c.accumulated_reward_cad;
  d["sample_efficiency_cad"] = c.sample_efficiency_cad;
  d["hours_last10"] = c.hours_last10;
  d["cycles_last10"] = c.cycles_last10;
  d["reward_eval_cad"] = c.reward_eval_cad;
  d["hours_eval"] = c.hours_eval;
  d["cycles_eval"] = c.cycles_eval;
  d["curve_mean"] = c.curve.mean;
  d["curve_std"] = c.curve.stddev;
  return d;
}

py::list cells(const MetricsReport& r) {
  py::list out;
  for (const auto& c : r.cells) out.append(cell(c));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gas-turbine economic dispatch simulator";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::enum_<OmVariant>(m, "OmVariant")
      .value("DYNAMIC", OmVariant::kDynamic)
      .value("HOURLY_ONLY", OmVariant::kHourlyOnly)
      .value("NO_VARIABLE", OmVariant::kNoVariable);
  py::enum_<GtMode>(m, "GtMode")
      .value("OFF", GtMode::kOff)
      .value("RUNNING", GtMode::kRunning)
      .value("EXTENDED", GtMode::kExtended);
  py::enum_<ActionKind>(m, "ActionKind")
      .value("DISCRETE", ActionKind::kDiscrete)
      .value("CONTINUOUS", ActionKind::kContinuous);

  py::class_<AmbientConditions>(m, "Ambient")
      .def(py::init([](double t, double p, double rh) { return AmbientConditions{t, p, rh}; }),
           py::arg("temperature_c") = kIsoTemperatureC, py::arg("pressure_kpa") = kIsoPressureKpa,
           py::arg("rel_humidity_pct") = 60.0)
      .def_readwrite("temperature_c", &AmbientConditions::temperature_c)
      .def_readwrite("pressure_kpa", &AmbientConditions::pressure_kpa)
      .def_readwrite("rel_humidity_pct", &AmbientConditions::rel_humidity_pct);

  py::class_<SurrogateParams>(m, "SurrogateParams")
      .def(py::init<>())
      .def_readwrite("p_iso_mw", &SurrogateParams::p_iso_mw)
      .def_readwrite("p_flat_mw", &SurrogateParams::p_flat_mw)
      .def_readwrite("c_temp_per_k", &SurrogateParams::c_temp_per_k)
      .def_readwrite("eta_full", &SurrogateParams::eta_full)
      .def_readwrite("c_idle", &SurrogateParams::c_idle)
      .def_readwrite("c_humidity_per_pct", &SurrogateParams::c_humidity_per_pct);

  m.def("max_power", &max_power, py::arg("ambient"), py::arg("params") = SurrogateParams{});
  m.def("fuel_rate", &fuel_rate, py::arg("load_fraction"), py::arg("ambient"),
        py::arg("params") = SurrogateParams{});

  py::class_<OmParameters>(m, "OmParameters")
      .def(py::init<>())
      .def_readwrite("life_hours", &OmParameters::life_hours)
      .def_readwrite("life_cycles", &OmParameters::life_cycles)
      .def_readwrite("fixed_annual_cad", &OmParameters::fixed_annual_cad)
      .def_readwrite("variable_lifetime_cad", &OmParameters::variable_lifetime_cad)
      .def_property_readonly("fixed_hourly", &OmParameters::fixed_hourly)
      .def_property_readonly("cycle_cost", &OmParameters::cycle_cost)
      .def_property_readonly("hourly_cost", &OmParameters::hourly_cost)
      .def_property_readonly("hour_threshold", &OmParameters::hour_threshold);

  py::class_<GtState>(m, "GtState")
      .def(py::init([](GtMode mode, int hcount) { return GtState{mode, hcount}; }),
           py::arg("mode") = GtMode::kOff, py::arg("hcount") = 0)
      .def_readwrite("mode", &GtState::mode)
      .def_readwrite("hcount", &GtState::hcount)
      .def("__eq__", [](const GtState& a, const GtState& b) { return a == b; })
      .def("__repr__", [](const GtState& s) {
        return "GtState(mode=" + std::to_string(static_cast<int>(s.mode)) + ", hcount=" + std::to_string(s.hcount) +
               ")";
      });

  m.def(
      "om_step",
      [](const GtState& state, bool gt_on, OmVariant variant, const OmParameters& params) {
        const OmStep s = om_step(state, gt_on, params, variant);
        return py::make_tuple(breakdown(s.cost), s.next);
      },
      py::arg("state"), py::arg("gt_on"), py::arg("variant") = OmVariant::kDynamic,
      py::arg("params") = OmParameters{}, "One hour of O&M accounting; returns (costs, next_state).");

  py::class_<ScenarioTable, ScenarioPtr>(m, "Scenario")
      .def("__len__", &ScenarioTable::size)
      .def("prices", &ScenarioTable::prices)
      .def("demands", &ScenarioTable::demands)
      .def("temperatures", &ScenarioTable::temperatures)
      .def("timestamps",
           [](const ScenarioTable& t) {
             std::vector<std::string> out;
             for (const auto& r : t.rows()) out.push_back(format_timestamp(r.stamp));
             return out;
           })
      .def("slice", [](const ScenarioTable& t, std::size_t first, std::size_t count) {
        return share(t.slice(first, count));
      });

  m.def(
      "synthetic_scenario",
      [](std::uint64_t seed) { return share(make_synthetic_scenario(seed)); },
      py::arg("seed") = 0);
  m.def(
      "load_scenario",
      [](const std::filesystem::path& dir) { return share(load_scenario_dir(dir)); },
      py::arg("dir"));
  m.def("write_scenario", &write_scenario_csv, py::arg("scenario"), py::arg("dir"));

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init([](std::size_t hours, OmVariant variant, ActionKind kind) {
             EnvConfig c;
             c.episode_hours = hours;
             c.om_variant = variant;
             c.action.kind = kind;
             return c;
           }),
           py::arg("episode_hours") = 8760, py::arg("om_variant") = OmVariant::kDynamic,
           py::arg("action_kind") = ActionKind::kDiscrete)
      .def_readwrite("om_variant", &EnvConfig::om_variant)
      .def_readwrite("episode_hours", &EnvConfig::episode_hours)
      .def_readwrite("fuel_price_cad_per_gj", &EnvConfig::fuel_price_cad_per_gj)
      .def_readwrite("reward_scale", &EnvConfig::reward_scale)
      .def_readwrite("surrogate", &EnvConfig::surrogate)
      .def_readwrite("om", &EnvConfig::om);

  py::class_<DispatchEnv>(m, "DispatchEnv")
      .def(py::init<EnvConfig>(), py::arg("config"))
      .def("reset",
           [](DispatchEnv& e, ScenarioPtr scenario) { return e.reset(std::move(scenario)).to_array(); })
      .def("step",
           [](DispatchEnv& e, double action) {
             const StepResult r = e.step(action);
             return py::make_tuple(r.observation.to_array(), r.reward, r.done, hour_info(r.info));
           })
      .def_property_readonly("done", &DispatchEnv::done)
      .def_property_readonly("hour", &DispatchEnv::hour)
      .def_property_readonly("state", &DispatchEnv::gt_state)
      .def_property_readonly("episode_reward", &DispatchEnv::episode_reward)
      .def_property_readonly("episode_hours_on", &DispatchEnv::episode_hours_on)
      .def_property_readonly("episode_cycles", &DispatchEnv::episode_cycles);

  m.def(
      "dp_optimal",
      [](const ScenarioTable& scenario, const EnvConfig& config) {
        EnvConfig c = config;
        c.episode_hours = scenario.size();
        const OracleResult r = dp_optimal(scenario, c.action.discrete_levels, c);
        const ReplayResult replay = replay_schedule(scenario, r.load_fractions, c);
        py::dict d;
        d["cost"] = r.cost;
        d["level_indices"] = r.level_indices;
        d["load_fractions"] = r.load_fractions;
        d["gt_hours"] = replay.hours_on;
        d["gt_cycles"] = replay.cycles;
        return d;
      },
      py::arg("scenario"), py::arg("config") = EnvConfig{});

  m.def("epsilon_for_episode", &epsilon_for_episode, py::arg("episode"), py::arg("episodes"),
        py::arg("start") = 0.8, py::arg("end") = 0.001, py::arg("fixed_tail") = 10);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("from_yaml", &parse_experiment_config, py::arg("text"))
      .def_static("load", &load_experiment_config, py::arg("path"))
      .def("to_yaml", [](const ExperimentConfig& c) { return to_yaml(c); })
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("episodes", &ExperimentConfig::episodes)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("workers", &ExperimentConfig::workers);

  m.def(
      "train",
      [](const ExperimentConfig& config) {
        MetricsReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(config);
        }
        return cells(r);
      },
      py::arg("config"), "Runs every configured agent and seed; returns one dict per metrics cell.");

  m.def(
      "compare_om",
      [](const ExperimentConfig& config) {
        OmComparison cmp;
        {
          py::gil_scoped_release release;
          cmp = compare_om_variants(config);
        }
        py::list inc;
        for (const auto& i : cmp.increases) {
          py::dict d;
          d["om_variant"] = to_string(i.variant);
          d["hours_eval"] = i.hours_eval;
          d["cycles_eval"] = i.cycles_eval;
          d["hours_last10"] = i.hours_last10;
          d["cycles_last10"] = i.cycles_last10;
          inc.append(d);
        }
        return py::make_tuple(cells(cmp.report), inc);
      },
      py::arg("config"));

  m.def(
      "report",
      [](const std::filesystem::path& dir) { return cells(report_from_directory(dir)); }, py::arg("dir"));

  m.def(
      "read_episodes", [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& s : read_episodes_csv(path)) out.append(episode(s));
        return out;
      },
      py::arg("path"));
}
