#include <gtest/gtest.h>

#include <random>

#include "gtdispatch/cost.hpp"
#include "gtdispatch/errors.hpp"

using namespace gtd;

namespace {

constexpr double kFix = 780000.0 / 8760.0;
constexpr double kCycle = 33e6 / 26000.0;
constexpr double kHour = 33e6 / 200000.0;

OmStep on(GtState s, OmVariant v = OmVariant::kDynamic) { return om_step(s, true, {}, v); }

}  // namespace

TEST(OmParameters, DerivedRates) {
  const OmParameters p;
  EXPECT_NEAR(p.fixed_hourly(), 89.04, 5e-3);
  EXPECT_NEAR(p.cycle_cost(), 1269.23, 5e-3);
  EXPECT_NEAR(p.hourly_cost(), 165.0, 1e-12);
  EXPECT_EQ(p.hour_threshold(), 8);
}

TEST(OmStep, StartFromOff) {
  const OmStep s = on({GtMode::kOff, 0});
  EXPECT_NEAR(s.om_cost(), kCycle + kFix, 1e-9);
  EXPECT_NEAR(s.om_cost(), 1358.27, 5e-3);
  EXPECT_EQ(s.next, (GtState{GtMode::kRunning, 1}));
}

TEST(OmStep, RunningWithinThresholdPaysFixedOnly) {
  const OmStep s = on({GtMode::kRunning, 3});
  EXPECT_NEAR(s.om_cost(), kFix, 1e-12);
  EXPECT_EQ(s.next, (GtState{GtMode::kRunning, 4}));
}

TEST(OmStep, ReachingThresholdEntersExtended) {
  const OmStep s = on({GtMode::kRunning, 7});
  EXPECT_NEAR(s.om_cost(), 89.04, 5e-3);
  EXPECT_EQ(s.next, (GtState{GtMode::kExtended, 8}));
}

TEST(OmStep, ExtendedPaysHourly) {
  const OmStep s = on({GtMode::kExtended, 12});
  EXPECT_NEAR(s.om_cost(), kHour + kFix, 1e-9);
  EXPECT_NEAR(s.om_cost(), 254.04, 5e-3);
  EXPECT_EQ(s.next, (GtState{GtMode::kExtended, 13}));
}

TEST(OmStep, OffAlwaysFixedOnlyAndResets) {
  for (const auto v : {OmVariant::kDynamic, OmVariant::kHourlyOnly, OmVariant::kNoVariable}) {
    for (const GtState st : {GtState{GtMode::kOff, 0}, GtState{GtMode::kRunning, 5}, GtState{GtMode::kExtended, 40}}) {
      const OmStep s = om_step(st, false, {}, v);
      EXPECT_NEAR(s.om_cost(), kFix, 1e-12);
      EXPECT_EQ(s.next, (GtState{GtMode::kOff, 0}));
    }
  }
}

TEST(OmStep, HourlyOnlyChargesEveryOnHour) {
  for (const GtState st : {GtState{GtMode::kOff, 0}, GtState{GtMode::kRunning, 2}, GtState{GtMode::kExtended, 9}}) {
    EXPECT_NEAR(on(st, OmVariant::kHourlyOnly).om_cost(), kFix + kHour, 1e-9);
  }
}

TEST(OmStep, NoVariableChargesFixedOnly) {
  for (const GtState st : {GtState{GtMode::kOff, 0}, GtState{GtMode::kRunning, 2}, GtState{GtMode::kExtended, 9}}) {
    EXPECT_NEAR(on(st, OmVariant::kNoVariable).om_cost(), kFix, 1e-12);
  }
}

TEST(OmStep, BreakdownSumsToTotal) {
  const OmStep s = on({GtMode::kOff, 0});
  EXPECT_DOUBLE_EQ(s.cost.total, s.cost.om());
  EXPECT_DOUBLE_EQ(s.cost.om_hourly, 0.0);
}

TEST(OmStep, InconsistentStateRejected) {
  const OmParameters p;
  EXPECT_THROW(validate(GtState{GtMode::kOff, 3}, p), DomainError);
  EXPECT_THROW(validate(GtState{GtMode::kRunning, 0}, p), DomainError);
  EXPECT_THROW(validate(GtState{GtMode::kRunning, 9}, p), DomainError);
  EXPECT_THROW(validate(GtState{GtMode::kExtended, 2}, p), DomainError);
  EXPECT_NO_THROW(validate(GtState{GtMode::kRunning, 7}, p));
  EXPECT_NO_THROW(validate(GtState{GtMode::kExtended, 8}, p));
}

// Isolated cycle of n hours: variable O&M is one cycle charge plus one hourly
// charge per hour beyond the threshold.
TEST(OmStep, CycleAmortizationClosedForm) {
  for (int n = 1; n <= 30; ++n) {
    GtState st;
    double variable = 0.0;
    for (int h = 0; h < n; ++h) {
      const OmStep s = on(st);
      variable += s.cost.om_cycle + s.cost.om_hourly;
      st = s.next;
    }
    EXPECT_NEAR(variable, kCycle + std::max(0, n - 8) * kHour, 1e-9) << "n=" << n;
  }
}

TEST(OmVariant, ParseAndPrint) {
  EXPECT_EQ(parse_om_variant("dynamic"), OmVariant::kDynamic);
  EXPECT_EQ(parse_om_variant("hourly_only"), OmVariant::kHourlyOnly);
  EXPECT_EQ(parse_om_variant("no_variable"), OmVariant::kNoVariable);
  for (const auto v : {OmVariant::kDynamic, OmVariant::kHourlyOnly, OmVariant::kNoVariable}) {
    EXPECT_EQ(parse_om_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_om_variant("weekly"), ConfigError);
}

TEST(GridCost, Products) {
  EXPECT_DOUBLE_EQ(grid_cost(95, 10), 950);
  EXPECT_DOUBLE_EQ(grid_cost(0, 20), 0);
  EXPECT_DOUBLE_EQ(grid_cost(42.5, 0), 0);
  EXPECT_DOUBLE_EQ(grid_cost(-10, 2), -20);
  EXPECT_THROW(grid_cost(10, -1), DomainError);
}

TEST(FuelCost, Products) {
  EXPECT_DOUBLE_EQ(fuel_cost(100, 3.9), 390);
  EXPECT_DOUBLE_EQ(fuel_cost(0, 3.9), 0);
  EXPECT_NEAR(fuel_cost(272.7, 3.9), 1063.53, 1e-9);
}

TEST(Startup, DurationBoundary) {
  EXPECT_DOUBLE_EQ(startup_duration_min(10), 20);
  EXPECT_DOUBLE_EQ(startup_duration_min(0), 20);
  EXPECT_DOUBLE_EQ(startup_duration_min(-0.01), 35);
}

TEST(Startup, WarmStart) {
  // full-load hour at 30.3 MW, 272.7 GJ/h, idle 54.54 GJ/h
  const StartupResult r = startup_correction(30.3, 272.7, 54.54, 10.0);
  EXPECT_NEAR(r.net_energy_mwh, 30.3 * 40.0 / 60.0, 1e-9);
  EXPECT_NEAR(r.net_energy_mwh, 20.2, 1e-9);
  EXPECT_NEAR(r.fuel_gj, 54.54 / 3.0 + 272.7 * 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.fuel_gj, 199.98, 1e-9);
}

TEST(Startup, ColdStart) {
  const StartupResult r = startup_correction(30.3, 272.7, 54.54, -5.0);
  EXPECT_NEAR(r.net_energy_mwh, 12.625, 1e-9);
  EXPECT_NEAR(r.fuel_gj, 145.44, 1e-9);
  EXPECT_DOUBLE_EQ(r.duration_min, 35);
}
