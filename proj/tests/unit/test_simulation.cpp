#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isomix/config.hpp"
#include "isomix/output.hpp"
#include "isomix/simulation.hpp"

namespace fs = std::filesystem;
using isomix::parse_config;
using isomix::run_simulation;
using isomix::Termination;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("isomix_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Simulation, EquilibriumStaysConstant) {
  const auto c = parse_config(R"({"mixture": {"vbar": [1, 2, 4]}, "grid": {"n_cells": 32},
      "time": {"dt": 0.01, "t_final": 0.1}, "initial": {"varrho": 0.6, "q": [0.3]}})");
  const auto s = run_simulation(c);
  ASSERT_EQ(s.termination, Termination::Completed);
  ASSERT_EQ(s.rows.size(), 11u);
  EXPECT_LE((s.final_state.varrho.array() - 0.6).abs().maxCoeff(), 1e-10);
  EXPECT_LE((s.final_state.q.array() - 0.3).abs().maxCoeff(), 1e-10);
  EXPECT_LE(s.final_state.v.cwiseAbs().maxCoeff(), 1e-10);
  for (const auto& r : s.rows) {
    EXPECT_NEAR(r.free_energy, s.rows.front().free_energy, 1e-10);
    EXPECT_LE(r.volume_residual, 1e-12);
  }
}

TEST(Simulation, OutputFilesAndDeterminism) {
  const auto c = parse_config(R"({"mixture": {"vbar": [1, 2]}, "grid": {"n_cells": 16},
      "time": {"dt": 0.001, "t_final": 0.003},
      "initial": {"varrho": {"kind": "cosine", "mean": 0.75, "amplitude": 0.1, "mode": 1}},
      "output": {"cadence": 1}})");
  const auto a = scratch("a"), b = scratch("b");
  isomix::emit_outputs(run_simulation(c), c, a.string());
  isomix::emit_outputs(run_simulation(c), c, b.string());
  for (const char* f : {"monitors.csv", "fields_1.csv", "fields_2.csv", "fields_3.csv", "run.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "fields_0.csv"));
  EXPECT_FALSE(fs::exists(a / "fields_4.csv"));
  const std::string monitors = slurp(a / "monitors.csv");
  EXPECT_EQ(monitors.rfind("step,time,mass,m_lower,M_upper,zeta_mean,volume_residual,picard_iters,picard_ratio,N_crit,K_crit,free_energy\n", 0), 0u);
  EXPECT_EQ(std::count(monitors.begin(), monitors.end(), '\n'), 5);
  const std::string run = slurp(a / "run.json");
  EXPECT_NE(run.find("\"termination\": \"completed\""), std::string::npos);
  EXPECT_NE(run.find("\"steps\": 3"), std::string::npos);
}

TEST(Simulation, TernaryForcedConservesMassAndVolume) {
  const auto c = isomix::load_config(std::string(ISOMIX_SOURCE_DIR) + "/configs/ternary_forced.json");
  auto cfg = c;
  cfg.t_final = 0.02;
  const auto s = run_simulation(cfg, {false, {}});
  ASSERT_EQ(s.termination, Termination::Completed);
  const double mass0 = s.rows.front().mass;
  for (const auto& r : s.rows) {
    EXPECT_NEAR(r.mass, mass0, 1e-12 * mass0);
    EXPECT_LE(r.zeta_mean, 1e-12);
    EXPECT_LE(r.volume_residual, 1e-9);
    EXPECT_LE(r.mass_residual, 1e-9);
  }
  EXPECT_TRUE(s.fields.empty());
}

TEST(Simulation, FreeEnergyDecreasesWithoutForcing) {
  const auto c = parse_config(R"({"mixture": {"vbar": [1, 2]}, "grid": {"n_cells": 64},
      "time": {"dt": 0.001, "t_final": 0.05},
      "initial": {"varrho": {"kind": "cosine", "mean": 0.75, "amplitude": 0.2, "mode": 1}}})");
  const auto s = run_simulation(c, {false, {}});
  ASSERT_EQ(s.termination, Termination::Completed);
  for (std::size_t k = 1; k < s.rows.size(); ++k) {
    EXPECT_LE(s.rows[k].free_energy, s.rows[k - 1].free_energy + 1e-12) << k;
  }
  EXPECT_LT(s.rows.back().free_energy, s.rows.front().free_energy);
}

TEST(Simulation, BreachStopsTheRun) {
  const auto c = isomix::load_config(std::string(ISOMIX_SOURCE_DIR) + "/configs/threshold_breach.json");
  const auto s = run_simulation(c, {false, {}});
  ASSERT_EQ(s.termination, Termination::ThresholdBreach);
  ASSERT_TRUE(s.breach.has_value());
  EXPECT_EQ(s.breach->side, isomix::ThresholdBreachError::Side::Upper);
  EXPECT_LT(s.rows.size(), c.n_steps() + 1);
  EXPECT_LT(s.final_state.varrho.maxCoeff(), 1.0 - 1e-10);
  EXPECT_GT(s.rows.back().M_upper, s.rows.front().M_upper);
}

TEST(Simulation, ExhaustedSweepsReportDivergence) {
  const auto c = isomix::load_config(std::string(ISOMIX_TEST_DATA) + "/picard_exhausted.json");
  const auto s = run_simulation(c, {false, {}});
  EXPECT_EQ(s.termination, Termination::PicardDivergence);
  EXPECT_FALSE(s.message.empty());
}

TEST(Output, NumberFormat) {
  EXPECT_EQ(isomix::format_number(0.1, 17), "0.10000000000000001");
  EXPECT_EQ(isomix::format_number(0.1, 6), "0.1");
  EXPECT_EQ(isomix::format_number(-2.5e-20, 3), "-2.5e-20");
}
