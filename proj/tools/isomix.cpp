// isomix command-line front end.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isomix/closure.hpp"
#include "isomix/config.hpp"
#include "isomix/errors.hpp"
#include "isomix/output.hpp"
#include "isomix/simulation.hpp"
#include "isomix/verify.hpp"
#include "isomix_oracles/oracles.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBreach = 2;
constexpr int kExitPicard = 3;
constexpr int kExitConfig = 64;

struct Options {
  std::string config;
  std::string positional;
  std::string out;
  std::size_t cadence = 0;
  std::uint64_t seed = 20240601;
  bool quiet = false;
};

std::string config_path(const Options& o) {
  if (!o.config.empty()) return o.config;
  return o.positional;
}

// Any failure while reading or validating the scenario file.
struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

isomix::RunConfig load(const Options& o) {
  const std::string path = config_path(o);
  if (path.empty()) throw ConfigFailure("no config file given (positional argument or --config)");
  try {
    return isomix::load_config(path);
  } catch (const isomix::Error& e) {
    throw ConfigFailure(e.what());
  }
}

int check_thermo(const Options& o) {
  isomix::SuiteOptions opt;
  opt.seed = o.seed;
  const auto results = isomix::all_suites(opt);
  std::size_t failed = 0;
  if (!o.quiet) std::printf("%-10s %-52s %-12s %-2s %-10s %s\n", "suite", "check", "measured", "", "bound", "result");
  for (const auto& r : results) {
    if (!r.pass) ++failed;
    if (!o.quiet || !r.pass) {
      std::printf("%-10s %-52s %-12.4e %-2s %-10.3e %s\n", r.suite.c_str(), r.name.c_str(), r.measured,
                  r.relation.c_str(), r.bound, r.pass ? "PASS" : "FAIL");
    }
  }
  std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
  return failed == 0 ? kExitOk : kExitFailure;
}

int simulate(const Options& o) {
  isomix::RunConfig cfg = load(o);
  if (!o.out.empty()) cfg.output.directory = o.out;
  if (o.cadence > 0) cfg.output.cadence = o.cadence;
  isomix::RunOptions run;
  if (!o.quiet) {
    const std::size_t every = std::max<std::size_t>(1, cfg.n_steps() / 10);
    run.on_step = [every](const isomix::MonitorRow& r) {
      if (r.step % every == 0) {
        std::fprintf(stderr, "step %6zu  t = %.6f  mass = %.15g  m = %.3e  sweeps = %zu\n", r.step, r.time,
                     r.mass, r.m_lower, r.picard_iters);
      }
    };
  }
  const isomix::TimeSeries series = isomix::run_simulation(cfg, run);
  isomix::emit_outputs(series, cfg, cfg.output.directory);
  if (!o.quiet) {
    std::printf("termination: %s\n%s\noutputs in %s\n", std::string(isomix::to_string(series.termination)).c_str(),
                series.message.c_str(), cfg.output.directory.c_str());
  }
  switch (series.termination) {
    case isomix::Termination::Completed: return kExitOk;
    case isomix::Termination::ThresholdBreach: return kExitBreach;
    case isomix::Termination::PicardDivergence: return kExitPicard;
  }
  return kExitFailure;
}

int sweep_threshold(const Options& o) {
  const isomix::RunConfig cfg = load(o);
  const isomix::Thermodynamics thermo(cfg.mixture);
  const auto nq = static_cast<Eigen::Index>(thermo.n_reduced());
  const isomix::Vector q = isomix::Vector::Zero(nq);
  const auto sweep = isomix::threshold_sweep(thermo.varrho_min(), thermo.varrho_max(), 25, 1e-3);
  const auto rep = isomix::degeneration_monitor(cfg.closure, thermo, sweep, q);

  std::string csv = "varrho,m,d,a_norm,d_q_norm,a_q_norm,d_varrho,a_varrho_norm,ratio,derivative,pressure,log_distance\n";
  for (const auto& pt : rep.points) {
    const double pressure = thermo.pressure_p(pt.varrho, q);
    const double log_distance = -std::log(pt.m);
    for (double x : {pt.varrho, pt.m, pt.d, pt.a_norm, pt.d_q_norm, pt.a_q_norm, pt.d_varrho, pt.a_varrho_norm,
                     pt.ratio, pt.derivative, pressure}) {
      csv += isomix::format_number(x, 17);
      csv += ',';
    }
    csv += isomix::format_number(log_distance, 17);
    csv += '\n';
  }
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "sweep.csv", std::ios::binary) << csv;
  } else {
    std::cout << csv;
  }
  // Log-pressure slope near the upper threshold.
  std::vector<double> xs, ys;
  for (const auto& pt : rep.points) {
    if (pt.varrho > 0.5 * (thermo.varrho_min() + thermo.varrho_max()) && pt.m < 0.05) {
      xs.push_back(-std::log(pt.m));
      ys.push_back(thermo.pressure_p(pt.varrho, q));
    }
  }
  std::fprintf(stderr, "ratio max %.6g median %.6g (max/median %.4g); max |d_varrho|+|A_varrho| %.6g\n",
               rep.max_ratio, rep.median_ratio, rep.max_ratio / rep.median_ratio, rep.max_derivative);
  if (xs.size() >= 2) {
    std::fprintf(stderr, "upper-side slope of P vs -ln m: %.6g\n", isomix::oracle::ls_slope(xs, ys));
  }
  return kExitOk;
}

void print(const char* name, double value) { std::printf("%-44s %.17g\n", name, value); }

int derive_fixtures(const Options&) {
  namespace oc = isomix::oracle;
  const auto g = oc::golden_anchor();
  print("golden.x (root of x^2+x-1)", g.x);
  print("golden.f(0,0) = -ln x", g.p);
  print("golden.rho1", g.rho1);
  print("golden.rho2", g.rho2);
  const oc::Vec vbar2 = (oc::Vec(2) << 1.0, 2.0).finished();
  print("golden.f(0,0) by golden-section search", oc::binary_conjugate_golden(oc::Vec::Zero(2), vbar2));
  print("binary.P(0.75)", oc::binary_pressure(0.75));
  print("binary.P_varrho(0.75)", oc::binary_pressure_derivative(0.75));
  print("binary.P_varrho(0.75) by FD", oc::fd_derivative(oc::binary_pressure, 0.75, 1e-5));
  print("binary.m_one(0.75)", oc::binary_m_one(0.75));
  print("binary.d(0.75)", oc::binary_d(0.75));
  const oc::Vec vbar3 = (oc::Vec(3) << 1.0, 2.0, 4.0).finished();
  const auto c3 = oc::ideal_conjugate_bisection(oc::Vec::Zero(3), vbar3);
  print("ternary.f(0,0,0) by bisection", c3.p);
  for (int i = 0; i < 3; ++i) {
    const std::string name = "ternary.rho" + std::to_string(i + 1) + "(0,0,0)";
    print(name.c_str(), c3.rho[i]);
  }
  print("momentum decay factor (eta=1, varrho=0.75, L=1, dt=1e-3)", oc::momentum_decay_factor(1.0, 0.75, 1.0, 1e-3));
  print("extension exponent z(4)", oc::extension_exponent(4.0));
  print("extension exponent z(5)", oc::extension_exponent(5.0));
  print("extension exponent z(6)", oc::extension_exponent(6.0));
  const oc::Mat b = oc::default_B(oc::binary_rho(0.75));
  print("default B(0.75)[0][0]", b(0, 0));
  print("default B(0.75)[0][1]", b(0, 1));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isomix: isothermal incompressible mixture simulator"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario JSON file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--cadence", o.cadence, "field snapshot cadence in steps");
    sub->add_option("--seed", o.seed, "seed for randomized property suites");
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
  };
  auto* check = app.add_subcommand("check-thermo", "run the thermodynamics and closure property suites");
  auto* sim = app.add_subcommand("simulate", "run a scenario");
  auto* sweep = app.add_subcommand("sweep-threshold", "sweep varrho toward both thresholds");
  auto* fixtures = app.add_subcommand("derive-fixtures", "print the reference values used by the tests");
  for (auto* sub : {check, sim, sweep, fixtures}) common(sub);
  sim->add_option("config_file", o.positional, "scenario JSON file");
  sweep->add_option("config_file", o.positional, "scenario JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*check) return check_thermo(o);
    if (*sim) return simulate(o);
    if (*sweep) return sweep_threshold(o);
    if (*fixtures) return derive_fixtures(o);
  } catch (const ConfigFailure& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
