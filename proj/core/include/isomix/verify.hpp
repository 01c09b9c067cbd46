#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isomix/closure.hpp"
#include "isomix/thermo.hpp"

namespace isomix {

/// One row of a property-suite table: pass iff measured <= bound (or the
/// comparison stated in `relation`).
struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation = "<=";
  bool pass = false;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  std::size_t duality_samples = 10000;
  std::size_t samples = 1000;
};

/// Reference mixtures used by the suites: N = 2, 3, 4 with unit masses.
Vector reference_vbar(std::size_t n_species);
/// Symmetric binary diffusivities 1 + 0.5 |i - j| + 0.25 (i + j).
Matrix reference_diffusivities(std::size_t n_species);

std::vector<CheckResult> duality_suite(const SuiteOptions& opt);
std::vector<CheckResult> hessian_suite(const SuiteOptions& opt);
std::vector<CheckResult> roundtrip_suite(const SuiteOptions& opt);
std::vector<CheckResult> pressure_suite();
std::vector<CheckResult> closure_suite(const SuiteOptions& opt);

/// ratio sweep: 25 points per side with threshold distance m geometric in
/// [1e-3, 0.25 m(mid)].
std::vector<double> threshold_sweep(double varrho_min, double varrho_max, std::size_t per_side = 25,
                                    double closest = 1e-3);

std::vector<CheckResult> all_suites(const SuiteOptions& opt);

}  // namespace isomix
