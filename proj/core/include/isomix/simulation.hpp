#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isomix/config.hpp"
#include "isomix/diagnostics.hpp"
#include "isomix/errors.hpp"

namespace isomix {

enum class Termination { Completed, ThresholdBreach, PicardDivergence };

std::string_view to_string(Termination t) noexcept;

/// One monitors.csv row. The last three fields are kept in memory only and
/// summarized in run.json.
struct MonitorRow {
  std::size_t step = 0;
  double time = 0.0;
  double mass = 0.0;             // sum varrho dx
  double m_lower = 0.0;
  double M_upper = 0.0;
  double zeta_mean = 0.0;
  double volume_residual = 0.0;  // max |R.vbar - 1|
  std::size_t picard_iters = 0;
  double picard_ratio = 0.0;     // max E^k / E^{k-1} of the step
  double N_crit = 0.0;
  double K_crit = 0.0;
  double free_energy = 0.0;      // sum (k(rho) + varrho v^2 / 2) dx

  double mass_residual = 0.0;    // max |sum R - varrho|
  double isochoric = 0.0;
  double picard_increment = 0.0;
};

/// Full field data at one output step.
struct FieldRecord {
  std::size_t step = 0;
  DiscreteState state;
  Matrix rho;       // N x n
  Vector pressure;  // P(varrho, q) + zeta
};

struct BreachInfo {
  std::size_t cell = 0;
  double x = 0.0;
  double value = 0.0;
  ThresholdBreachError::Side side = ThresholdBreachError::Side::Upper;
  double time = 0.0;
};

struct TimeSeries {
  std::vector<MonitorRow> rows;      // step 0 .. last accepted step
  std::vector<FieldRecord> fields;   // steps >= 1 at the output cadence
  Termination termination = Termination::Completed;
  std::string message;
  std::optional<BreachInfo> breach;
  DiscreteState initial_state;       // after the Neumann correction
  DiscreteState final_state;
  std::uint64_t config_hash = 0;
};

struct RunOptions {
  bool keep_fields = true;
  /// Called after every accepted step (and once for step 0).
  std::function<void(const MonitorRow&)> on_step;
};

/// Marches the configured scenario to t_final or until a threshold breach or
/// Picard failure. Other solver errors propagate.
TimeSeries run_simulation(const RunConfig& config, const RunOptions& options = {});

}  // namespace isomix
