#include "isomix/simulation.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "isomix/errors.hpp"

namespace isomix {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::ThresholdBreach: return "threshold_breach";
    case Termination::PicardDivergence: return "picard_divergence";
  }
  return "unknown";
}

namespace {

Snapshot snapshot_of(const DiscreteState& s) { return Snapshot{s.time, s.varrho, s.q, s.zeta, s.v}; }

FieldRecord field_record(std::size_t step, const DiscreteState& s,
                         const std::vector<CellCoefficients>& coeffs) {
  FieldRecord rec;
  rec.step = step;
  rec.state = s;
  const auto n = static_cast<Eigen::Index>(coeffs.size());
  const auto ns = coeffs.empty() ? 0 : coeffs.front().map.rho.size();
  rec.rho.resize(ns, n);
  rec.pressure.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = coeffs[static_cast<std::size_t>(i)];
    rec.rho.col(i) = c.map.rho;
    rec.pressure[i] = c.map.pressure + s.zeta[i];
  }
  return rec;
}

}  // namespace

TimeSeries run_simulation(const RunConfig& config, const RunOptions& options) {
  const Thermodynamics thermo(config.mixture);
  const Grid1D grid(config.n_cells, config.length);
  const Forcing forcing = config.forcing(thermo.frame());
  PicardSolver solver(thermo, config.closure, grid, forcing, config.solver_settings());
  const double dx = grid.dx();

  TimeSeries series;
  series.config_hash = config.hash;

  ThresholdTracker tracker(thermo.varrho_min(), thermo.varrho_max());
  ExtensionAccumulator extension(dx, config.output.norm_exponent, config.output.holder_exponent);

  auto record = [&](std::size_t step, const DiscreteState& s, const std::vector<CellCoefficients>& coeffs,
                    const PicardReport* report) {
    MonitorRow row;
    row.step = step;
    row.time = s.time;
    row.mass = s.varrho.sum() * dx;
    const ThresholdValues th = tracker.update(s.varrho);
    row.m_lower = th.m;
    row.M_upper = th.M;
    const ConstraintResiduals res = constraint_residuals(s, thermo, config.closure, dx, forcing);
    row.zeta_mean = res.zeta_mean;
    row.volume_residual = res.volume;
    row.mass_residual = res.mass;
    row.isochoric = res.isochoric;
    if (report) {
      row.picard_iters = report->n_iterations;
      row.picard_ratio = report->max_ratio();
      row.picard_increment = report->final_increment;
    }
    const ExtensionValues ext = extension.add(snapshot_of(s));
    row.N_crit = ext.N;
    row.K_crit = ext.K;
    row.free_energy = total_free_energy(s, coeffs, thermo.energy(), dx);
    series.rows.push_back(row);
    if (options.on_step) options.on_step(series.rows.back());
  };

  AdvanceResult current = solver.initialize(config.initial_state(grid));
  series.initial_state = current.state;
  record(0, current.state, current.coefficients, nullptr);

  const std::size_t n_steps = config.n_steps();
  const std::size_t cadence = config.output.cadence;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    try {
      AdvanceResult next = solver.advance(current.state);
      current = std::move(next);
    } catch (const ThresholdBreachError& e) {
      series.termination = Termination::ThresholdBreach;
      series.message = e.what();
      series.breach = BreachInfo{e.cell(), grid.center(e.cell()), e.value(), e.side(),
                                 current.state.time + config.dt};
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PicardDivergence) throw;
      series.termination = Termination::PicardDivergence;
      series.message = e.what();
      break;
    }
    // Step times are step * dt to avoid accumulating round-off.
    current.state.time = static_cast<double>(step) * config.dt;
    record(step, current.state, current.coefficients, &current.report);
    if (options.keep_fields && step % cadence == 0) {
      series.fields.push_back(field_record(step, current.state, current.coefficients));
    }
  }
  series.final_state = current.state;
  if (series.termination == Termination::Completed) {
    std::ostringstream os;
    os << "reached t = " << current.state.time << " after " << series.rows.size() - 1 << " steps";
    series.message = os.str();
  }
  return series;
}

}  // namespace isomix
