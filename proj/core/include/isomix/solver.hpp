#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "isomix/closure.hpp"
#include "isomix/grid.hpp"
#include "isomix/thermo.hpp"

namespace isomix {

/// Guard band around the thresholds used by the continuity step.
struct ThresholdGuard {
  double varrho_min = 0.0;
  double varrho_max = 0.0;
  double band = 1e-10;
};

/// One explicit conservative upwind step of varrho_t + (varrho v)_x = 0.
/// Face velocities are neighbour averages and vanish at the walls.
/// Throws CflViolation if dt max|v| / dx > cfl_max and ThresholdBreachError if
/// any updated value falls inside the guard band.
Vector step_continuity(const Vector& varrho_n, const Vector& v_star, double dt, double dx,
                       const ThresholdGuard& guard, double cfl_max = 0.9);

/// Implicit Euler step of the reduced (q, zeta) block.
/// All per-cell fields; face coefficients are neighbour averages.
struct QZetaProblem {
  double dt = 0.0;
  double dx = 0.0;
  std::vector<Matrix> r_q;      // per cell, (N-2) x (N-2)
  std::vector<Matrix> m_tilde;  // per cell, (N-2) x (N-2)
  Matrix a_vec;                 // (N-2) x n
  Vector d_scal;                // n
  Matrix g;                     // (N-2) x n
  Vector h;                     // n
  Vector v_star;                // n
  Matrix q_n;                   // (N-2) x n

  std::size_t n_cells() const noexcept { return static_cast<std::size_t>(d_scal.size()); }
  std::size_t n_reduced() const noexcept { return static_cast<std::size_t>(a_vec.rows()); }
};

struct QZetaSolution {
  Matrix q;
  Vector zeta;
  double q_residual = 0.0;     // relative residual of the q system
  double zeta_residual = 0.0;  // relative residual of the zeta system
};

/// Throws DegenerateClosure if some d <= 0 and SingularBlock if a linear
/// solve fails or misses the residual tolerance.
QZetaSolution solve_q_zeta(const QZetaProblem& problem);

/// Neumann problem -(d zeta_x + A.q_x - v - h)_x = 0, zero flux at the walls,
/// zero cell mean. Returns the relative solver residual through `residual`.
Vector solve_zeta(const QZetaProblem& problem, const Matrix& q, double* residual = nullptr);

struct MomentumProblem {
  double dt = 0.0;
  double dx = 0.0;
  double viscosity = 1.0;
  Vector varrho;
  Vector zeta;
  Vector f;
  Vector v_n;
};

/// Implicit Euler step of varrho v_t - eta v_xx + zeta_x = f with v = 0 at
/// the walls. Throws SingularBlock on failure.
Vector solve_momentum(const MomentumProblem& problem, double* residual = nullptr);

/// External data of a run. Empty functions mean zero.
struct Forcing {
  std::function<Vector(double x, double t)> body_force;  // b in R^N
  std::function<Vector(const Vector& rho)> reaction;     // r in {1, vbar}^perp
};

struct SolverSettings {
  double dt = 1e-3;
  double viscosity = 1.0;
  double picard_tol = 1e-9;
  std::size_t max_sweeps = 50;
  std::size_t divergence_window = 3;
  double cfl_max = 0.9;
  double guard_band = 1e-10;
};

/// Thermodynamic and transport data of one cell.
struct CellCoefficients {
  DensityMap map;
  StateJacobians jac;
  ReducedCoefficients red;
};

struct PicardReport {
  std::size_t n_iterations = 0;
  double final_increment = 0.0;
  std::vector<double> energies;  // E^1, E^2, ...
  bool converged = false;

  /// max_{k >= 2} E^k / E^{k-1}; 0 when fewer than two positive energies.
  double max_ratio() const;
};

struct AdvanceResult {
  DiscreteState state;
  PicardReport report;
  std::vector<CellCoefficients> coefficients;  // at the accepted state
};

/// Time stepper for the transformed system. Holds per-cell warm-start data,
/// so one instance serves one run.
class PicardSolver {
 public:
  PicardSolver(Thermodynamics thermo, ClosureModel closure, Grid1D grid, Forcing forcing,
               SolverSettings settings);

  const Thermodynamics& thermo() const noexcept { return thermo_; }
  const ClosureModel& closure() const noexcept { return closure_; }
  const Grid1D& grid() const noexcept { return grid_; }
  const SolverSettings& settings() const noexcept { return settings_; }
  const Forcing& forcing() const noexcept { return forcing_; }

  /// Evaluates coefficients at (varrho, q) cellwise.
  std::vector<CellCoefficients> evaluate(const Vector& varrho, const Matrix& q);

  /// Applies the Neumann correction to q, checks the state and computes the
  /// initial zeta from the elliptic problem.
  AdvanceResult initialize(DiscreteState state);

  /// One time step: iterates the map (q*, v*) -> (q, v) to a fixed point.
  AdvanceResult advance(const DiscreteState& state_n);

  /// The (q, zeta) problem at given coefficients; g includes forcing and
  /// reaction terms evaluated at time t.
  QZetaProblem build_q_zeta(const std::vector<CellCoefficients>& coeffs, const Vector& varrho,
                            const Matrix& q_star, const Vector& v_star, const Matrix& q_n,
                            double t) const;
  Vector momentum_rhs(const std::vector<CellCoefficients>& coeffs, const Vector& varrho,
                      const Matrix& q_star, const Vector& v_star, double t) const;

 private:
  Thermodynamics thermo_;
  ClosureModel closure_;
  Grid1D grid_;
  Forcing forcing_;
  SolverSettings settings_;
  std::vector<EvaluationHint> hints_;
};

/// Discrete derivative helpers shared with diagnostics.
/// Cell-centered gradient with mirror (Neumann) ghosts.
Vector gradient_neumann(const Vector& u, double dx);
/// Cell-centered gradient from face averages with u = 0 at the walls.
Vector gradient_dirichlet(const Vector& u, double dx);
/// Interior face differences (u_{i+1} - u_i)/dx, size n-1.
Vector face_differences(const Vector& u, double dx);

}  // namespace isomix
