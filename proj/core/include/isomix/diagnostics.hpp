#pragma once

#include <cstddef>
#include <vector>

#include "isomix/closure.hpp"
#include "isomix/grid.hpp"
#include "isomix/solver.hpp"

namespace isomix {

struct ThresholdValues {
  double m = 0.0;  // min over cells of min{varrho/varrho_min - 1, 1 - varrho/varrho_max}
  double M = 0.0;  // max of the reciprocals of the two branch infima
};

/// Throws ThresholdBreachError if m <= 0.
ThresholdValues threshold_monitor(const Vector& varrho, double varrho_min, double varrho_max);

/// Running version over a time interval: infima and suprema only ever tighten.
class ThresholdTracker {
 public:
  ThresholdTracker(double varrho_min, double varrho_max);
  ThresholdValues update(const Vector& varrho);
  ThresholdValues current() const;

 private:
  double varrho_min_;
  double varrho_max_;
  double lower_inf_;
  double upper_inf_;
};

/// Field history sampled at increasing times on a uniform grid.
struct Snapshot {
  double time = 0.0;
  Vector varrho;
  Matrix q;  // (N-2) x n
  Vector zeta;
  Vector v;
};

struct History {
  double dx = 0.0;
  std::vector<Snapshot> snapshots;
};

/// Discrete surrogates for one field u (pointwise Euclidean norm for vector
/// fields). With trapezoid weights w_k in time and cell weight dx in space:
///   lp        = (sum_k w_k sum_i |u_ik|^p dx)^(1/p)
///   lp_dx     = same for face differences (u_{i+1} - u_i)/dx
///   lp_dxx    = same for interior second differences
///   lp_dt     = (sum_k dt_k sum_i |(u_ik - u_i,k-1)/dt_k|^p dx)^(1/p)
///   sup_lp    = max_k (sum_i |u_ik|^p dx)^(1/p)
struct FieldNorms {
  double lp = 0.0;
  double lp_dx = 0.0;
  double lp_dxx = 0.0;
  double lp_dt = 0.0;
  double sup_lp = 0.0;

  double w21() const { return lp + lp_dx + lp_dxx + lp_dt; }
  double w20() const { return lp + lp_dx + lp_dxx; }
};

struct StateNorms {
  FieldNorms varrho;
  FieldNorms q;
  FieldNorms zeta;
  FieldNorms v;
};

StateNorms state_norms(const History& history, double p);

/// z(p) = 3/(p-2) for 3 < p < 5, 1.01 at p = 5, 1 for p > 5.
double extension_exponent(double p);

struct ExtensionValues {
  double N = 0.0;
  double K = 0.0;
};

/// N = |q|_C^{alpha,alpha/2} + |q_x|_{L^{inf,p}} + |v|_{L^{zp,p}} + int [v_x]_{C^alpha} dt,
/// K = W^{2,1}_p(q) + W^{2,0}_p(zeta) + W^{2,1}_p(v), with the surrogates of
/// state_norms. L^{a,b} takes the a-norm in space and the b-norm in time.
ExtensionValues extension_criteria(const History& history, double p, double alpha);

/// Same quantities, updated one snapshot at a time in O(K n) per update.
class ExtensionAccumulator {
 public:
  ExtensionAccumulator(double dx, double p, double alpha);
  ExtensionValues add(const Snapshot& snap);
  ExtensionValues current() const;

 private:
  struct Integral {
    double trapezoid = 0.0;  // sum_k w_k X_k
    double last = 0.0;
  };
  void accumulate(Integral& acc, double value, double dt) const;

  double dx_;
  double p_;
  double alpha_;
  double z_;
  std::size_t count_ = 0;
  double last_time_ = 0.0;
  std::vector<Matrix> q_history_;
  std::vector<double> times_;
  Snapshot last_;
  // |q| sup, space and time Holder seminorm parts
  double q_sup_ = 0.0;
  double q_space_holder_ = 0.0;
  double q_time_holder_ = 0.0;
  Integral grad_q_inf_;   // (max |q_x|)^p
  Integral v_zp_;         // |v|_{zp}^p
  Integral v_x_holder_;   // [v_x]_{C^alpha}
  // W-type surrogates for q, zeta, v: p-th powers
  Integral w_[3][3];      // [field][lp, lp_dx, lp_dxx]
  double w_dt_[3] = {0.0, 0.0, 0.0};
};

struct ConstraintResiduals {
  double volume = 0.0;     // max |R.vbar - 1|
  double mass = 0.0;       // max |sum R - varrho|
  double zeta_mean = 0.0;  // |cell mean of zeta|
  double isochoric = 0.0;  // relative residual of the discrete volume balance
};

/// Recomputes densities and closure data from (varrho, q) and evaluates the
/// residuals. `body_force` may be empty; t is the time it is evaluated at.
ConstraintResiduals constraint_residuals(const DiscreteState& state, const Thermodynamics& thermo,
                                         const ClosureModel& closure, double dx,
                                         const Forcing& forcing = {});

/// Discrete energy sum_i (k(rho_i) + varrho_i v_i^2 / 2) dx.
double total_free_energy(const DiscreteState& state, const std::vector<CellCoefficients>& coeffs,
                         const FreeEnergy& energy, double dx);

}  // namespace isomix
