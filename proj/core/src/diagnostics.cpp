#include "isomix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

using RowMatrix = Matrix;  // components x cells

RowMatrix as_rows(const Vector& v) { return v.transpose(); }

double power_sum(const RowMatrix& u, double dx, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) s += std::pow(u.col(i).norm(), p);
  return s * dx;
}

RowMatrix first_differences(const RowMatrix& u, double dx) {
  const auto n = u.cols();
  if (n < 2) return RowMatrix(u.rows(), 0);
  return (u.rightCols(n - 1) - u.leftCols(n - 1)) / dx;
}

RowMatrix second_differences(const RowMatrix& u, double dx) {
  const auto n = u.cols();
  if (n < 3) return RowMatrix(u.rows(), 0);
  return (u.rightCols(n - 2) - 2.0 * u.middleCols(1, n - 2) + u.leftCols(n - 2)) / (dx * dx);
}

double max_pointwise(const RowMatrix& u) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) m = std::max(m, u.col(i).norm());
  return m;
}

// max_{i<j} |u_i - u_j| / ((j - i) h)^alpha
double holder_space(const RowMatrix& u, double h, double alpha) {
  double s = 0.0;
  if (u.rows() == 0) return 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    for (Eigen::Index j = i + 1; j < u.cols(); ++j)
      s = std::max(s, (u.col(i) - u.col(j)).norm() / std::pow(static_cast<double>(j - i) * h, alpha));
  return s;
}

// max over cells of |u(t_new) - u(t_old)| / |dt|^beta
double holder_time_pair(const RowMatrix& a, const RowMatrix& b, double dt, double beta) {
  if (a.rows() == 0 || !(dt > 0.0)) return 0.0;
  return max_pointwise(a - b) / std::pow(dt, beta);
}

std::vector<double> trapezoid_weights(const History& h) {
  const std::size_t k = h.snapshots.size();
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    const double dt = h.snapshots[i].time - h.snapshots[i - 1].time;
    w[i - 1] += 0.5 * dt;
    w[i] += 0.5 * dt;
  }
  return w;
}

template <class Get>
FieldNorms field_norms(const History& h, double p, Get get) {
  FieldNorms out;
  const auto w = trapezoid_weights(h);
  const double dx = h.dx;
  double lp = 0.0, lp_dx = 0.0, lp_dxx = 0.0, lp_dt = 0.0;
  for (std::size_t k = 0; k < h.snapshots.size(); ++k) {
    const RowMatrix u = get(h.snapshots[k]);
    const double s = power_sum(u, dx, p);
    lp += w[k] * s;
    lp_dx += w[k] * power_sum(first_differences(u, dx), dx, p);
    lp_dxx += w[k] * power_sum(second_differences(u, dx), dx, p);
    out.sup_lp = std::max(out.sup_lp, std::pow(s, 1.0 / p));
    if (k > 0) {
      const double dt = h.snapshots[k].time - h.snapshots[k - 1].time;
      if (dt > 0.0) lp_dt += dt * power_sum((u - get(h.snapshots[k - 1])) / dt, dx, p);
    }
  }
  out.lp = std::pow(lp, 1.0 / p);
  out.lp_dx = std::pow(lp_dx, 1.0 / p);
  out.lp_dxx = std::pow(lp_dxx, 1.0 / p);
  out.lp_dt = std::pow(lp_dt, 1.0 / p);
  return out;
}

}  // namespace

ThresholdValues threshold_monitor(const Vector& varrho, double varrho_min, double varrho_max) {
  ThresholdTracker t(varrho_min, varrho_max);
  return t.update(varrho);
}

ThresholdTracker::ThresholdTracker(double varrho_min, double varrho_max)
    : varrho_min_(varrho_min),
      varrho_max_(varrho_max),
      lower_inf_(std::numeric_limits<double>::infinity()),
      upper_inf_(std::numeric_limits<double>::infinity()) {}

ThresholdValues ThresholdTracker::update(const Vector& varrho) {
  if (varrho.size() == 0) throw Error(ErrorKind::ValidationError, "empty density field");
  Eigen::Index worst = 0;
  double worst_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < varrho.size(); ++i) {
    const double lo = varrho[i] / varrho_min_ - 1.0;
    const double hi = 1.0 - varrho[i] / varrho_max_;
    lower_inf_ = std::min(lower_inf_, lo);
    upper_inf_ = std::min(upper_inf_, hi);
    if (std::min(lo, hi) < worst_value) {
      worst_value = std::min(lo, hi);
      worst = i;
    }
  }
  const ThresholdValues v = current();
  if (!(v.m > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "total density " << varrho[worst] << " at cell " << worst << " is not inside ("
       << varrho_min_ << ", " << varrho_max_ << ")";
    const bool low = varrho[worst] / varrho_min_ - 1.0 <= 1.0 - varrho[worst] / varrho_max_;
    throw ThresholdBreachError(static_cast<std::size_t>(worst), varrho[worst],
                               low ? ThresholdBreachError::Side::Lower
                                   : ThresholdBreachError::Side::Upper,
                               os.str());
  }
  return v;
}

ThresholdValues ThresholdTracker::current() const {
  ThresholdValues v;
  v.m = std::min(lower_inf_, upper_inf_);
  v.M = std::max(1.0 / lower_inf_, 1.0 / upper_inf_);
  return v;
}

StateNorms state_norms(const History& history, double p) {
  StateNorms n;
  n.varrho = field_norms(history, p, [](const Snapshot& s) { return as_rows(s.varrho); });
  n.q = field_norms(history, p, [](const Snapshot& s) { return RowMatrix(s.q); });
  n.zeta = field_norms(history, p, [](const Snapshot& s) { return as_rows(s.zeta); });
  n.v = field_norms(history, p, [](const Snapshot& s) { return as_rows(s.v); });
  return n;
}

double extension_exponent(double p) {
  if (!(p > 3.0)) throw Error(ErrorKind::ValidationError, "norm exponent p must exceed 3");
  if (p < 5.0) return 3.0 / (p - 2.0);
  if (p == 5.0) return 1.01;
  return 1.0;
}

ExtensionValues extension_criteria(const History& history, double p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::ValidationError, "Holder exponent must lie in (0, 1]");
  }
  const double z = extension_exponent(p);
  const double dx = history.dx;
  const auto& snaps = history.snapshots;
  const auto w = trapezoid_weights(history);

  double q_sup = 0.0, q_space = 0.0, q_time = 0.0;
  double grad_q = 0.0, v_zp = 0.0, v_x_holder = 0.0;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const RowMatrix q = snaps[k].q;
    q_sup = std::max(q_sup, max_pointwise(q));
    q_space = std::max(q_space, holder_space(q, dx, alpha));
    for (std::size_t l = 0; l < k; ++l) {
      q_time = std::max(q_time, holder_time_pair(q, snaps[l].q, snaps[k].time - snaps[l].time,
                                                 0.5 * alpha));
    }
    grad_q += w[k] * std::pow(max_pointwise(first_differences(q, dx)), p);
    const RowMatrix v = as_rows(snaps[k].v);
    v_zp += w[k] * std::pow(power_sum(v, dx, z * p), 1.0 / z);
    v_x_holder += w[k] * holder_space(first_differences(v, dx), dx, alpha);
  }
  ExtensionValues out;
  out.N = q_sup + q_space + q_time + std::pow(grad_q, 1.0 / p) + std::pow(v_zp, 1.0 / p) +
          v_x_holder;
  const StateNorms norms = state_norms(history, p);
  out.K = norms.q.w21() + norms.zeta.w20() + norms.v.w21();
  return out;
}

ExtensionAccumulator::ExtensionAccumulator(double dx, double p, double alpha)
    : dx_(dx), p_(p), alpha_(alpha), z_(extension_exponent(p)) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::ValidationError, "Holder exponent must lie in (0, 1]");
  }
}

void ExtensionAccumulator::accumulate(Integral& acc, double value, double dt) const {
  if (count_ > 0) acc.trapezoid += 0.5 * dt * (acc.last + value);
  acc.last = value;
}

ExtensionValues ExtensionAccumulator::add(const Snapshot& snap) {
  const double dt = count_ > 0 ? snap.time - last_time_ : 0.0;
  const RowMatrix q = snap.q;
  const RowMatrix v = as_rows(snap.v);
  const RowMatrix zeta = as_rows(snap.zeta);

  q_sup_ = std::max(q_sup_, max_pointwise(q));
  q_space_holder_ = std::max(q_space_holder_, holder_space(q, dx_, alpha_));
  for (std::size_t l = 0; l < q_history_.size(); ++l) {
    q_time_holder_ = std::max(
        q_time_holder_, holder_time_pair(q, q_history_[l], snap.time - times_[l], 0.5 * alpha_));
  }
  if (q.rows() > 0) {
    q_history_.push_back(q);
    times_.push_back(snap.time);
  }

  accumulate(grad_q_inf_, std::pow(max_pointwise(first_differences(q, dx_)), p_), dt);
  accumulate(v_zp_, std::pow(power_sum(v, dx_, z_ * p_), 1.0 / z_), dt);
  accumulate(v_x_holder_, holder_space(first_differences(v, dx_), dx_, alpha_), dt);

  const RowMatrix* fields[3] = {&q, &zeta, &v};
  const RowMatrix prev[3] = {count_ > 0 ? RowMatrix(last_.q) : RowMatrix(),
                             count_ > 0 ? as_rows(last_.zeta) : RowMatrix(),
                             count_ > 0 ? as_rows(last_.v) : RowMatrix()};
  for (int f = 0; f < 3; ++f) {
    const RowMatrix& u = *fields[f];
    accumulate(w_[f][0], power_sum(u, dx_, p_), dt);
    accumulate(w_[f][1], power_sum(first_differences(u, dx_), dx_, p_), dt);
    accumulate(w_[f][2], power_sum(second_differences(u, dx_), dx_, p_), dt);
    if (count_ > 0 && dt > 0.0) w_dt_[f] += dt * power_sum((u - prev[f]) / dt, dx_, p_);
  }
  last_ = snap;
  last_time_ = snap.time;
  ++count_;
  return current();
}

ExtensionValues ExtensionAccumulator::current() const {
  ExtensionValues out;
  const double inv = 1.0 / p_;
  out.N = q_sup_ + q_space_holder_ + q_time_holder_ + std::pow(grad_q_inf_.trapezoid, inv) +
          std::pow(v_zp_.trapezoid, inv) + v_x_holder_.trapezoid;
  for (int f = 0; f < 3; ++f) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += std::pow(w_[f][c].trapezoid, inv);
    if (f != 1) s += std::pow(w_dt_[f], inv);  // zeta has no time derivative term
    out.K += s;
  }
  return out;
}

ConstraintResiduals constraint_residuals(const DiscreteState& state, const Thermodynamics& thermo,
                                         const ClosureModel& closure, double dx,
                                         const Forcing& forcing) {
  const auto n = static_cast<Eigen::Index>(state.n_cells());
  const auto nq = state.q.rows();
  const Frame& frame = thermo.frame();
  ConstraintResiduals r;
  Vector d(n);
  Matrix a(nq, n);
  Vector h = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DensityMap map = thermo.map_r(state.varrho[i], state.q.col(i));
    r.volume = std::max(r.volume, std::abs(map.rho.dot(frame.vbar()) - 1.0));
    r.mass = std::max(r.mass, std::abs(map.rho.sum() - state.varrho[i]));
    const ReducedCoefficients c = reduce_matrix(frame, closure.onsager(map.rho));
    d[i] = c.d_scal;
    a.col(i) = c.a_vec;
    if (forcing.body_force) {
      const double x = (static_cast<double>(i) + 0.5) * dx;
      const auto parts = frame.decompose(forcing.body_force(x, state.time));
      h[i] = c.d_scal * parts.vbar_part + c.a_vec.dot(parts.q_part);
    }
  }
  r.zeta_mean = std::abs(state.zeta.mean());

  // Face flux d zeta_x + A.q_x - v - h; walls carry zero flux.
  Vector flux = Vector::Zero(n + 1);
  double scale = 0.0;
  for (Eigen::Index f = 1; f < n; ++f) {
    const double df = 0.5 * (d[f - 1] + d[f]);
    const double t1 = df * (state.zeta[f] - state.zeta[f - 1]) / dx;
    double t2 = 0.0;
    if (nq > 0) {
      t2 = (0.5 * (a.col(f - 1) + a.col(f))).dot(state.q.col(f) - state.q.col(f - 1)) / dx;
    }
    const double t3 = 0.5 * (state.v[f - 1] + state.v[f]);
    const double t4 = 0.5 * (h[f - 1] + h[f]);
    flux[f] = t1 + t2 - t3 - t4;
    scale = std::max(scale, std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4));
  }
  scale = std::max(scale, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.isochoric = std::max(r.isochoric, std::abs(flux[i + 1] - flux[i]) / scale);
  }
  return r;
}

double total_free_energy(const DiscreteState& state, const std::vector<CellCoefficients>& coeffs,
                         const FreeEnergy& energy, double dx) {
  double e = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    e += energy.value(coeffs[i].map.rho) + 0.5 * state.varrho[ii] * state.v[ii] * state.v[ii];
  }
  return e * dx;
}

}  // namespace isomix
