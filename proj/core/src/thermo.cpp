#include "isomix/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

constexpr double kMoleFractionFloor = 1e-14;
constexpr double kNewtonTarget = 1e-12;
constexpr double kNewtonAccept = 1e-10;
constexpr int kNewtonMaxIter = 100;
constexpr double kMTarget = 1e-13;
constexpr double kMAccept = 1e-10;
constexpr double kMStep = 1e-14;
constexpr int kMMaxIter = 200;
constexpr double kConstraintTol = 1e-8;

void check_densities(const MixtureSpec& spec, const Vector& rho) {
  if (static_cast<std::size_t>(rho.size()) != spec.n_species()) {
    throw Error(ErrorKind::NonpositiveDensity, "density vector has the wrong number of species");
  }
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      std::ostringstream os;
      os << "rho[" << i << "] = " << rho[i] << " is not positive";
      throw Error(ErrorKind::NonpositiveDensity, os.str());
    }
  }
  const Vector n = rho.cwiseQuotient(spec.molar_mass);
  const double y_min = n.minCoeff() / n.sum();
  if (y_min < kMoleFractionFloor) {
    std::ostringstream os;
    os << "minimal mole fraction " << y_min << " is below the floor " << kMoleFractionFloor;
    throw Error(ErrorKind::NonpositiveDensity, os.str());
  }
}

}  // namespace

MixtureSpec MixtureSpec::ideal(const Vector& vbar) {
  MixtureSpec s;
  s.vbar = vbar;
  s.molar_mass = Vector::Ones(vbar.size());
  s.mu_ref = Vector::Zero(vbar.size());
  s.theta_kb = 1.0;
  return s;
}

void MixtureSpec::validate() const {
  const auto n = vbar.size();
  if (molar_mass.size() != n || mu_ref.size() != n) {
    throw Error(ErrorKind::ValidationError, "molar_mass, vbar and mu_ref must have equal length");
  }
  if ((molar_mass.array() <= 0.0).any() || !molar_mass.allFinite()) {
    throw Error(ErrorKind::ValidationError, "molar masses must be positive");
  }
  if (!(theta_kb > 0.0) || !std::isfinite(theta_kb)) {
    throw Error(ErrorKind::ValidationError, "theta_kb must be positive");
  }
  if (!mu_ref.allFinite()) throw Error(ErrorKind::ValidationError, "mu_ref must be finite");
  (void)Frame::build(vbar);  // vbar checks
}

IdealMixingEnergy::IdealMixingEnergy(const MixtureSpec& spec)
    : molar_mass_(spec.molar_mass), mu_ref_(spec.mu_ref), theta_kb_(spec.theta_kb) {}

double IdealMixingEnergy::value(const Vector& rho) const {
  const Vector n = rho.cwiseQuotient(molar_mass_);
  const double total = n.sum();
  double mixing = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) mixing += n[i] * std::log(n[i] / total);
  return mu_ref_.dot(rho) + theta_kb_ * mixing;
}

Vector IdealMixingEnergy::gradient(const Vector& rho) const {
  const Vector n = rho.cwiseQuotient(molar_mass_);
  const double total = n.sum();
  Vector g(n.size());
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    g[i] = mu_ref_[i] + theta_kb_ / molar_mass_[i] * std::log(n[i] / total);
  }
  return g;
}

Matrix IdealMixingEnergy::hessian(const Vector& rho) const {
  const auto size = rho.size();
  const double total = rho.cwiseQuotient(molar_mass_).sum();
  Matrix h(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      h(i, j) = -theta_kb_ / (molar_mass_[i] * molar_mass_[j] * total);
    }
    h(i, i) += theta_kb_ / (molar_mass_[i] * rho[i]);
  }
  return h;
}

double free_energy_k(const MixtureSpec& spec, const Vector& rho) {
  check_densities(spec, rho);
  return IdealMixingEnergy(spec).value(rho);
}

Vector grad_k(const MixtureSpec& spec, const Vector& rho) {
  check_densities(spec, rho);
  return IdealMixingEnergy(spec).gradient(rho);
}

Thermodynamics::Thermodynamics(MixtureSpec spec)
    : Thermodynamics(spec, std::make_shared<IdealMixingEnergy>(spec)) {}

Thermodynamics::Thermodynamics(MixtureSpec spec, std::shared_ptr<const FreeEnergy> energy)
    : spec_(std::move(spec)), energy_(std::move(energy)), frame_(Frame::build(spec_.vbar)) {
  spec_.validate();
  const auto n = spec_.vbar.size();
  Eigen::HouseholderQR<Matrix> qr(Matrix(spec_.vbar));
  const Matrix q_full = qr.householderQ() * Matrix::Identity(n, n);
  vbar_complement_ = q_full.rightCols(n - 1);
  varrho_min_ = spec_.varrho_min();
  varrho_max_ = spec_.varrho_max();
}

DualSolution Thermodynamics::dual_solve(const Vector& mu, const EvaluationHint* hint) const {
  const auto n = static_cast<Eigen::Index>(n_species());
  const Vector& vbar = spec_.vbar;
  if (mu.size() != n || !mu.allFinite()) {
    throw Error(ErrorKind::NewtonDivergence, "chemical potential must be a finite N-vector");
  }

  // Newton in u = ln rho keeps every iterate positive; components that end
  // up many decades below the others are reached in a few steps.
  Vector rho(n);
  double p = 0.0;
  if (hint != nullptr && hint->rho.size() == n && (hint->rho.array() > 0.0).all() &&
      hint->rho.allFinite() && std::isfinite(hint->p)) {
    rho = hint->rho / hint->rho.dot(vbar);
    p = hint->p;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) rho[i] = 1.0 / (static_cast<double>(n) * vbar[i]);
    p = vbar.dot(mu - energy_->gradient(rho)) / vbar.squaredNorm();
  }
  Vector u = rho.array().log();

  auto residual_of = [&](const Vector& r, double pp, Vector& out) {
    out.resize(n + 1);
    out.head(n) = energy_->gradient(r) + pp * vbar - mu;
    out[n] = r.dot(vbar) - 1.0;
  };

  const double target = kNewtonTarget * (1.0 + mu.lpNorm<Eigen::Infinity>());
  Vector res;
  residual_of(rho, p, res);
  double res_norm = res.lpNorm<Eigen::Infinity>();
  double merit = res.squaredNorm();
  int iter = 0;
  Matrix jac(n + 1, n + 1);
  Vector trial_u(n), trial_rho(n), trial_res;
  // One extra step after reaching the target costs little and takes the
  // residual to round-off, which keeps ill-conditioned inverses accurate.
  bool polished = false;
  for (; iter < kNewtonMaxIter; ++iter) {
    if (res_norm <= target) {
      if (polished) break;
      polished = true;
    }
    jac.setZero();
    jac.topLeftCorner(n, n) = energy_->hessian(rho) * rho.asDiagonal();
    jac.block(0, n, n, 1) = vbar;
    jac.block(n, 0, 1, n) = vbar.cwiseProduct(rho).transpose();
    const Vector step = jac.fullPivLu().solve(-res);
    if (!step.allFinite()) break;

    // Armijo backtracking on |F|^2.
    double t = 1.0;
    bool accepted = false;
    double trial_merit = merit;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      trial_u = u + t * step.head(n);
      trial_rho = trial_u.array().exp();
      if (!trial_rho.allFinite() || !(trial_rho.array() > 0.0).all()) continue;
      residual_of(trial_rho, p + t * step[n], trial_res);
      trial_merit = trial_res.squaredNorm();
      if (trial_merit <= (1.0 - 1e-4 * t) * merit) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    u = trial_u;
    rho = trial_rho;
    p += t * step[n];
    res = trial_res;
    merit = trial_merit;
    res_norm = res.lpNorm<Eigen::Infinity>();
  }

  if (!(res_norm <= std::max(target, kNewtonAccept))) {
    std::ostringstream os;
    os << "dual solve stalled at residual " << res_norm << " after " << iter << " iterations";
    throw Error(ErrorKind::NewtonDivergence, os.str());
  }
  DualSolution out;
  out.p = p;
  out.rho = std::move(rho);
  out.iterations = iter;
  out.residual = res_norm;
  return out;
}

Matrix Thermodynamics::hessian_at_density(const Vector& rho) const {
  const Matrix& q = vbar_complement_;
  const Matrix reduced = q.transpose() * energy_->hessian(rho) * q;
  const Matrix h = q * reduced.ldlt().solve(q.transpose());
  return 0.5 * (h + h.transpose());
}

Matrix Thermodynamics::hessian_f(const Vector& mu) const {
  return hessian_at_density(dual_solve(mu).rho);
}

void Thermodynamics::require_interior(double varrho) const {
  if (!(varrho > varrho_min_ && varrho < varrho_max_)) {
    std::ostringstream os;
    os.precision(17);
    os << "total density " << varrho << " is outside (" << varrho_min_ << ", " << varrho_max_ << ")";
    throw Error(ErrorKind::ThresholdViolation, os.str());
  }
}

Thermodynamics::MSolve Thermodynamics::solve_m(double varrho, const Vector& q,
                                                const EvaluationHint* hint) const {
  require_interior(varrho);
  if (static_cast<std::size_t>(q.size()) != n_reduced()) {
    throw Error(ErrorKind::ThresholdViolation, "reduced potential q has the wrong dimension");
  }
  const Vector base = frame_.pi() * q;
  Vector mu(base.size());

  EvaluationHint warm;
  bool have_warm = false;
  if (hint != nullptr && hint->rho.size() == base.size()) {
    warm = *hint;
    have_warm = true;
  }

  // F(m) = varrho - 1.grad f(base + m 1) is strictly decreasing in m.
  auto evaluate = [&](double m, DualSolution& dual) {
    mu = base.array() + m;
    dual = dual_solve(mu, have_warm ? &warm : nullptr);
    warm.rho = dual.rho;
    warm.p = dual.p;
    have_warm = true;
    return varrho - dual.rho.sum();
  };

  double m = hint != nullptr ? hint->m_one : 0.0;
  DualSolution dual;
  double value = evaluate(m, dual);
  // Small F alone is not enough where 1.D^2f 1 is tiny: also ask for a
  // Newton correction at round-off level.
  auto converged = [](double v, double slope, double at) {
    return std::abs(v) <= kMTarget && std::abs(v) <= kMStep * std::abs(slope) * std::max(1.0, std::abs(at));
  };
  const double slope0 = -hessian_at_density(dual.rho).sum();
  if (value == 0.0 || converged(value, slope0, m)) return {m, dual};

  // Bracket the root.
  double lo = m;
  double hi = m;
  double f_lo = value;
  double f_hi = value;
  // Initial span from the local Newton step, doubled until the root is enclosed.
  double span = slope0 < 0.0 ? 2.0 * std::abs(value / slope0) : 0.5;
  span = std::clamp(span, 1e-12 * std::max(1.0, std::abs(m)), 0.5);
  DualSolution best = dual;
  double best_m = m;
  double best_value = value;
  for (int k = 0; k < 200; ++k) {
    if (f_lo > 0.0 && f_hi > 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi += span;
      f_hi = evaluate(hi, dual);
      if (std::abs(f_hi) < std::abs(best_value)) { best = dual; best_m = hi; best_value = f_hi; }
    } else if (f_lo < 0.0 && f_hi < 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo -= span;
      f_lo = evaluate(lo, dual);
      if (std::abs(f_lo) < std::abs(best_value)) { best = dual; best_m = lo; best_value = f_lo; }
    } else {
      break;
    }
    span *= 2.0;
  }
  if (!(f_lo >= 0.0 && f_hi <= 0.0)) {
    throw Error(ErrorKind::NewtonDivergence, "could not bracket the implicit 1-coordinate");
  }

  // Safeguarded Newton inside [lo, hi]; the derivative is -1.D^2f 1.
  m = best_m;
  value = best_value;
  dual = best;
  for (int iter = 0; iter < kMMaxIter && value != 0.0; ++iter) {
    const double slope = -hessian_at_density(dual.rho).sum();
    if (converged(value, slope, m)) break;
    double next = (slope < 0.0) ? m - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double next_value = evaluate(next, dual);
    if (next_value > 0.0) {
      lo = next;
    } else {
      hi = next;
    }
    m = next;
    value = next_value;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(m))) break;
  }
  if (!(std::abs(value) <= kMAccept)) {
    std::ostringstream os;
    os << "implicit 1-coordinate did not converge, residual " << value;
    throw Error(ErrorKind::NewtonDivergence, os.str());
  }
  return {m, dual};
}

double Thermodynamics::implicit_m(double varrho, const Vector& q, const EvaluationHint* hint) const {
  return solve_m(varrho, q, hint).m_one;
}

DensityMap Thermodynamics::map_r(double varrho, const Vector& q, const EvaluationHint* hint) const {
  MSolve s = solve_m(varrho, q, hint);
  DensityMap out;
  out.m_one = s.m_one;
  out.reduced = frame_.pi().transpose() * s.dual.rho;
  out.pressure = s.dual.p;
  out.rho = std::move(s.dual.rho);
  return out;
}

double Thermodynamics::pressure_p(double varrho, const Vector& q) const {
  return solve_m(varrho, q, nullptr).dual.p;
}

StateJacobians Thermodynamics::state_jacobians(const DensityMap& map) const {
  const Matrix h = hessian_at_density(map.rho);
  const Matrix& pi = frame_.pi();
  const Vector s = h.rowwise().sum();  // D^2 f 1
  const double c = s.sum();            // 1 . D^2 f 1
  const Vector pi_s = pi.transpose() * s;
  const double varrho = map.rho.sum();

  StateJacobians j;
  j.ones_hessian_ones = c;
  j.R_q = pi.transpose() * h * pi - pi_s * pi_s.transpose() / c;
  j.R_q = 0.5 * (j.R_q + j.R_q.transpose());
  j.rho_varrho = s / c;
  j.R_varrho = pi_s / c;
  j.P_q = map.reduced - varrho * pi_s / c;
  j.P_varrho = varrho / c;
  return j;
}

StateJacobians Thermodynamics::state_jacobians(double varrho, const Vector& q) const {
  return state_jacobians(map_r(varrho, q));
}

ChemicalState Thermodynamics::to_physical(const ReducedCoords& coords) const {
  MSolve s = solve_m(coords.varrho, coords.q, nullptr);
  ChemicalState out;
  out.mu = frame_.compose(coords.q, coords.zeta, s.m_one);
  out.p = s.dual.p + coords.zeta;
  out.rho = std::move(s.dual.rho);
  return out;
}

ReducedCoords Thermodynamics::from_physical(const ChemicalState& state) const {
  const auto n = static_cast<Eigen::Index>(n_species());
  if (state.rho.size() != n || state.mu.size() != n) {
    throw Error(ErrorKind::ConstraintViolation, "state vectors have the wrong number of species");
  }
  if (!(state.rho.array() > 0.0).all()) {
    throw Error(ErrorKind::ConstraintViolation, "densities must be positive");
  }
  const double volume = state.rho.dot(spec_.vbar);
  if (std::abs(volume - 1.0) > kConstraintTol) {
    std::ostringstream os;
    os << "volume constraint violated: rho.vbar - 1 = " << volume - 1.0;
    throw Error(ErrorKind::ConstraintViolation, os.str());
  }
  ReducedCoords c;
  c.varrho = state.rho.sum();
  require_interior(c.varrho);
  const auto d = frame_.decompose(state.mu);
  c.q = d.q_part;
  c.zeta = d.vbar_part;
  return c;
}

}  // namespace isomix
