#include "isomix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

constexpr double kLinearTol = 1e-11;

// Normwise backward error of a computed solution.
double backward_error(double residual_norm, double matrix_norm, double x_norm, double b_norm) {
  const double scale = matrix_norm * x_norm + b_norm;
  return scale > 0.0 ? residual_norm / scale : residual_norm;
}

struct Tridiagonal {
  std::vector<double> sub, diag, sup;

  explicit Tridiagonal(std::size_t n) : sub(n, 0.0), diag(n, 0.0), sup(n, 0.0) {}

  std::vector<double> apply(const std::vector<double>& x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = diag[i] * x[i];
      if (i > 0) y[i] += sub[i] * x[i - 1];
      if (i + 1 < n) y[i] += sup[i] * x[i + 1];
    }
    return y;
  }

  double inf_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i)
      m = std::max(m, std::abs(sub[i]) + std::abs(diag[i]) + std::abs(sup[i]));
    return m;
  }

  std::vector<double> solve(std::vector<double> rhs) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    double denom = diag[0];
    if (denom == 0.0) throw Error(ErrorKind::SingularBlock, "zero pivot in tridiagonal solve");
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - sub[i] * c[i - 1];
      if (denom == 0.0 || !std::isfinite(denom)) {
        throw Error(ErrorKind::SingularBlock, "zero pivot in tridiagonal solve");
      }
      c[i] = sup[i] / denom;
      d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
  }
};

double checked_residual(const Tridiagonal& t, const std::vector<double>& x,
                        const std::vector<double>& b, const char* what) {
  const auto ax = t.apply(x);
  double r = 0.0, xn = 0.0, bn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorKind::SingularBlock, std::string(what) + " produced a non-finite value");
    }
    r = std::max(r, std::abs(ax[i] - b[i]));
    xn = std::max(xn, std::abs(x[i]));
    bn = std::max(bn, std::abs(b[i]));
  }
  const double eta = backward_error(r, t.inf_norm(), xn, bn);
  if (!(eta <= kLinearTol)) {
    std::ostringstream os;
    os << what << " residual " << eta << " exceeds " << kLinearTol;
    throw Error(ErrorKind::SingularBlock, os.str());
  }
  return eta;
}

void check_d(const Vector& d) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) {
      std::ostringstream os;
      os << "d = " << d[i] << " at cell " << i << " is not positive";
      throw Error(ErrorKind::DegenerateClosure, os.str());
    }
  }
}

double inf_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.lpNorm<Eigen::Infinity>(); }

}  // namespace

Vector gradient_neumann(const Vector& u, double dx) {
  const auto n = u.size();
  Vector g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : u[i];
    const double right = i + 1 < n ? u[i + 1] : u[i];
    g[i] = (right - left) / (2.0 * dx);
  }
  return g;
}

Vector gradient_dirichlet(const Vector& u, double dx) {
  const auto n = u.size();
  Vector g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : -u[i];
    const double right = i + 1 < n ? u[i + 1] : -u[i];
    g[i] = (right - left) / (2.0 * dx);
  }
  return g;
}

Vector face_differences(const Vector& u, double dx) {
  const auto n = u.size();
  if (n < 2) return Vector(0);
  return (u.tail(n - 1) - u.head(n - 1)) / dx;
}

Grid1D::Grid1D(std::size_t n_cells, double length) : n_cells_(n_cells), length_(length) {
  if (n_cells < 8) throw Error(ErrorKind::ValidationError, "grid needs at least 8 cells");
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::ValidationError, "domain length must be positive");
  }
  dx_ = length / static_cast<double>(n_cells);
}

Vector step_continuity(const Vector& varrho_n, const Vector& v_star, double dt, double dx,
                       const ThresholdGuard& guard, double cfl_max) {
  const auto n = varrho_n.size();
  const double vmax = v_star.size() ? v_star.lpNorm<Eigen::Infinity>() : 0.0;
  const double cfl = dt * vmax / dx;
  if (!(cfl <= cfl_max)) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds " << cfl_max;
    throw Error(ErrorKind::CflViolation, os.str());
  }
  // Interior face fluxes; wall fluxes vanish.
  Vector flux = Vector::Zero(n + 1);
  for (Eigen::Index f = 1; f < n; ++f) {
    const double vf = 0.5 * (v_star[f - 1] + v_star[f]);
    flux[f] = vf * (vf >= 0.0 ? varrho_n[f - 1] : varrho_n[f]);
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = varrho_n[i] - dt / dx * (flux[i + 1] - flux[i]);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = out[i];
    const bool low = !(r > guard.varrho_min + guard.band);
    const bool high = !(r < guard.varrho_max - guard.band);
    if (low || high) {
      std::ostringstream os;
      os.precision(17);
      os << "total density " << r << " at cell " << i << " entered the guard band of "
         << (low ? "varrho_min = " : "varrho_max = ") << (low ? guard.varrho_min : guard.varrho_max);
      throw ThresholdBreachError(static_cast<std::size_t>(i), r,
                                 low ? ThresholdBreachError::Side::Lower
                                     : ThresholdBreachError::Side::Upper,
                                 os.str());
    }
  }
  return out;
}

Vector solve_zeta(const QZetaProblem& pb, const Matrix& q, double* residual) {
  const std::size_t n = pb.n_cells();
  const std::size_t nq = pb.n_reduced();
  const double dx = pb.dx;
  check_d(pb.d_scal);

  // Face data on interior faces f = 1..n-1 between cells f-1 and f.
  std::vector<double> d_face(n + 1, 0.0), s_face(n + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) {
    const auto l = static_cast<Eigen::Index>(f - 1);
    const auto r = static_cast<Eigen::Index>(f);
    d_face[f] = 0.5 * (pb.d_scal[l] + pb.d_scal[r]);
    double s = 0.5 * (pb.v_star[l] + pb.v_star[r]) + 0.5 * (pb.h[l] + pb.h[r]);
    if (nq > 0) {
      const Vector a_f = 0.5 * (pb.a_vec.col(l) + pb.a_vec.col(r));
      s -= a_f.dot(q.col(r) - q.col(l)) / dx;
    }
    s_face[f] = s;
  }

  Tridiagonal t(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = d_face[i] + d_face[i + 1];
    if (i > 0) t.sub[i] = -d_face[i];
    if (i + 1 < n) t.sup[i] = -d_face[i + 1];
    b[i] = -dx * (s_face[i + 1] - s_face[i]);
  }
  // Rank-one regularization pins zeta_0; the mean is removed afterwards.
  Tridiagonal reg = t;
  const double pin = pb.d_scal.mean();
  reg.diag[0] += pin;
  std::vector<double> z = reg.solve(b);
  const double eta = checked_residual(t, z, b, "zeta solve");
  double mean = 0.0;
  for (double zi : z) mean += zi;
  mean /= static_cast<double>(n);
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = z[i] - mean;
  // Compensated second pass so the stored mean is at rounding level.
  out.array() -= out.mean();
  if (residual) *residual = eta;
  return out;
}

QZetaSolution solve_q_zeta(const QZetaProblem& pb) {
  const std::size_t n = pb.n_cells();
  const std::size_t nq = pb.n_reduced();
  const double dx = pb.dx;
  const double dt = pb.dt;
  check_d(pb.d_scal);

  QZetaSolution sol;
  sol.q = Matrix(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(n));
  if (nq > 0) {
    const auto m = static_cast<Eigen::Index>(nq);
    const auto size = static_cast<Eigen::Index>(n * nq);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * nq * nq * 3);
    Vector rhs(size);

    // Explicit face flux (A/d)(v* + h) and the implicit core K.
    std::vector<Matrix> k_face(n + 1);
    Matrix e_face = Matrix::Zero(m, static_cast<Eigen::Index>(n + 1));
    for (std::size_t f = 1; f < n; ++f) {
      const auto l = static_cast<Eigen::Index>(f - 1);
      const auto r = static_cast<Eigen::Index>(f);
      const Matrix mt = 0.5 * (pb.m_tilde[f - 1] + pb.m_tilde[f]);
      const Vector a = 0.5 * (pb.a_vec.col(l) + pb.a_vec.col(r));
      const double d = 0.5 * (pb.d_scal[l] + pb.d_scal[r]);
      k_face[f] = mt - a * a.transpose() / d;
      const double vh = 0.5 * (pb.v_star[l] + pb.v_star[r]) + 0.5 * (pb.h[l] + pb.h[r]);
      e_face.col(static_cast<Eigen::Index>(f)) = a * (vh / d);
    }

    auto add_block = [&](Eigen::Index bi, Eigen::Index bj, const Matrix& blk, double scale) {
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
          if (blk(a, b) != 0.0) trip.emplace_back(bi * m + a, bj * m + b, scale * blk(a, b));
    };
    const double inv_dx2 = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      add_block(ii, ii, pb.r_q[i], 1.0 / dt);
      if (i + 1 < n) {
        const Matrix& kf = k_face[i + 1];
        add_block(ii, ii, kf, inv_dx2);
        add_block(ii, ii + 1, kf, -inv_dx2);
        add_block(ii + 1, ii + 1, kf, inv_dx2);
        add_block(ii + 1, ii, kf, -inv_dx2);
      }
      rhs.segment(ii * m, m) = pb.g.col(ii) + pb.r_q[i] * pb.q_n.col(ii) / dt +
                               (e_face.col(ii + 1) - e_face.col(ii)) / dx;
    }
    Eigen::SparseMatrix<double> mat(size, size);
    mat.setFromTriplets(trip.begin(), trip.end());
    mat.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(mat);
    lu.factorize(mat);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularBlock, "q block factorization failed: " + lu.lastErrorMessage());
    }
    const Vector x = lu.solve(rhs);
    if (!x.allFinite()) throw Error(ErrorKind::SingularBlock, "q block solve produced non-finite values");
    double mat_norm = 0.0;
    for (Eigen::Index k = 0; k < mat.outerSize(); ++k) {
      // column sums of |A| bound the 1-norm; the matrix is symmetric in pattern
      double s = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat, k); it; ++it) s += std::abs(it.value());
      mat_norm = std::max(mat_norm, s);
    }
    const double res = (mat * x - rhs).lpNorm<Eigen::Infinity>();
    sol.q_residual = backward_error(res, mat_norm, x.lpNorm<Eigen::Infinity>(),
                                    rhs.lpNorm<Eigen::Infinity>());
    if (!(sol.q_residual <= kLinearTol)) {
      std::ostringstream os;
      os << "q block residual " << sol.q_residual << " exceeds " << kLinearTol;
      throw Error(ErrorKind::SingularBlock, os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
      sol.q.col(static_cast<Eigen::Index>(i)) = x.segment(static_cast<Eigen::Index>(i) * m, m);
    }
  }
  sol.zeta = solve_zeta(pb, sol.q, &sol.zeta_residual);
  return sol;
}

Vector solve_momentum(const MomentumProblem& pb, double* residual) {
  const auto n = static_cast<std::size_t>(pb.varrho.size());
  const double dx = pb.dx;
  const double nu = pb.viscosity / (dx * dx);
  const Vector zeta_x = gradient_neumann(pb.zeta, dx);
  Tridiagonal t(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    t.diag[i] = pb.varrho[ii] / pb.dt + 2.0 * nu;
    // Odd ghost cells put v = 0 on the wall faces.
    if (i == 0 || i + 1 == n) t.diag[i] += nu;
    if (i > 0) t.sub[i] = -nu;
    if (i + 1 < n) t.sup[i] = -nu;
    b[i] = pb.f[ii] + pb.varrho[ii] * pb.v_n[ii] / pb.dt - zeta_x[ii];
  }
  const std::vector<double> x = t.solve(b);
  const double eta = checked_residual(t, x, b, "momentum solve");
  if (residual) *residual = eta;
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(n));
}

double PicardReport::max_ratio() const {
  double r = 0.0;
  for (std::size_t k = 1; k < energies.size(); ++k) {
    if (energies[k - 1] > 0.0) r = std::max(r, energies[k] / energies[k - 1]);
  }
  return r;
}

PicardSolver::PicardSolver(Thermodynamics thermo, ClosureModel closure, Grid1D grid,
                           Forcing forcing, SolverSettings settings)
    : thermo_(std::move(thermo)),
      closure_(std::move(closure)),
      grid_(grid),
      forcing_(std::move(forcing)),
      settings_(settings) {
  closure_.validate(thermo_.n_species());
  if (!(settings_.dt > 0.0)) throw Error(ErrorKind::ValidationError, "dt must be positive");
  if (!(settings_.viscosity > 0.0)) throw Error(ErrorKind::ValidationError, "viscosity must be positive");
  if (!(settings_.picard_tol > 0.0)) throw Error(ErrorKind::ValidationError, "picard tol must be positive");
  if (settings_.max_sweeps < 1) throw Error(ErrorKind::ValidationError, "max_sweeps must be >= 1");
}

std::vector<CellCoefficients> PicardSolver::evaluate(const Vector& varrho, const Matrix& q) {
  const std::size_t n = static_cast<std::size_t>(varrho.size());
  if (hints_.size() != n) hints_.assign(n, EvaluationHint{});
  std::vector<CellCoefficients> out(n);
  const Frame& frame = thermo_.frame();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    EvaluationHint& hint = hints_[i];
    const Vector qi = q.col(ii);
    CellCoefficients& c = out[i];
    c.map = thermo_.map_r(varrho[ii], qi, hint.rho.size() ? &hint : nullptr);
    c.jac = thermo_.state_jacobians(c.map);
    c.red = reduce_matrix(frame, closure_.onsager(c.map.rho));
    hint.m_one = c.map.m_one;
    hint.rho = c.map.rho;
    hint.p = c.map.pressure;
  }
  return out;
}

QZetaProblem PicardSolver::build_q_zeta(const std::vector<CellCoefficients>& coeffs,
                                        const Vector& varrho, const Matrix& q_star,
                                        const Vector& v_star, const Matrix& q_n, double t) const {
  const std::size_t n = coeffs.size();
  const auto nq = static_cast<Eigen::Index>(thermo_.n_reduced());
  const double dx = grid_.dx();
  const Frame& frame = thermo_.frame();

  QZetaProblem pb;
  pb.dt = settings_.dt;
  pb.dx = dx;
  pb.r_q.resize(n);
  pb.m_tilde.resize(n);
  pb.a_vec.resize(nq, static_cast<Eigen::Index>(n));
  pb.d_scal.resize(static_cast<Eigen::Index>(n));
  pb.g = Matrix::Zero(nq, static_cast<Eigen::Index>(n));
  pb.h = Vector::Zero(static_cast<Eigen::Index>(n));
  pb.v_star = v_star;
  pb.q_n = q_n;

  Matrix b_flux = Matrix::Zero(nq, static_cast<Eigen::Index>(n));  // M~ b~ + A b^ per cell
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const CellCoefficients& c = coeffs[i];
    pb.r_q[i] = c.jac.R_q;
    pb.m_tilde[i] = c.red.m_tilde;
    pb.a_vec.col(ii) = c.red.a_vec;
    pb.d_scal[ii] = c.red.d_scal;
    if (forcing_.body_force) {
      const auto parts = frame.decompose(forcing_.body_force(grid_.center(i), t));
      pb.h[ii] = c.red.d_scal * parts.vbar_part + c.red.a_vec.dot(parts.q_part);
      b_flux.col(ii) = c.red.m_tilde * parts.q_part + c.red.a_vec * parts.vbar_part;
    }
  }
  if (nq == 0) return pb;

  const double inv2dx = 1.0 / (2.0 * dx);
  const Vector v_x = gradient_dirichlet(v_star, dx);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const CellCoefficients& c = coeffs[i];
    const Eigen::Index il = i > 0 ? ii - 1 : ii;
    const Eigen::Index ir = i + 1 < n ? ii + 1 : ii;
    const Vector q_x = (q_star.col(ir) - q_star.col(il)) * inv2dx;
    Vector g = (c.jac.R_varrho * varrho[ii] - c.map.reduced) * v_x[ii] -
               c.jac.R_q * q_x * v_star[ii];
    // Discrete divergence of the forcing flux, zero at the walls.
    const Vector right = i + 1 < n ? Vector(0.5 * (b_flux.col(ii) + b_flux.col(ii + 1)))
                                   : Vector(Vector::Zero(nq));
    const Vector left = i > 0 ? Vector(0.5 * (b_flux.col(ii - 1) + b_flux.col(ii)))
                              : Vector(Vector::Zero(nq));
    g -= (right - left) / dx;
    if (forcing_.reaction) g += frame.pi().transpose() * forcing_.reaction(c.map.rho);
    pb.g.col(ii) = g;
  }
  return pb;
}

Vector PicardSolver::momentum_rhs(const std::vector<CellCoefficients>& coeffs,
                                  const Vector& varrho, const Matrix& q_star, const Vector& v_star,
                                  double t) const {
  const std::size_t n = coeffs.size();
  const double dx = grid_.dx();
  const auto nq = q_star.rows();
  const Vector varrho_x = gradient_neumann(varrho, dx);
  const Vector v_x = gradient_dirichlet(v_star, dx);
  Vector f(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const CellCoefficients& c = coeffs[i];
    double fi = -c.jac.P_varrho * varrho_x[ii] - varrho[ii] * v_star[ii] * v_x[ii];
    if (nq > 0) {
      const Eigen::Index il = i > 0 ? ii - 1 : ii;
      const Eigen::Index ir = i + 1 < n ? ii + 1 : ii;
      const Vector q_x = (q_star.col(ir) - q_star.col(il)) / (2.0 * dx);
      fi -= c.jac.P_q.dot(q_x);
    }
    if (forcing_.body_force) {
      const auto parts = thermo_.frame().decompose(forcing_.body_force(grid_.center(i), t));
      fi += c.map.reduced.dot(parts.q_part) + parts.vbar_part + varrho[ii] * parts.ones_part;
    }
    f[ii] = fi;
  }
  return f;
}

AdvanceResult PicardSolver::initialize(DiscreteState state) {
  const std::size_t n = state.n_cells();
  if (n != grid_.n_cells()) throw Error(ErrorKind::ValidationError, "state and grid sizes differ");
  const auto nq = static_cast<Eigen::Index>(thermo_.n_reduced());
  if (state.q.rows() != nq || state.q.cols() != static_cast<Eigen::Index>(n)) {
    throw Error(ErrorKind::ValidationError, "q field has the wrong shape");
  }
  for (std::size_t i = 0; i < n; ++i) thermo_.require_interior(state.varrho[static_cast<Eigen::Index>(i)]);

  // Zero normal derivative at both walls from a one-sided quadratic fit.
  const auto last = static_cast<Eigen::Index>(n) - 1;
  for (Eigen::Index l = 0; l < nq; ++l) {
    state.q(l, 0) = state.q(l, 1) - 0.5 * (state.q(l, 2) - state.q(l, 1));
    state.q(l, last) = state.q(l, last - 1) - 0.5 * (state.q(l, last - 2) - state.q(l, last - 1));
  }

  AdvanceResult res;
  res.coefficients = evaluate(state.varrho, state.q);
  const QZetaProblem pb =
      build_q_zeta(res.coefficients, state.varrho, state.q, state.v, state.q, state.time);
  state.zeta = solve_zeta(pb, state.q);
  res.state = std::move(state);
  return res;
}

AdvanceResult PicardSolver::advance(const DiscreteState& sn) {
  const double dt = settings_.dt;
  const double dx = grid_.dx();
  const double t_new = sn.time + dt;
  const ThresholdGuard guard{thermo_.varrho_min(), thermo_.varrho_max(), settings_.guard_band};

  Matrix q_star = sn.q;
  Vector v_star = sn.v;
  Vector varrho_prev = sn.varrho;
  Vector zeta_prev = sn.zeta;

  AdvanceResult res;
  PicardReport& rep = res.report;
  std::size_t growing = 0;
  double last_increment = std::numeric_limits<double>::infinity();
  Vector varrho;
  QZetaSolution qz;
  Vector v;
  for (std::size_t sweep = 1; sweep <= settings_.max_sweeps; ++sweep) {
    varrho = step_continuity(sn.varrho, v_star, dt, dx, guard, settings_.cfl_max);
    const auto coeffs = evaluate(varrho, q_star);
    const QZetaProblem pb = build_q_zeta(coeffs, varrho, q_star, v_star, sn.q, t_new);
    qz = solve_q_zeta(pb);

    MomentumProblem mp;
    mp.dt = dt;
    mp.dx = dx;
    mp.viscosity = settings_.viscosity;
    mp.varrho = varrho;
    mp.zeta = qz.zeta;
    mp.f = momentum_rhs(coeffs, varrho, q_star, v_star, t_new);
    mp.v_n = sn.v;
    v = solve_momentum(mp);

    const Matrix dq = qz.q - q_star;
    const Vector dv = v - v_star;
    const Vector dr = varrho - varrho_prev;
    const Vector dz = qz.zeta - zeta_prev;
    double energy = dq.squaredNorm() + dv.squaredNorm() + dr.squaredNorm();
    double grad = face_differences(dv, dx).squaredNorm() + face_differences(dz, dx).squaredNorm();
    for (Eigen::Index l = 0; l < dq.rows(); ++l) {
      grad += face_differences(dq.row(l).transpose(), dx).squaredNorm();
    }
    energy = dx * (energy + dt * grad);
    rep.energies.push_back(energy);

    const double scale = std::max({inf_norm(qz.q), inf_norm(v), 1.0});
    const double increment = std::max(inf_norm(dq), inf_norm(dv)) / scale;
    rep.n_iterations = sweep;
    rep.final_increment = increment;

    q_star = qz.q;
    v_star = v;
    varrho_prev = varrho;
    zeta_prev = qz.zeta;

    if (increment <= settings_.picard_tol) {
      rep.converged = true;
      break;
    }
    growing = increment > last_increment ? growing + 1 : 0;
    last_increment = increment;
    if (growing >= settings_.divergence_window) {
      std::ostringstream os;
      os << "Picard increments grew for " << growing << " consecutive sweeps (last "
         << increment << ") at t = " << t_new;
      throw Error(ErrorKind::PicardDivergence, os.str());
    }
  }
  if (!rep.converged) {
    std::ostringstream os;
    os << "Picard iteration did not reach tol " << settings_.picard_tol << " within "
       << settings_.max_sweeps << " sweeps (last increment " << rep.final_increment
       << ") at t = " << t_new;
    throw Error(ErrorKind::PicardDivergence, os.str());
  }

  // Consistent zeta for the accepted (varrho, q, v).
  res.coefficients = evaluate(varrho, q_star);
  const QZetaProblem pb = build_q_zeta(res.coefficients, varrho, q_star, v_star, sn.q, t_new);
  res.state.zeta = solve_zeta(pb, q_star);
  res.state.varrho = std::move(varrho);
  res.state.q = std::move(q_star);
  res.state.v = std::move(v_star);
  res.state.time = t_new;
  return res;
}

}  // namespace isomix
