#include "isomix/closure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

constexpr double kFdRelStep = 1e-6;

void check_positive(const Vector& rho) {
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      std::ostringstream os;
      os << "rho[" << i << "] = " << rho[i] << " is not positive";
      throw Error(ErrorKind::NonpositiveDensity, os.str());
    }
  }
}

Matrix mass_projector(const Vector& rho) {
  const double varrho = rho.sum();
  Matrix s = -rho * rho.transpose() / varrho;
  s.diagonal() += rho;
  return s;
}

// M = S G^+ S, G the Laplacian with weights rho_i rho_j / (varrho D_ij).
// Since G = T diag(rho) with the flux-form friction matrix
//   T_ii = sum_j rho_j / (varrho D_ij),  T_ij = -rho_i / (varrho D_ij),
// the flux J = M xi is the solution of T J = S xi with 1.J = 0, i.e.
// M = (T + rho 1^T / varrho)^-1 S. No 1/rho factors appear, so the
// evaluation stays accurate when a partial density is tiny.
Matrix maxwell_stefan_onsager(const Matrix& diff, const Vector& rho) {
  const auto n = rho.size();
  const double varrho = rho.sum();
  Matrix t = rho * Vector::Ones(n).transpose() / varrho;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      t(i, i) += rho[j] / (varrho * diff(i, j));
      t(i, j) -= rho[i] / (varrho * diff(i, j));
    }
  }
  Matrix m = t.partialPivLu().solve(mass_projector(rho));
  return 0.5 * (m + m.transpose());
}

}  // namespace

ClosureModel::ClosureModel(Kind kind) : kind_(std::move(kind)) {}

ClosureModel ClosureModel::quasi_diagonal(double mobility_scale) {
  return ClosureModel(QuasiDiagonal{mobility_scale});
}

ClosureModel ClosureModel::maxwell_stefan(Matrix diffusivities) {
  return ClosureModel(MaxwellStefan{std::move(diffusivities)});
}

void ClosureModel::validate(std::size_t n_species) const {
  if (const auto* qd = std::get_if<QuasiDiagonal>(&kind_)) {
    if (!(qd->mobility_scale > 0.0) || !std::isfinite(qd->mobility_scale)) {
      throw Error(ErrorKind::ValidationError, "mobility scale D0 must be positive");
    }
    return;
  }
  const auto& d = std::get<MaxwellStefan>(kind_).diffusivities;
  const auto n = static_cast<Eigen::Index>(n_species);
  if (d.rows() != n || d.cols() != n) {
    throw Error(ErrorKind::ValidationError, "binary diffusivity matrix must be N x N");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(d(i, j) > 0.0) || !std::isfinite(d(i, j))) {
        throw Error(ErrorKind::ValidationError, "binary diffusivities must be positive");
      }
      if (std::abs(d(i, j) - d(j, i)) > 1e-12 * std::max(d(i, j), d(j, i))) {
        throw Error(ErrorKind::ValidationError, "binary diffusivity matrix must be symmetric");
      }
    }
  }
}

Matrix ClosureModel::onsager(const Vector& rho) const {
  check_positive(rho);
  if (const auto* qd = std::get_if<QuasiDiagonal>(&kind_)) {
    return qd->mobility_scale * mass_projector(rho);
  }
  return maxwell_stefan_onsager(std::get<MaxwellStefan>(kind_).diffusivities, rho);
}

Matrix onsager_M(const ClosureModel& closure, const Vector& rho) { return closure.onsager(rho); }

ReducedCoefficients reduce_matrix(const Frame& frame, const Matrix& onsager) {
  const Matrix& pi = frame.pi();
  const Vector& vbar = frame.vbar();
  ReducedCoefficients c;
  const Vector m_vbar = onsager * vbar;
  c.d_scal = vbar.dot(m_vbar);
  if (!(c.d_scal > 0.0)) {
    std::ostringstream os;
    os << "vbar.M vbar = " << c.d_scal << " is not positive";
    throw Error(ErrorKind::DegenerateClosure, os.str());
  }
  c.m_tilde = pi.transpose() * onsager * pi;
  c.m_tilde = 0.5 * (c.m_tilde + c.m_tilde.transpose());
  c.a_vec = pi.transpose() * m_vbar;
  // K = Pi^T (M - M vbar vbar^T M / d) Pi as a Gram matrix Z^T Z with
  // Z = (I - w w^T / |w|^2) M^{1/2} Pi, w = M^{1/2} vbar: no cancellation
  // between M~ and A A^T / d, and K is PSD by construction.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (onsager + onsager.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix half = root.asDiagonal() * es.eigenvectors().transpose();  // L^T, M = L L^T
  const Vector w = half * vbar;
  Matrix z = half * pi;
  z -= w * (w.transpose() * z) / w.squaredNorm();
  c.k_core = z.transpose() * z;
  return c;
}

ReducedCoefficients reduce_closure(const ClosureModel& closure, const Thermodynamics& thermo,
                                   double varrho, const Vector& q) {
  const DensityMap map = thermo.map_r(varrho, q);
  return reduce_matrix(thermo.frame(), closure.onsager(map.rho));
}

BMatrixReport matrix_B(const ClosureModel& closure, const Vector& rho) {
  check_positive(rho);
  const auto n = rho.size();
  auto b_of = [&](const Vector& r) {
    Matrix b = closure.onsager(r);
    for (Eigen::Index j = 0; j < n; ++j) b.col(j) /= r[j];
    return b;
  };
  BMatrixReport rep;
  rep.B = b_of(rho);
  rep.bound = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = kFdRelStep * rho[k];
    Vector plus = rho;
    Vector minus = rho;
    plus[k] += h;
    minus[k] -= h;
    const Matrix deriv = (b_of(plus) - b_of(minus)) / (2.0 * h);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        rep.bound = std::max(rep.bound, std::abs(rep.B(i, j)) + rho[k] * std::abs(deriv(i, j)));
      }
    }
  }
  return rep;
}

double threshold_distance(double varrho, double varrho_min, double varrho_max) {
  return std::min(1.0 - varrho / varrho_max, varrho / varrho_min - 1.0);
}

DegenerationReport degeneration_monitor(const ClosureModel& closure, const Thermodynamics& thermo,
                                        const std::vector<double>& sweep, const Vector& q) {
  const double lo = thermo.varrho_min();
  const double hi = thermo.varrho_max();
  const auto nq = q.size();
  DegenerationReport rep;
  for (double varrho : sweep) {
    thermo.require_interior(varrho);
    DegenerationPoint pt;
    pt.varrho = varrho;
    pt.m = threshold_distance(varrho, lo, hi);
    const ReducedCoefficients c = reduce_closure(closure, thermo, varrho, q);
    pt.d = c.d_scal;
    pt.a_norm = c.a_vec.norm();

    // Central differences; the varrho step stays well inside the interval.
    const double h_rho =
        std::min(kFdRelStep * varrho, 0.25 * std::min(varrho - lo, hi - varrho));
    const ReducedCoefficients cp = reduce_closure(closure, thermo, varrho + h_rho, q);
    const ReducedCoefficients cm = reduce_closure(closure, thermo, varrho - h_rho, q);
    pt.d_varrho = (cp.d_scal - cm.d_scal) / (2.0 * h_rho);
    pt.a_varrho_norm = ((cp.a_vec - cm.a_vec) / (2.0 * h_rho)).norm();

    Vector d_q(nq);
    Matrix a_q(nq, nq);
    for (Eigen::Index l = 0; l < nq; ++l) {
      const double h = kFdRelStep * std::max(1.0, std::abs(q[l]));
      Vector qp = q;
      Vector qm = q;
      qp[l] += h;
      qm[l] -= h;
      const ReducedCoefficients p = reduce_closure(closure, thermo, varrho, qp);
      const ReducedCoefficients m = reduce_closure(closure, thermo, varrho, qm);
      d_q[l] = (p.d_scal - m.d_scal) / (2.0 * h);
      a_q.col(l) = (p.a_vec - m.a_vec) / (2.0 * h);
    }
    pt.d_q_norm = d_q.norm();
    pt.a_q_norm = a_q.norm();
    pt.ratio = (std::abs(pt.d) + pt.a_norm + pt.d_q_norm + pt.a_q_norm) / pt.m;
    pt.derivative = std::abs(pt.d_varrho) + pt.a_varrho_norm;
    rep.max_ratio = std::max(rep.max_ratio, pt.ratio);
    rep.max_derivative = std::max(rep.max_derivative, pt.derivative);
    rep.points.push_back(pt);
  }
  if (!rep.points.empty()) {
    std::vector<double> ratios;
    ratios.reserve(rep.points.size());
    for (const auto& pt : rep.points) ratios.push_back(pt.ratio);
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    rep.median_ratio = n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  return rep;
}

}  // namespace isomix
