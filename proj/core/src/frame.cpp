#include "isomix/frame.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

constexpr double kParallelTol = 1e-12;
constexpr double kMaxCondition = 1e12;
constexpr double kAcceptNorm = 1e-8;

// Modified Gram-Schmidt with one reorthogonalization pass.
Vector orthogonalize(Vector v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) v -= b.dot(v) * b;
  }
  return v;
}

}  // namespace

Frame Frame::build(const Vector& vbar) {
  const auto n = vbar.size();
  if (n < 2) {
    throw Error(ErrorKind::DegenerateVolumes, "at least two species are required");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(vbar[i] > 0.0) || !std::isfinite(vbar[i])) {
      std::ostringstream os;
      os << "partial specific volume vbar[" << i << "] = " << vbar[i] << " must be positive";
      throw Error(ErrorKind::DegenerateVolumes, os.str());
    }
  }
  double spread = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) spread = std::max(spread, std::abs(vbar[i] / vbar[0] - 1.0));
  if (spread <= kParallelTol) {
    throw Error(ErrorKind::DegenerateVolumes,
                "vbar is parallel to (1,...,1); the volume constraint would fix the total density");
  }

  Frame f;
  f.vbar_ = vbar;

  // Orthonormal basis of span{1, vbar}.
  std::vector<Vector> span;
  span.push_back(Vector::Ones(n).normalized());
  Vector v2 = orthogonalize(vbar, span);
  span.push_back(v2.normalized());

  std::vector<Vector> free;
  std::vector<Vector> all = span;
  for (Eigen::Index k = 0; k < n && static_cast<Eigen::Index>(free.size()) < n - 2; ++k) {
    Vector e = Vector::Unit(n, k);
    Vector u = orthogonalize(e, all);
    const double norm = u.norm();
    if (norm > kAcceptNorm) {
      u /= norm;
      free.push_back(u);
      all.push_back(u);
    }
  }

  f.xi_.resize(n, n);
  for (std::size_t l = 0; l < free.size(); ++l) f.xi_.col(static_cast<Eigen::Index>(l)) = free[l];
  f.xi_.col(n - 2) = vbar;
  f.xi_.col(n - 1) = Vector::Ones(n);
  f.pi_ = f.xi_.leftCols(n - 2);

  Eigen::JacobiSVD<Matrix> svd(f.xi_);
  const auto& s = svd.singularValues();
  f.condition_ = s[n - 1] > 0.0 ? s[0] / s[n - 1] : std::numeric_limits<double>::infinity();
  if (!(f.condition_ <= kMaxCondition)) {
    std::ostringstream os;
    os << "basis matrix condition number " << f.condition_ << " exceeds " << kMaxCondition;
    throw Error(ErrorKind::SingularBasis, os.str());
  }

  // Rows of xi^T are the xi^i, so eta = (xi^T)^{-1} has the dual vectors as columns.
  f.eta_ = f.xi_.transpose().partialPivLu().solve(Matrix::Identity(n, n));

  f.proj_perp_ones_ = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  f.proj_perp_ones_vbar_ = Matrix::Identity(n, n) - span[0] * span[0].transpose() -
                           span[1] * span[1].transpose();
  return f;
}

Frame::Decomposition Frame::decompose(const Vector& w) const {
  const auto n = static_cast<Eigen::Index>(n_species());
  Decomposition d;
  d.q_part = eta_.leftCols(n - 2).transpose() * w;
  d.vbar_part = eta_.col(n - 2).dot(w);
  d.ones_part = eta_.col(n - 1).dot(w);
  return d;
}

Vector Frame::compose(const Vector& q_part, double vbar_part, double ones_part) const {
  Vector w = pi_ * q_part;
  w += vbar_part * vbar_;
  w.array() += ones_part;
  return w;
}

}  // namespace isomix
