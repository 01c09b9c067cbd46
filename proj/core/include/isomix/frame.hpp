#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace isomix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Basis xi^1..xi^N of R^N with xi^{N-1} = vbar and xi^N = 1, its dual basis
/// eta, and the projections used by the change of variables.
///
/// The free vectors xi^1..xi^{N-2} are an orthonormal basis of {1, vbar}^perp
/// obtained by Gram-Schmidt from the canonical unit vectors, so a frame is a
/// deterministic function of vbar.
class Frame {
 public:
  /// Builds the frame for the given partial specific volumes.
  /// Throws DegenerateVolumes if vbar is parallel to 1 and SingularBasis if
  /// the assembled basis matrix is numerically singular.
  static Frame build(const Vector& vbar);

  std::size_t n_species() const noexcept { return static_cast<std::size_t>(xi_.cols()); }
  std::size_t n_reduced() const noexcept { return n_species() - 2; }

  /// Column i holds xi^{i+1}.
  const Matrix& xi() const noexcept { return xi_; }
  /// Column j holds eta^{j+1}; xi^T eta = Id.
  const Matrix& eta() const noexcept { return eta_; }
  /// N x (N-2) matrix with columns xi^1..xi^{N-2}.
  const Matrix& pi() const noexcept { return pi_; }
  const Matrix& proj_perp_ones() const noexcept { return proj_perp_ones_; }
  const Matrix& proj_perp_ones_vbar() const noexcept { return proj_perp_ones_vbar_; }

  const Vector& vbar() const noexcept { return vbar_; }
  double condition_number() const noexcept { return condition_; }

  struct Decomposition {
    Vector q_part;     // eta^l . w, l = 1..N-2
    double vbar_part;  // eta^{N-1} . w
    double ones_part;  // eta^N . w
  };

  /// w = sum_l q_part_l xi^l + vbar_part vbar + ones_part 1.
  Decomposition decompose(const Vector& w) const;

  /// Inverse of decompose.
  Vector compose(const Vector& q_part, double vbar_part, double ones_part) const;

 private:
  Frame() = default;

  Vector vbar_;
  Matrix xi_;
  Matrix eta_;
  Matrix pi_;
  Matrix proj_perp_ones_;
  Matrix proj_perp_ones_vbar_;
  double condition_ = 0.0;
};

inline Frame build_frame(const Vector& vbar) { return Frame::build(vbar); }

inline Frame::Decomposition decompose_vector(const Frame& frame, const Vector& w) {
  return frame.decompose(w);
}

}  // namespace isomix
