#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "isomix/thermo.hpp"

namespace isomix {

/// M = D0 (diag(rho) - rho rho^T / varrho).
struct QuasiDiagonal {
  double mobility_scale = 1.0;
};

/// Binary diffusivities D_ij (symmetric, positive off the diagonal; the
/// diagonal is ignored).
struct MaxwellStefan {
  Matrix diffusivities;
};

class ClosureModel {
 public:
  using Kind = std::variant<QuasiDiagonal, MaxwellStefan>;

  ClosureModel() = default;
  explicit ClosureModel(Kind kind);

  static ClosureModel quasi_diagonal(double mobility_scale);
  static ClosureModel maxwell_stefan(Matrix diffusivities);

  const Kind& kind() const noexcept { return kind_; }
  bool is_quasi_diagonal() const noexcept { return std::holds_alternative<QuasiDiagonal>(kind_); }

  /// Throws ValidationError for non-positive scales or an asymmetric / wrongly
  /// sized diffusivity matrix.
  void validate(std::size_t n_species) const;

  /// Onsager matrix M(rho): symmetric, PSD, M 1 = 0.
  Matrix onsager(const Vector& rho) const;

 private:
  Kind kind_ = QuasiDiagonal{};
};

Matrix onsager_M(const ClosureModel& closure, const Vector& rho);

struct ReducedCoefficients {
  Matrix m_tilde;  // Pi^T M Pi
  Vector a_vec;    // Pi^T M vbar
  double d_scal = 0.0;
  Matrix k_core;   // m_tilde - a a^T / d
};

/// Reduction of a given Onsager matrix; DegenerateClosure if vbar.M vbar <= 0.
ReducedCoefficients reduce_matrix(const Frame& frame, const Matrix& onsager);

ReducedCoefficients reduce_closure(const ClosureModel& closure, const Thermodynamics& thermo,
                                   double varrho, const Vector& q);

struct BMatrixReport {
  Matrix B;      // B_ij = M_ij / rho_j
  double bound;  // max_{i,j,k} |B_ij| + rho_k |d B_ij / d rho_k|
};

BMatrixReport matrix_B(const ClosureModel& closure, const Vector& rho);

/// m(varrho) = min{1 - varrho/varrho_max, varrho/varrho_min - 1}.
double threshold_distance(double varrho, double varrho_min, double varrho_max);

struct DegenerationPoint {
  double varrho = 0.0;
  double m = 0.0;
  double d = 0.0;
  double a_norm = 0.0;
  double d_q_norm = 0.0;
  double a_q_norm = 0.0;
  double d_varrho = 0.0;
  double a_varrho_norm = 0.0;
  double ratio = 0.0;       // (|d| + |A| + |d_q| + |A_q|) / m
  double derivative = 0.0;  // |d_varrho| + |A_varrho|
};

struct DegenerationReport {
  std::vector<DegenerationPoint> points;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double max_derivative = 0.0;
};

DegenerationReport degeneration_monitor(const ClosureModel& closure, const Thermodynamics& thermo,
                                        const std::vector<double>& sweep, const Vector& q);

}  // namespace isomix
