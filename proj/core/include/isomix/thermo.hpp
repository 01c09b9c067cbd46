#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "isomix/frame.hpp"

namespace isomix {

/// Constituent data of an isothermal mixture.
struct MixtureSpec {
  Vector molar_mass;  // m_i > 0
  Vector vbar;        // partial specific volumes, > 0, not all equal
  Vector mu_ref;      // reference potentials per unit mass
  double theta_kb = 1.0;

  std::size_t n_species() const noexcept { return static_cast<std::size_t>(vbar.size()); }
  double varrho_min() const { return 1.0 / vbar.maxCoeff(); }
  double varrho_max() const { return 1.0 / vbar.minCoeff(); }

  /// Unit molar masses, zero reference potentials and theta k_B = 1.
  static MixtureSpec ideal(const Vector& vbar);

  /// Throws DegenerateVolumes / NonpositiveDensity style errors on bad data.
  void validate() const;
};

/// Positively homogeneous convex free energy k on the open positive cone.
/// Implementations do not range-check; callers own that.
class FreeEnergy {
 public:
  virtual ~FreeEnergy() = default;
  virtual double value(const Vector& rho) const = 0;
  virtual Vector gradient(const Vector& rho) const = 0;
  virtual Matrix hessian(const Vector& rho) const = 0;
};

/// k(rho) = sum mu_ref_i rho_i + theta k_B sum n_i ln y_i, n_i = rho_i / m_i.
class IdealMixingEnergy final : public FreeEnergy {
 public:
  explicit IdealMixingEnergy(const MixtureSpec& spec);

  double value(const Vector& rho) const override;
  Vector gradient(const Vector& rho) const override;
  Matrix hessian(const Vector& rho) const override;

 private:
  Vector molar_mass_;
  Vector mu_ref_;
  double theta_kb_;
};

/// Checked evaluation of the ideal free energy. Throws NonpositiveDensity if
/// any density is non-positive or a mole fraction falls below 1e-14.
double free_energy_k(const MixtureSpec& spec, const Vector& rho);
Vector grad_k(const MixtureSpec& spec, const Vector& rho);

struct DualSolution {
  double p = 0.0;
  Vector rho;
  int iterations = 0;
  double residual = 0.0;
};

struct ChemicalState {
  Vector mu;
  double p = 0.0;
  Vector rho;
};

struct ReducedCoords {
  double varrho = 0.0;
  Vector q;
  double zeta = 0.0;
};

/// Density and pressure parts of the change of variables at (varrho, q).
struct DensityMap {
  double m_one = 0.0;  // the implicit 1^N coordinate of mu
  Vector rho;          // R(varrho, q), on the volume constraint surface
  Vector reduced;      // Pi^T rho
  double pressure = 0.0;
};

struct StateJacobians {
  Matrix R_q;        // (N-2) x (N-2), symmetric positive definite
  Vector R_varrho;   // N-2
  Vector P_q;        // N-2
  double P_varrho = 0.0;
  Vector rho_varrho;  // dR/dvarrho in R^N
  double ones_hessian_ones = 0.0;  // 1 . D^2 f 1 at the evaluation point
};

/// Warm-start data carried between neighbouring evaluations.
struct EvaluationHint {
  double m_one = 0.0;
  Vector rho;
  double p = 0.0;
};

/// Thermodynamic maps of the mixture: the conjugate f = (h^inf)^*, its
/// derivatives, and the change of variables (varrho, q, zeta) <-> (rho, mu, p).
class Thermodynamics {
 public:
  explicit Thermodynamics(MixtureSpec spec);
  Thermodynamics(MixtureSpec spec, std::shared_ptr<const FreeEnergy> energy);

  const MixtureSpec& spec() const noexcept { return spec_; }
  const Frame& frame() const noexcept { return frame_; }
  const FreeEnergy& energy() const noexcept { return *energy_; }
  std::size_t n_species() const noexcept { return spec_.n_species(); }
  std::size_t n_reduced() const noexcept { return spec_.n_species() - 2; }
  double varrho_min() const noexcept { return varrho_min_; }
  double varrho_max() const noexcept { return varrho_max_; }

  /// Maximizer of mu.rho - k(rho) over the volume constraint surface and the
  /// maximum p = f(mu). Damped Newton on the stationarity system.
  DualSolution dual_solve(const Vector& mu, const EvaluationHint* hint = nullptr) const;

  /// D^2 f(mu) via the implicit-function formula; kernel span{vbar}.
  Matrix hessian_f(const Vector& mu) const;
  /// D^2 f at the point whose gradient is rho.
  Matrix hessian_at_density(const Vector& rho) const;

  double implicit_m(double varrho, const Vector& q, const EvaluationHint* hint = nullptr) const;
  DensityMap map_r(double varrho, const Vector& q, const EvaluationHint* hint = nullptr) const;
  double pressure_p(double varrho, const Vector& q) const;
  StateJacobians state_jacobians(double varrho, const Vector& q) const;
  StateJacobians state_jacobians(const DensityMap& map) const;

  ChemicalState to_physical(const ReducedCoords& coords) const;
  ReducedCoords from_physical(const ChemicalState& state) const;

  /// Throws ThresholdViolation unless varrho_min < varrho < varrho_max.
  void require_interior(double varrho) const;

 private:
  struct MSolve {
    double m_one;
    DualSolution dual;
  };
  MSolve solve_m(double varrho, const Vector& q, const EvaluationHint* hint) const;

  MixtureSpec spec_;
  std::shared_ptr<const FreeEnergy> energy_;
  Frame frame_;
  Matrix vbar_complement_;  // orthonormal basis of {vbar}^perp, N x (N-1)
  double varrho_min_ = 0.0;
  double varrho_max_ = 0.0;
};

}  // namespace isomix
