#pragma once

// Reference values computed without the core library. Everything here is
// either a closed form or a deliberately naive algorithm.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace isomix::oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---- binary mixture, vbar = (1, 2), unit masses, theta = 1, mu_ref = 0 ----

struct GoldenAnchor {
  double x;  // positive root of x^2 + x - 1
  double p;  // -ln x
  double rho1;
  double rho2;
};
GoldenAnchor golden_anchor();

Vec binary_rho(double varrho);          // (2 varrho - 1, 1 - varrho)
double binary_pressure(double varrho);  // ln((2 varrho - 1)/(1 - varrho))
double binary_pressure_derivative(double varrho);
double binary_m_one(double varrho);     // P + ln y_1
double binary_d(double varrho);         // vbar.M vbar for M = diag(rho) - rho rho^T / varrho
Mat default_B(const Vec& rho);          // delta_ij - rho_i / varrho

/// Ideal mixture with unit masses, theta = 1, mu_ref = 0: the maximizer of
/// mu.rho - k(rho) on {rho.vbar = 1} from a bisection on the scalar p.
struct Conjugate {
  double p;
  Vec rho;
};
Conjugate ideal_conjugate_bisection(const Vec& mu, const Vec& vbar);

/// Golden-section maximization of mu.rho - k(rho) along the binary constraint
/// line; returns the maximal value.
double binary_conjugate_golden(const Vec& mu, const Vec& vbar);

// ---- generic helpers ----

double ideal_k(const Vec& rho);  // unit masses, theta = 1, mu_ref = 0

/// Central-difference Jacobian of f : R^n -> R^m, step h_j = h * max(1, |x_j|).
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h);
double fd_derivative(const std::function<double(double)>& f, double x, double h);

/// Triple loop A^T B C.
Mat naive_triple_product(const Mat& a, const Mat& b, const Mat& c);

/// Thomas algorithm for a tridiagonal system; sub[0] and sup[n-1] unused.
std::vector<double> thomas(std::vector<double> sub, std::vector<double> diag,
                           std::vector<double> sup, std::vector<double> rhs);

/// Zero-flux 1D Neumann problem -(d zeta_x - s)_x = 0 on a uniform cell grid:
/// integrates zeta_x = s/d across interior faces and removes the mean.
/// d_faces and s_faces hold the n-1 interior face values.
std::vector<double> neumann_cumulative(const std::vector<double>& d_faces,
                                       const std::vector<double>& s_faces, double dx);

/// rho(x, t) for rho_t + (rho v)_x = 0 with a steady velocity field: trace the
/// characteristic back with RK4 and apply exp(-int v_x).
double characteristics_density(const std::function<double(double)>& rho0,
                               const std::function<double(double)>& v,
                               const std::function<double(double)>& v_x, double x, double t,
                               int substeps);

/// exp(-eta pi^2 dt / (varrho L^2)) decay of the first Dirichlet mode.
double momentum_decay_factor(double eta, double varrho, double length, double dt);

/// z(p) = 3/(p-2) for 3<p<5, 1.01 at p=5, 1 above.
double extension_exponent(double p);

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Observed order from errors on grids refined by a factor 2.
double observed_order(double coarse_error, double fine_error);

}  // namespace isomix::oracle
