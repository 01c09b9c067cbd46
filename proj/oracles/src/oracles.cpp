#include "isomix_oracles/oracles.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isomix::oracle {

GoldenAnchor golden_anchor() {
  GoldenAnchor g;
  g.x = (std::sqrt(5.0) - 1.0) / 2.0;
  g.p = -std::log(g.x);
  g.rho1 = 1.0 / std::sqrt(5.0);
  g.rho2 = (1.0 - 1.0 / std::sqrt(5.0)) / 2.0;
  return g;
}

Vec binary_rho(double varrho) {
  Vec r(2);
  r << 2.0 * varrho - 1.0, 1.0 - varrho;
  return r;
}

double binary_pressure(double varrho) { return std::log((2.0 * varrho - 1.0) / (1.0 - varrho)); }

double binary_pressure_derivative(double varrho) {
  return 2.0 / (2.0 * varrho - 1.0) + 1.0 / (1.0 - varrho);
}

double binary_m_one(double varrho) {
  const Vec r = binary_rho(varrho);
  return binary_pressure(varrho) + std::log(r[0] / r.sum());
}

double binary_d(double varrho) { return (1.0 - varrho) * (2.0 * varrho - 1.0) / varrho; }

Mat default_B(const Vec& rho) {
  const auto n = rho.size();
  const double s = rho.sum();
  Mat b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = (i == j ? 1.0 : 0.0) - rho[i] / s;
  return b;
}

double ideal_k(const Vec& rho) {
  const double s = rho.sum();
  double k = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) k += rho[i] * std::log(rho[i] / s);
  return k;
}

Conjugate ideal_conjugate_bisection(const Vec& mu, const Vec& vbar) {
  // Stationarity gives y_i = exp(mu_i - vbar_i p); sum y_i = 1 fixes p.
  auto excess = [&](double p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) s += std::exp(mu[i] - vbar[i] * p);
    return s - 1.0;
  };
  double lo = -1.0;
  double hi = 1.0;
  while (excess(lo) < 0.0) lo *= 2.0;
  while (excess(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  Conjugate c;
  c.p = 0.5 * (lo + hi);
  Vec y(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) y[i] = std::exp(mu[i] - vbar[i] * c.p);
  y /= y.sum();
  c.rho = y / y.dot(vbar);
  return c;
}

double binary_conjugate_golden(const Vec& mu, const Vec& vbar) {
  // rho_1 = t / vbar_1, rho_2 = (1 - t) / vbar_2, t in (0, 1).
  auto objective = [&](double t) {
    Vec r(2);
    r << t / vbar[0], (1.0 - t) / vbar[1];
    return mu.dot(r) - ideal_k(r);
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-15;
  double b = 1.0 - 1e-15;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 200; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    }
  }
  return objective(0.5 * (a + b));
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    Vec xp = x;
    Vec xm = x;
    xp[j] += step;
    xm[j] -= step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return jac;
}

double fd_derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

Mat naive_triple_product(const Mat& a, const Mat& b, const Mat& c) {
  Mat out = Mat::Zero(a.cols(), c.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      for (Eigen::Index k = 0; k < a.rows(); ++k)
        for (Eigen::Index l = 0; l < c.rows(); ++l) out(i, j) += a(k, i) * b(k, l) * c(l, j);
  return out;
}

std::vector<double> thomas(std::vector<double> sub, std::vector<double> diag,
                           std::vector<double> sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
  return x;
}

std::vector<double> neumann_cumulative(const std::vector<double>& d_faces,
                                       const std::vector<double>& s_faces, double dx) {
  const std::size_t n = d_faces.size() + 1;
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) z[i] = z[i - 1] + dx * s_faces[i - 1] / d_faces[i - 1];
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
  for (double& v : z) v -= mean;
  return z;
}

double characteristics_density(const std::function<double(double)>& rho0,
                               const std::function<double(double)>& v,
                               const std::function<double(double)>& v_x, double x, double t,
                               int substeps) {
  // Backward in time: dX/ds = -v(X), dI/ds = v_x(X).
  const double h = t / substeps;
  double pos = x;
  double integral = 0.0;
  for (int s = 0; s < substeps; ++s) {
    const double k1 = -v(pos);
    const double j1 = v_x(pos);
    const double k2 = -v(pos + 0.5 * h * k1);
    const double j2 = v_x(pos + 0.5 * h * k1);
    const double k3 = -v(pos + 0.5 * h * k2);
    const double j3 = v_x(pos + 0.5 * h * k2);
    const double k4 = -v(pos + h * k3);
    const double j4 = v_x(pos + h * k3);
    pos += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    integral += h * (j1 + 2.0 * j2 + 2.0 * j3 + j4) / 6.0;
  }
  return rho0(pos) * std::exp(-integral);
}

double momentum_decay_factor(double eta, double varrho, double length, double dt) {
  return std::exp(-eta * M_PI * M_PI * dt / (varrho * length * length));
}

double extension_exponent(double p) {
  if (!(p > 3.0)) throw std::invalid_argument("p must exceed 3");
  if (p < 5.0) return 3.0 / (p - 2.0);
  if (p == 5.0) return 1.01;
  return 1.0;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double observed_order(double coarse_error, double fine_error) {
  return std::log2(coarse_error / fine_error);
}

}  // namespace isomix::oracle
