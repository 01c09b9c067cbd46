#include "isomix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

CheckResult check(std::string suite, std::string name, double measured, double bound,
                  std::string relation = "<=") {
  CheckResult r{std::move(suite), std::move(name), measured, bound, relation, false};
  if (relation == "<=") r.pass = measured <= bound;
  else if (relation == ">") r.pass = measured > bound;
  else r.pass = false;
  if (std::isnan(measured)) r.pass = false;
  return r;
}

Vector uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

double inf_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Vector reference_vbar(std::size_t n) {
  switch (n) {
    case 2: return (Vector(2) << 1.0, 2.0).finished();
    case 3: return (Vector(3) << 1.0, 2.0, 4.0).finished();
    case 4: return (Vector(4) << 1.0, 1.5, 2.5, 4.0).finished();
    default: break;
  }
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + static_cast<double>(i);
  return v;
}

Matrix reference_diffusivities(std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix d(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      d(i, j) = 1.0 + 0.5 * std::abs(static_cast<double>(i - j)) + 0.25 * static_cast<double>(i + j);
    }
  }
  return d;
}

std::vector<double> threshold_sweep(double varrho_min, double varrho_max, std::size_t per_side,
                                    double closest) {
  const double mid = 0.5 * (varrho_min + varrho_max);
  const double far = 0.25 * threshold_distance(mid, varrho_min, varrho_max);
  std::vector<double> out;
  for (std::size_t k = 0; k < per_side; ++k) {
    const double s = per_side > 1 ? static_cast<double>(k) / static_cast<double>(per_side - 1) : 0.0;
    const double m = far * std::pow(closest / far, s);
    out.push_back(varrho_min * (1.0 + m));
    out.push_back(varrho_max * (1.0 - m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CheckResult> duality_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : {2u, 3u, 4u}) {
    const Thermodynamics thermo(MixtureSpec::ideal(reference_vbar(n)));
    const Vector& vbar = thermo.frame().vbar();
    std::mt19937_64 rng(opt.seed + n);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    double stat = 0.0, vol = 0.0, shift_err = 0.0;
    for (std::size_t k = 0; k < opt.duality_samples; ++k) {
      const Vector mu = uniform_vector(rng, static_cast<Eigen::Index>(n), -5.0, 5.0);
      const DualSolution d = thermo.dual_solve(mu);
      const Vector r = mu - vbar * d.p - thermo.energy().gradient(d.rho);
      stat = std::max(stat, r.lpNorm<Eigen::Infinity>());
      vol = std::max(vol, std::abs(vbar.dot(d.rho) - 1.0));
      const double s = shift(rng);
      const DualSolution ds = thermo.dual_solve(mu + s * vbar);
      shift_err = std::max(shift_err, std::abs(ds.p - d.p - s));
    }
    const std::string tag = "N=" + std::to_string(n);
    out.push_back(check("duality", tag + " stationarity residual", stat, 1e-9));
    out.push_back(check("duality", tag + " volume constraint", vol, 1e-10));
    out.push_back(check("duality", tag + " shift law", shift_err, 1e-10));
  }
  return out;
}

std::vector<CheckResult> hessian_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : {2u, 3u, 4u}) {
    const Thermodynamics thermo(MixtureSpec::ideal(reference_vbar(n)));
    const Vector& vbar = thermo.frame().vbar();
    std::mt19937_64 rng(opt.seed + 100 + n);
    double kernel = 0.0, rel = 0.0, sym = 0.0;
    for (std::size_t k = 0; k < opt.samples; ++k) {
      const Vector mu = uniform_vector(rng, static_cast<Eigen::Index>(n), -5.0, 5.0);
      const Matrix h = thermo.hessian_f(mu);
      kernel = std::max(kernel, (h * vbar).lpNorm<Eigen::Infinity>());
      sym = std::max(sym, inf_norm(h - h.transpose()) / inf_norm(h));
      Matrix fd(h.rows(), h.cols());
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        const double step = 1e-4 * std::max(1.0, std::abs(mu[j]));
        Vector plus = mu, minus = mu;
        plus[j] += step;
        minus[j] -= step;
        fd.col(j) = (thermo.dual_solve(plus).rho - thermo.dual_solve(minus).rho) / (2.0 * step);
      }
      rel = std::max(rel, inf_norm(h - fd) / inf_norm(h));
    }
    const std::string tag = "N=" + std::to_string(n);
    out.push_back(check("hessian", tag + " |D2f vbar|", kernel, 1e-9));
    out.push_back(check("hessian", tag + " symmetry (relative)", sym, 1e-12));
    out.push_back(check("hessian", tag + " analytic vs FD (relative)", rel, 1e-5));
  }
  return out;
}

std::vector<CheckResult> roundtrip_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : {2u, 3u, 4u}) {
    const Thermodynamics thermo(MixtureSpec::ideal(reference_vbar(n)));
    const auto nq = static_cast<Eigen::Index>(thermo.n_reduced());
    std::mt19937_64 rng(opt.seed + 200 + n);
    const double lo = thermo.varrho_min(), hi = thermo.varrho_max();
    std::uniform_real_distribution<double> frac(0.01, 0.99), zeta(-1.0, 1.0);
    double fwd = 0.0, bwd = 0.0;
    for (std::size_t k = 0; k < opt.samples; ++k) {
      ReducedCoords c;
      c.varrho = lo + frac(rng) * (hi - lo);
      c.q = uniform_vector(rng, nq, -2.0, 2.0);
      c.zeta = zeta(rng);
      const ReducedCoords back = thermo.from_physical(thermo.to_physical(c));
      double e = std::abs(back.varrho - c.varrho) + 0.0;
      e = std::max(e, std::abs(back.zeta - c.zeta));
      if (nq > 0) e = std::max(e, (back.q - c.q).lpNorm<Eigen::Infinity>());
      fwd = std::max(fwd, e);

      ChemicalState s;
      s.mu = uniform_vector(rng, static_cast<Eigen::Index>(n), -3.0, 3.0);
      const DualSolution d = thermo.dual_solve(s.mu);
      s.p = d.p;
      s.rho = d.rho;
      const ChemicalState again = thermo.to_physical(thermo.from_physical(s));
      double e2 = (again.mu - s.mu).lpNorm<Eigen::Infinity>();
      e2 = std::max(e2, std::abs(again.p - s.p));
      e2 = std::max(e2, (again.rho - s.rho).lpNorm<Eigen::Infinity>());
      bwd = std::max(bwd, e2);
    }
    const std::string tag = "N=" + std::to_string(n);
    out.push_back(check("roundtrip", tag + " from_physical(to_physical(c)) - c", fwd, 1e-9));
    out.push_back(check("roundtrip", tag + " to_physical(from_physical(s)) - s", bwd, 1e-9));
  }
  return out;
}

std::vector<CheckResult> pressure_suite() {
  std::vector<CheckResult> out;
  const Thermodynamics thermo(MixtureSpec::ideal(reference_vbar(2)));
  const Vector q0 = Vector::Zero(0);
  const double p = thermo.pressure_p(0.75, q0);
  out.push_back(check("pressure", "P(0.75) - ln 2", std::abs(p - std::log(2.0)), 1e-10));
  const double pv = thermo.state_jacobians(0.75, q0).P_varrho;
  out.push_back(check("pressure", "P_varrho(0.75) - 8", std::abs(pv - 8.0), 1e-7));
  const double h = 1e-5;
  const double fd = (thermo.pressure_p(0.75 + h, q0) - thermo.pressure_p(0.75 - h, q0)) / (2.0 * h);
  out.push_back(check("pressure", "P_varrho(0.75) vs FD", std::abs(pv - fd), 1e-7 * 8.0 + 1e-6));

  std::vector<double> xs, ys;
  for (int k = 0; k < 40; ++k) {
    const double r = 0.95 + (0.999 - 0.95) * k / 39.0;
    xs.push_back(-std::log(1.0 - r));
    ys.push_back(thermo.pressure_p(r, q0));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  out.push_back(check("pressure", "|slope of P vs -ln(1 - varrho) - 1|", std::abs(sxy / sxx - 1.0), 0.1));
  return out;
}

std::vector<CheckResult> closure_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : {2u, 3u, 4u}) {
    const Thermodynamics thermo(MixtureSpec::ideal(reference_vbar(n)));
    const auto nn = static_cast<Eigen::Index>(n);
    const auto nq = static_cast<Eigen::Index>(thermo.n_reduced());
    const std::vector<std::pair<std::string, ClosureModel>> closures = {
        {"QD", ClosureModel::quasi_diagonal(1.0)},
        {"MS", ClosureModel::maxwell_stefan(reference_diffusivities(n))}};
    for (const auto& [label, closure] : closures) {
      std::mt19937_64 rng(opt.seed + 300 + n + (label == "MS" ? 50 : 0));
      double sym = 0.0, kernel = 0.0, gap = std::numeric_limits<double>::infinity(), null = 0.0;
      for (std::size_t k = 0; k < opt.samples; ++k) {
        const Vector rho = uniform_vector(rng, nn, 0.01, 1.0);
        const Matrix m = closure.onsager(rho);
        const double scale = inf_norm(m);
        sym = std::max(sym, inf_norm(m - m.transpose()) / scale);
        kernel = std::max(kernel, (m * Vector::Ones(nn)).lpNorm<Eigen::Infinity>() / scale);
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
        const Vector ev = es.eigenvalues();
        null = std::max(null, std::abs(ev[0]) / ev[nn - 1]);
        if (nn > 1) gap = std::min(gap, ev[1] / ev[nn - 1]);
      }
      const std::string tag = "N=" + std::to_string(n) + " " + label;
      out.push_back(check("closure", tag + " M symmetry (relative)", sym, 1e-13));
      out.push_back(check("closure", tag + " M 1 (relative)", kernel, 1e-13));
      out.push_back(check("closure", tag + " null eigenvalue (relative)", null, 1e-12));
      out.push_back(check("closure", tag + " second eigenvalue (relative)", gap, 1e-8, ">"));

      if (nq > 0) {
        std::uniform_real_distribution<double> frac(1e-3, 1.0 - 1e-3);
        double kmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < opt.samples; ++k) {
          const double varrho = thermo.varrho_min() + frac(rng) * (thermo.varrho_max() - thermo.varrho_min());
          const Vector q = uniform_vector(rng, nq, -2.0, 2.0);
          const ReducedCoefficients c = reduce_closure(closure, thermo, varrho, q);
          Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c.k_core + c.k_core.transpose()));
          kmin = std::min(kmin, es.eigenvalues()[0]);
        }
        out.push_back(check("closure", tag + " min eigenvalue of K", kmin, 0.0, ">"));
      }
    }

    // Default closure: B = M diag(rho)^-1 = delta - rho/varrho.
    std::mt19937_64 rng(opt.seed + 400 + n);
    double b_err = 0.0;
    const ClosureModel qd = ClosureModel::quasi_diagonal(1.0);
    for (std::size_t k = 0; k < opt.samples; ++k) {
      const Vector rho = uniform_vector(rng, nn, 0.01, 1.0);
      const Matrix b = matrix_B(qd, rho).B;
      const Matrix expect = Matrix::Identity(nn, nn) - rho * Vector::Ones(nn).transpose() / rho.sum();
      b_err = std::max(b_err, inf_norm(b - expect));
    }
    out.push_back(check("closure", "N=" + std::to_string(n) + " default B - (delta - rho/varrho)", b_err, 1e-12));

    // Degeneration of d, A and their q-derivatives relative to the threshold distance.
    const auto sweep = threshold_sweep(thermo.varrho_min(), thermo.varrho_max());
    const DegenerationReport rep = degeneration_monitor(qd, thermo, sweep, Vector::Zero(nq));
    out.push_back(check("closure", "N=" + std::to_string(n) + " degeneration ratio max / median",
                        rep.max_ratio / rep.median_ratio, 2.0));
  }
  return out;
}

std::vector<CheckResult> all_suites(const SuiteOptions& opt) {
  std::vector<CheckResult> all;
  for (auto&& part : {duality_suite(opt), hessian_suite(opt), roundtrip_suite(opt), pressure_suite(),
                      closure_suite(opt)}) {
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace isomix
