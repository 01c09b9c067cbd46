#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "isomix/errors.hpp"
#include "isomix/solver.hpp"
#include "isomix_oracles/oracles.hpp"
#include "unit/mms.hpp"

namespace oc = isomix::oracle;
using isomix::ClosureModel;
using isomix::Grid1D;
using isomix::Matrix;
using isomix::MixtureSpec;
using isomix::Thermodynamics;
using isomix::Vector;
constexpr double kPi = std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

isomix::SolverSettings settings(double dt) {
  isomix::SolverSettings s;
  s.dt = dt;
  return s;
}

isomix::DiscreteState uniform_state(const Grid1D& g, std::size_t nq, double varrho, double q) {
  const auto n = static_cast<Eigen::Index>(g.n_cells());
  isomix::DiscreteState s;
  s.varrho = Vector::Constant(n, varrho);
  s.q = Matrix::Constant(static_cast<Eigen::Index>(nq), n, q);
  s.zeta = Vector::Zero(n);
  s.v = Vector::Zero(n);
  return s;
}

}  // namespace

TEST(Continuity, ConservesMass) {
  const std::size_t n = 40;
  const double dx = 1.0 / n;
  Vector r(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (i + 0.5) * dx;
    r[i] = 0.75 + 0.1 * std::cos(kPi * x);
    v[i] = 0.8 * std::sin(2 * kPi * x) + 0.1;
  }
  const isomix::ThresholdGuard guard{0.1, 2.0, 1e-10};
  Vector cur = r;
  for (int k = 0; k < 20; ++k) cur = isomix::step_continuity(cur, v, 0.01, dx, guard);
  EXPECT_NEAR(cur.sum(), r.sum(), 1e-12);
}

TEST(Continuity, ConstantStateWithZeroVelocityIsFixed) {
  const Vector r = Vector::Constant(16, 0.7);
  const Vector out = isomix::step_continuity(r, Vector::Zero(16), 0.1, 1.0 / 16, {0.5, 1.0, 1e-10});
  EXPECT_EQ(out, r);
}

TEST(Continuity, CflViolation) {
  const Vector r = Vector::Constant(16, 0.7);
  try {
    (void)isomix::step_continuity(r, Vector::Constant(16, 1.0), 0.1, 1.0 / 16, {0.5, 1.0, 1e-10});
    FAIL();
  } catch (const isomix::Error& e) {
    EXPECT_EQ(e.kind(), isomix::ErrorKind::CflViolation);
  }
}

TEST(Continuity, GuardBandBreach) {
  const std::size_t n = 16;
  Vector r = Vector::Constant(n, 0.9);
  r[n - 1] = 1.0 - 1e-3;
  Vector v = Vector::Constant(n, 0.5);
  v[0] = 0.0;
  try {
    (void)isomix::step_continuity(r, v, 0.05, 1.0 / n, {0.5, 1.0, 1e-10});
    FAIL();
  } catch (const isomix::ThresholdBreachError& e) {
    EXPECT_EQ(e.side(), isomix::ThresholdBreachError::Side::Upper);
    EXPECT_EQ(e.cell(), n - 1);
    EXPECT_GE(e.value(), 1.0 - 1e-10);
  }
}

TEST(Zeta, BinaryMatchesCumulativeIntegration) {
  const std::size_t n = 32;
  const double dx = 1.0 / n;
  isomix::QZetaProblem pb;
  pb.dt = 0.1;
  pb.dx = dx;
  pb.a_vec = Matrix(0, n);
  pb.d_scal.resize(n);
  pb.h.resize(n);
  pb.v_star.resize(n);
  pb.g = Matrix(0, n);
  pb.q_n = Matrix(0, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (i + 0.5) * dx;
    pb.d_scal[i] = 0.2 + 0.1 * std::cos(3 * x);
    pb.h[i] = std::sin(5 * x);
    pb.v_star[i] = x * (1 - x);
  }
  std::vector<double> d_f(n - 1), s_f(n - 1);
  for (std::size_t f = 0; f + 1 < n; ++f) {
    d_f[f] = 0.5 * (pb.d_scal[f] + pb.d_scal[f + 1]);
    s_f[f] = 0.5 * (pb.v_star[f] + pb.v_star[f + 1] + pb.h[f] + pb.h[f + 1]);
  }
  const auto ref = oc::neumann_cumulative(d_f, s_f, dx);
  double res = 1.0;
  const Vector z = isomix::solve_zeta(pb, Matrix(0, n), &res);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(z[i], ref[i], 1e-12);
  EXPECT_LE(std::abs(z.mean()), 1e-15);
  EXPECT_LE(res, 1e-12);
}

TEST(Zeta, NonpositiveVolumeMobility) {
  isomix::QZetaProblem pb;
  pb.dx = 0.1;
  pb.dt = 0.1;
  pb.a_vec = Matrix(0, 10);
  pb.d_scal = Vector::Ones(10);
  pb.d_scal[3] = 0.0;
  pb.h = pb.v_star = Vector::Zero(10);
  EXPECT_THROW((void)isomix::solve_zeta(pb, Matrix(0, 10)), isomix::Error);
}

TEST(Momentum, FirstModeDecay) {
  const std::size_t n = 128;
  const double dx = 1.0 / n;
  const double dt = 0.002, eta = 1.0, varrho = 0.75;
  isomix::MomentumProblem mp;
  mp.dt = dt;
  mp.dx = dx;
  mp.viscosity = eta;
  mp.varrho = Vector::Constant(n, varrho);
  mp.zeta = Vector::Zero(n);
  mp.f = Vector::Zero(n);
  mp.v_n.resize(n);
  for (std::size_t i = 0; i < n; ++i) mp.v_n[i] = std::sin(kPi * (i + 0.5) * dx);
  const Vector v0 = mp.v_n;
  for (int k = 0; k < 50; ++k) mp.v_n = isomix::solve_momentum(mp);
  const double measured = mp.v_n.dot(v0) / v0.dot(v0);
  const double expected = std::pow(oc::momentum_decay_factor(eta, varrho, 1.0, dt), 50);
  EXPECT_NEAR(measured / expected, 1.0, 0.05);
}

TEST(Momentum, BalancedPressureGradientGivesRest) {
  // zeta_x = f with v^n = 0 keeps v = 0.
  const std::size_t n = 32;
  isomix::MomentumProblem mp;
  mp.dt = 0.1;
  mp.dx = 1.0 / n;
  mp.varrho = Vector::Constant(n, 0.8);
  mp.zeta = Vector::Constant(n, 0.3);
  mp.f = Vector::Zero(n);
  mp.v_n = Vector::Zero(n);
  double res = 1.0;
  const Vector v = isomix::solve_momentum(mp, &res);
  EXPECT_LE(v.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Picard, EquilibriumIsStationary) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0, 4.0})));
  const Grid1D g(32, 1.0);
  isomix::PicardSolver solver(th, ClosureModel::quasi_diagonal(1.0), g, {}, settings(1e-2));
  auto cur = solver.initialize(uniform_state(g, 1, 0.6, 0.3));
  EXPECT_LE(cur.state.zeta.cwiseAbs().maxCoeff(), 1e-14);
  for (int k = 0; k < 5; ++k) {
    cur = solver.advance(cur.state);
    EXPECT_EQ(cur.report.n_iterations, 1u);
    EXPECT_TRUE(cur.report.converged);
  }
  EXPECT_LE((cur.state.varrho.array() - 0.6).abs().maxCoeff(), 1e-14);
  EXPECT_LE((cur.state.q.array() - 0.3).abs().maxCoeff(), 1e-12);
  EXPECT_LE(cur.state.v.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Picard, NeumannCorrectionAtWalls) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0, 4.0})));
  const Grid1D g(16, 1.0);
  isomix::PicardSolver solver(th, ClosureModel::quasi_diagonal(1.0), g, {}, settings(1e-2));
  auto s = uniform_state(g, 1, 0.6, 0.0);
  for (std::size_t i = 0; i < 16; ++i) s.q(0, i) = g.center(i);
  const auto init = solver.initialize(s);
  // A linear profile is replaced near the wall by one with zero slope there:
  // the quadratic through q_0, q_1, q_2 is flat at x = 0.
  const double q0 = init.state.q(0, 0), q1 = init.state.q(0, 1), q2 = init.state.q(0, 2);
  const double slope_at_wall = (-2.0 * q0 + 3.0 * q1 - q2) / g.dx();
  EXPECT_NEAR(slope_at_wall, 0.0, 1e-12);
}

TEST(Picard, DiffusionConservesMassAndDecreasesEnergy) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0})));
  const Grid1D g(64, 1.0);
  isomix::PicardSolver solver(th, ClosureModel::quasi_diagonal(1.0), g, {}, settings(1e-3));
  auto s = uniform_state(g, 0, 0.75, 0.0);
  for (std::size_t i = 0; i < 64; ++i) s.varrho[i] = 0.75 + 0.2 * std::cos(kPi * g.center(i));
  auto cur = solver.initialize(s);
  const double mass0 = cur.state.varrho.sum();
  for (int k = 0; k < 20; ++k) {
    cur = solver.advance(cur.state);
    EXPECT_TRUE(cur.report.converged);
    EXPECT_LT(cur.report.max_ratio(), 1.0);
  }
  EXPECT_NEAR(cur.state.varrho.sum(), mass0, 1e-12 * mass0);
  EXPECT_LE(std::abs(cur.state.zeta.mean()), 1e-14);
}

TEST(Picard, RejectsBadSettings) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0})));
  const Grid1D g(16, 1.0);
  EXPECT_THROW(isomix::PicardSolver(th, ClosureModel::quasi_diagonal(1.0), g, {}, settings(0.0)),
               isomix::Error);
  EXPECT_THROW(Grid1D(4, 1.0), isomix::Error);
}

TEST(Manufactured, QZetaBlockSecondOrder) {
  const auto c = isomix::mms::q_zeta_block(32);
  const auto f = isomix::mms::q_zeta_block(64);
  EXPECT_NEAR(isomix::mms::order(c.q.l2, f.q.l2), 2.0, 0.3);
  EXPECT_NEAR(isomix::mms::order(c.zeta.l2, f.zeta.l2), 2.0, 0.3);
}

TEST(Manufactured, MomentumBlockSecondOrder) {
  const auto c = isomix::mms::momentum_block(32);
  const auto f = isomix::mms::momentum_block(64);
  EXPECT_NEAR(isomix::mms::order(c.l2, f.l2), 2.0, 0.3);
}

TEST(Manufactured, ContinuityFirstOrder) {
  const auto c = isomix::mms::continuity(32);
  const auto f = isomix::mms::continuity(64);
  EXPECT_NEAR(isomix::mms::order(c.l2, f.l2), 1.0, 0.3);
}

TEST(Derivatives, Helpers) {
  const std::size_t n = 8;
  Vector u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>(i);
  const Vector fd = isomix::face_differences(u, 0.5);
  ASSERT_EQ(fd.size(), 7);
  EXPECT_TRUE((fd.array() == 2.0).all());
  const Vector gn = isomix::gradient_neumann(u, 0.5);
  EXPECT_NEAR(gn[3], 2.0, 1e-15);
  EXPECT_NEAR(gn[0], 1.0, 1e-15);  // mirror ghost
}
