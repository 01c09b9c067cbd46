#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isomix/closure.hpp"
#include "isomix/errors.hpp"
#include "isomix_oracles/oracles.hpp"

namespace oc = isomix::oracle;
using isomix::ClosureModel;
using isomix::Frame;
using isomix::Matrix;
using isomix::MixtureSpec;
using isomix::Thermodynamics;
using isomix::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix diffusivities(Eigen::Index n) {
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = 1.0 + 0.5 * std::abs(i - j) + 0.25 * (i + j);
  return d;
}

// Friction Laplacian G_ij = -rho_i rho_j / (varrho D_ij), M = S G^+ S.
Matrix naive_maxwell_stefan(const Matrix& diff, const Vector& rho) {
  const auto n = rho.size();
  const double varrho = rho.sum();
  Matrix g = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = rho[i] * rho[j] / (varrho * diff(i, j));
      g(i, j) -= w;
      g(i, i) += w;
    }
  Matrix s = -rho * rho.transpose() / varrho;
  s.diagonal() += rho;
  const Matrix g_plus = g.completeOrthogonalDecomposition().pseudoInverse();
  return s * g_plus * s;
}

Vector random_rho(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = u(rng);
  return r;
}

}  // namespace

TEST(Closure, QuasiDiagonalClosedForm) {
  const Vector rho = vec({0.2, 0.3, 0.1});
  const Matrix m = ClosureModel::quasi_diagonal(2.5).onsager(rho);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expected = 2.5 * ((i == j ? rho[i] : 0.0) - rho[i] * rho[j] / 0.6);
      EXPECT_NEAR(m(i, j), expected, 1e-15);
    }
}

TEST(Closure, OnsagerStructure) {
  std::mt19937_64 rng(1);
  for (Eigen::Index n : {2, 3, 4}) {
    for (const ClosureModel& c : {ClosureModel::quasi_diagonal(1.0), ClosureModel::maxwell_stefan(diffusivities(n))}) {
      for (int k = 0; k < 50; ++k) {
        const Vector rho = random_rho(rng, n);
        const Matrix m = c.onsager(rho);
        EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LE((m * Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        EXPECT_GE(es.eigenvalues()[0], -1e-14);
        EXPECT_GT(es.eigenvalues()[1], 1e-6 * es.eigenvalues().maxCoeff());
      }
    }
  }
}

TEST(Closure, BinaryMaxwellStefanIsScaledQuasiDiagonal) {
  Matrix d(2, 2);
  d << 0.0, 3.0, 3.0, 0.0;
  const Vector rho = vec({0.4, 0.3});
  const Matrix ms = ClosureModel::maxwell_stefan(d).onsager(rho);
  const Matrix qd = ClosureModel::quasi_diagonal(3.0).onsager(rho);
  EXPECT_LE((ms - qd).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Closure, MaxwellStefanMatchesPseudoInverse) {
  std::mt19937_64 rng(2);
  for (Eigen::Index n : {3, 4}) {
    const Matrix d = diffusivities(n);
    for (int k = 0; k < 50; ++k) {
      const Vector rho = random_rho(rng, n);
      const Matrix fast = ClosureModel::maxwell_stefan(d).onsager(rho);
      const Matrix slow = naive_maxwell_stefan(d, rho);
      EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-12 * slow.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Closure, MaxwellStefanWithTinyDensity) {
  const Matrix d = diffusivities(3);
  const Vector rho = vec({0.6, 0.2, 1e-200});
  const Matrix m = ClosureModel::maxwell_stefan(d).onsager(rho);
  EXPECT_TRUE(m.allFinite());
  EXPECT_LE((m * Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(std::abs(m(2, 2)), 1e-190);
}

TEST(Closure, ReductionMatchesTripleProducts) {
  const Vector vbar = vec({1.0, 1.5, 2.5, 4.0});
  const Frame frame = Frame::build(vbar);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Matrix m = ClosureModel::maxwell_stefan(diffusivities(4)).onsager(random_rho(rng, 4));
    const auto red = isomix::reduce_matrix(frame, m);
    Matrix vb(4, 1);
    vb.col(0) = vbar;
    const Matrix mt = oc::naive_triple_product(frame.pi(), m, frame.pi());
    const Matrix a = oc::naive_triple_product(frame.pi(), m, vb);
    const double d = oc::naive_triple_product(vb, m, vb)(0, 0);
    EXPECT_LE((red.m_tilde - mt).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((red.a_vec - a.col(0)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(red.d_scal, d, 1e-14);
    const Matrix k_ref = mt - a * a.transpose() / d;
    EXPECT_LE((red.k_core - k_ref).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(red.k_core);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Closure, BinaryVolumeMobility) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0})));
  for (double r : {0.51, 0.6, 0.75, 0.9, 0.99}) {
    const auto red = isomix::reduce_closure(ClosureModel::quasi_diagonal(1.0), th, r, Vector::Zero(0));
    EXPECT_NEAR(red.d_scal, oc::binary_d(r), 1e-12) << r;
  }
}

TEST(Closure, DefaultBMatrix) {
  const Vector rho = vec({0.2, 0.15, 0.1});
  const auto b = isomix::matrix_B(ClosureModel::quasi_diagonal(1.0), rho);
  EXPECT_LE((b.B - oc::default_B(rho)).cwiseAbs().maxCoeff(), 1e-12);
  // B is bounded independently of rho.
  EXPECT_LE(b.bound, 3.0);
}

TEST(Closure, DegenerateClosure) {
  const Frame frame = Frame::build(vec({1.0, 2.0, 4.0}));
  try {
    (void)isomix::reduce_matrix(frame, Matrix::Zero(3, 3));
    FAIL();
  } catch (const isomix::Error& e) {
    EXPECT_EQ(e.kind(), isomix::ErrorKind::DegenerateClosure);
  }
}

TEST(Closure, Validation) {
  Matrix asym = diffusivities(3);
  asym(0, 1) = 5.0;
  EXPECT_THROW(ClosureModel::maxwell_stefan(asym).validate(3), isomix::Error);
  EXPECT_THROW(ClosureModel::maxwell_stefan(diffusivities(3)).validate(4), isomix::Error);
  EXPECT_THROW(ClosureModel::quasi_diagonal(0.0).validate(3), isomix::Error);
  EXPECT_NO_THROW(ClosureModel::maxwell_stefan(diffusivities(3)).validate(3));
  EXPECT_THROW((void)ClosureModel::quasi_diagonal(1.0).onsager(vec({0.1, 0.0})), isomix::Error);
}

TEST(Closure, ThresholdDistance) {
  EXPECT_NEAR(isomix::threshold_distance(0.75, 0.5, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(isomix::threshold_distance(0.55, 0.5, 1.0), 0.1, 1e-15);
  EXPECT_NEAR(isomix::threshold_distance(0.99, 0.5, 1.0), 0.01, 1e-15);
}

TEST(Closure, CoefficientsDegenerateLinearlyAtThresholds) {
  const Thermodynamics th(MixtureSpec::ideal(vec({1.0, 2.0, 4.0})));
  std::vector<double> sweep;
  for (double m : {0.1, 0.03, 0.01, 0.003, 0.001}) {
    sweep.push_back(th.varrho_min() * (1.0 + m));
    sweep.push_back(th.varrho_max() * (1.0 - m));
  }
  for (const ClosureModel& c : {ClosureModel::quasi_diagonal(1.0), ClosureModel::maxwell_stefan(diffusivities(3))}) {
    const auto rep = isomix::degeneration_monitor(c, th, sweep, vec({0.2}));
    ASSERT_EQ(rep.points.size(), sweep.size());
    EXPECT_LE(rep.max_ratio, 2.0 * rep.median_ratio);
    for (const auto& p : rep.points) EXPECT_GT(p.d, 0.0);
  }
}
