#include <gtest/gtest.h>

#include "isomix/errors.hpp"
#include "isomix/frame.hpp"

using isomix::Frame;
using isomix::Matrix;
using isomix::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Frame, LastTwoColumnsAreVbarAndOnes) {
  const Frame f = Frame::build(vec({1.0, 2.0, 4.0, 3.0}));
  EXPECT_TRUE(f.xi().col(2).isApprox(vec({1.0, 2.0, 4.0, 3.0})));
  EXPECT_TRUE(f.xi().col(3).isApprox(Vector::Ones(4)));
}

TEST(Frame, DualBasis) {
  for (const Vector& vbar : {vec({1.0, 2.0}), vec({1.0, 2.0, 4.0}), vec({0.5, 1.5, 2.5, 4.0})}) {
    const Frame f = Frame::build(vbar);
    const auto n = vbar.size();
    EXPECT_LE((f.xi().transpose() * f.eta() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Frame, FreeVectorsOrthonormalAndOrthogonalToConstraints) {
  const Vector vbar = vec({1.0, 1.5, 2.5, 4.0});
  const Frame f = Frame::build(vbar);
  const Matrix& pi = f.pi();
  ASSERT_EQ(pi.cols(), 2);
  EXPECT_LE((pi.transpose() * pi - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((pi.transpose() * vbar).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((pi.transpose() * Vector::Ones(4)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Frame, Deterministic) {
  const Vector vbar = vec({1.0, 2.0, 4.0});
  EXPECT_EQ(Frame::build(vbar).xi(), Frame::build(vbar).xi());
}

TEST(Frame, DecomposeComposeRoundTrip) {
  const Frame f = Frame::build(vec({1.0, 1.5, 2.5, 4.0}));
  const Vector w = vec({0.3, -1.2, 2.0, 0.7});
  const auto d = f.decompose(w);
  EXPECT_LE((f.compose(d.q_part, d.vbar_part, d.ones_part) - w).cwiseAbs().maxCoeff(), 1e-14);
  const Vector mu = f.compose(vec({0.5, -0.25}), 1.5, -2.0);
  const auto back = f.decompose(mu);
  EXPECT_NEAR(back.q_part[0], 0.5, 1e-14);
  EXPECT_NEAR(back.q_part[1], -0.25, 1e-14);
  EXPECT_NEAR(back.vbar_part, 1.5, 1e-14);
  EXPECT_NEAR(back.ones_part, -2.0, 1e-14);
}

TEST(Frame, Projectors) {
  const Vector vbar = vec({1.0, 2.0, 4.0});
  const Frame f = Frame::build(vbar);
  const Matrix& p1 = f.proj_perp_ones();
  const Matrix& p2 = f.proj_perp_ones_vbar();
  EXPECT_LE((p1 * Vector::Ones(3)).norm(), 1e-14);
  EXPECT_LE((p2 * Vector::Ones(3)).norm(), 1e-14);
  EXPECT_LE((p2 * vbar).norm(), 1e-14);
  EXPECT_LE((p2 * p2 - p2).norm(), 1e-14);
  EXPECT_LE((p2 - p2.transpose()).norm(), 1e-14);
}

TEST(Frame, ConstantVolumesRejected) {
  try {
    (void)Frame::build(vec({2.0, 2.0}));
    FAIL() << "expected DegenerateVolumes";
  } catch (const isomix::Error& e) {
    EXPECT_EQ(e.kind(), isomix::ErrorKind::DegenerateVolumes);
  }
  EXPECT_THROW((void)Frame::build(vec({1.0, 1.0, 1.0})), isomix::Error);
}

TEST(Frame, BinaryHasNoFreeVectors) {
  const Frame f = Frame::build(vec({1.0, 2.0}));
  EXPECT_EQ(f.n_reduced(), 0u);
  EXPECT_EQ(f.pi().cols(), 0);
  EXPECT_GT(f.condition_number(), 1.0);
}
