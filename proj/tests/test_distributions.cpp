#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ellot/distributions.hpp"
#include "ellot/verify.hpp"

using namespace ellot;

TEST(SampleSphere, Dimension1IsSigns) {
  const PointSet p = sample_sphere(1, 1000, 1);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_EQ(std::abs(p(i, 0)), 1.0);
}

TEST(SampleSphere, MomentsMatch) {
  const std::int64_t n = 1000000;
  const PointSet p3 = sample_sphere(3, n, 2);
  EXPECT_LT(p3.colwise().mean().cwiseAbs().maxCoeff(), 4.0 / std::sqrt(double(n)));
  EXPECT_LT((p3.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-15);
  const PointSet p2 = sample_sphere(2, n, 3);
  const Matrix second = p2.transpose() * p2 / double(n);
  EXPECT_LT((second - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.005);
}

TEST(SampleSimplex, Dimension1IsOne) {
  const PointSet p = sample_simplex(1, 100, 4);
  EXPECT_TRUE((p.array() == 1.0).all());
}

TEST(SampleSimplex, UniformMarginalAndMean) {
  const std::int64_t n = 1000000;
  const PointSet p2 = sample_simplex(2, n, 5);
  std::vector<double> first(p2.col(0).data(), p2.col(0).data() + n);
  EXPECT_LT(ks_statistic(first, [](double x) { return std::clamp(x, 0.0, 1.0); }), 0.0043);
  const PointSet p3 = sample_simplex(3, n, 6);
  EXPECT_LT((p3.colwise().mean().array() - 1.0 / 3.0).abs().maxCoeff(), 0.002);
  EXPECT_LT((p3.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-15);
}

TEST(Sample, DeterministicAndChunkIndependent) {
  const EllipticalDist e(SpdMatrix::identity(2), RadialLaw::t_radial(2, 4.0));
  const PointSet a = sample(e, 70000, 42);
  const PointSet b = sample(e, 70000, 42);
  EXPECT_TRUE((a.array() == b.array()).all());
  // A shorter request reproduces the prefix.
  const PointSet c = sample(e, 1000, 42);
  EXPECT_TRUE((a.topRows(1000).array() == c.array()).all());
  EXPECT_FALSE((sample(e, 1000, 43).array() == c.array()).all());
}

TEST(Sample, DegenerateRadials) {
  Vector mean{{1.0, -2.0}};
  const EllipticalDist e(mean, SpdMatrix::identity(2), RadialLaw::dirac(0.0));
  const PointSet p = sample(e, 100, 7);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_EQ(Vector(p.row(i).transpose()), mean);
  const PointSet s = sample(SimplicialDist(2, RadialLaw::dirac(1.0)), 1000, 8);
  EXPECT_TRUE((s.array() >= 0.0).all());
  EXPECT_LT((s.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-15);
}

TEST(Sample, GaussianCovariance) {
  const std::int64_t n = 1000000;
  const PointSet p = sample(EllipticalDist(SpdMatrix::identity(2), RadialLaw::chi(2)), n, 9);
  const Matrix cov = p.transpose() * p / double(n);
  EXPECT_LT((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.005);
}

TEST(Covariance, ClosedForms) {
  EXPECT_TRUE(covariance(EllipticalDist(SpdMatrix::identity(3), RadialLaw::chi(3))).matrix().isIdentity(1e-12));
  const Matrix t = covariance(EllipticalDist(SpdMatrix::identity(2), RadialLaw::t_radial(2, 5.0))).matrix();
  EXPECT_TRUE(t.isApprox(Matrix::Identity(2, 2) * 5.0 / 3.0, 1e-10));
  EXPECT_TRUE(covariance(EllipticalDist(SpdMatrix::identity(2), RadialLaw::dirac(0.0))).matrix().isZero());
  // Scale factor enters as A A^T.
  const SpdMatrix a(Matrix{{2.0, 0.5}, {0.5, 1.0}});
  const Matrix c = covariance(EllipticalDist(a, RadialLaw::chi(2))).matrix();
  EXPECT_TRUE(c.isApprox(a.matrix() * a.matrix(), 1e-12));
}

TEST(Elliptical, FromSigmaRootsTheScale) {
  const SpdMatrix sigma(Matrix{{4.0, 0.0}, {0.0, 9.0}});
  const auto e = EllipticalDist::from_sigma(Vector::Zero(2), sigma, RadialLaw::chi(2));
  EXPECT_TRUE(e.scale_root().matrix().isApprox(Matrix{{2.0, 0.0}, {0.0, 3.0}}, 1e-15));
}

TEST(Elliptical, Validation) {
  EXPECT_THROW(EllipticalDist(Vector::Zero(3), SpdMatrix::identity(2), RadialLaw::chi(2)),
               DimensionMismatch);
  EXPECT_THROW(EllipticalDist(SpdMatrix(Matrix{{1.0, 1.0}, {1.0, 1.0}}), RadialLaw::chi(2)), SingularError);
  EXPECT_THROW(SimplicialDist(0, RadialLaw::chi(1)), DomainError);
}

TEST(SimplicialMoments, DiracExamples) {
  const auto m = simplicial_moments(SimplicialDist(2, RadialLaw::dirac(1.0)));
  EXPECT_TRUE(m.mean.isApprox(Vector{{0.5, 0.5}}));
  const Matrix expected{{1.0 / 12, -1.0 / 12}, {-1.0 / 12, 1.0 / 12}};
  EXPECT_LT((m.covariance - expected).cwiseAbs().maxCoeff(), 1e-15);
  const auto z = simplicial_moments(SimplicialDist(4, RadialLaw::dirac(0.0)));
  EXPECT_TRUE(z.mean.isZero());
  EXPECT_TRUE(z.covariance.isZero());
}

TEST(SimplicialMoments, MatchMonteCarlo) {
  const SimplicialDist s(3, RadialLaw::chi(3));
  const auto r = moment_check(s, 500000, 10);
  EXPECT_TRUE(r.passed) << r.statistic;
}
