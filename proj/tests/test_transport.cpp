#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ellot/transport.hpp"
#include "ellot/verify.hpp"

using namespace ellot;

namespace {

SpdMatrix diag(double a, double b) { return SpdMatrix::diagonal(Vector{{a, b}}); }

SpdMatrix random_spd(int d, RandomStream& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  return SpdMatrix(g * g.transpose() / d + 0.2 * Matrix::Identity(d, d));
}

}  // namespace

TEST(SimplicialMap, Examples) {
  const SimplicialDist r(2, RadialLaw::dirac(1.0));
  const SimplicialDist s(2, RadialLaw::dirac(2.0));
  const Vector y = simplicial_map(r, s)(Vector{{0.3, 0.7}});
  EXPECT_NEAR(y(0), 0.6, 1e-15);
  EXPECT_NEAR(y(1), 1.4, 1e-15);
  const Vector x{{0.2, 0.5}};
  EXPECT_EQ(simplicial_map(r, r)(x), x);

  // Atoms and coordinates are dyadic so each L1 radius lands exactly on its atom.
  const RadialLaw emp = RadialLaw::empirical({0.5, 1.0, 1.75, 2.25, 3.125});
  const TransportMap twice = simplicial_map(SimplicialDist(2, emp), SimplicialDist(2, RadialLaw::scaled(2.0, emp)));
  PointSet pts(5, 2);
  pts << 0.25, 0.25, 0.5, 0.5, 1.5, 0.25, 0.125, 2.125, 3.0, 0.125;
  EXPECT_LT((apply_map(twice, pts) - 2.0 * pts).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RelatedClassMap, Examples) {
  const EllipticalDist p(diag(1.0, 2.0), RadialLaw::chi(2));
  const EllipticalDist q(diag(3.0, 1.0), RadialLaw::chi(2));
  const Vector y = related_class_map(p, q)(Vector{{1.0, 1.0}});
  EXPECT_NEAR(y(0), 3.0, 1e-15);
  EXPECT_NEAR(y(1), 0.5, 1e-15);
  const Vector x{{0.25, -4.0}};
  EXPECT_EQ(related_class_map(p, p)(x), x);
  EXPECT_THROW(related_class_map(p, EllipticalDist(diag(3.0, 1.0), RadialLaw::t_radial(2, 4.0))),
               UnsupportedPair);
}

TEST(RelatedClassMap, TranslatesMeans) {
  const EllipticalDist p(Vector{{1.0, 2.0}}, diag(1.0, 2.0), RadialLaw::chi(2));
  const EllipticalDist q(Vector{{-1.0, 0.0}}, diag(3.0, 1.0), RadialLaw::chi(2));
  const Vector y = related_class_map(p, q)(Vector{{2.0, 3.0}});
  EXPECT_NEAR(y(0), -1.0 + 3.0, 1e-15);
  EXPECT_NEAR(y(1), 0.5, 1e-15);
}

TEST(SphericalEquivMap, Examples) {
  const EllipticalDist p(SpdMatrix::identity(2), RadialLaw::dirac(1.0));
  const EllipticalDist q(SpdMatrix::identity(2), RadialLaw::dirac(2.5));
  const Vector x{{0.6, 0.8}};
  EXPECT_LT((spherical_equiv_map(p, q)(x) - 2.5 * x).norm(), 1e-15);
  EXPECT_EQ(spherical_equiv_map(p, p)(x), x);
  EXPECT_THROW(spherical_equiv_map(p, EllipticalDist(diag(1.0, 2.0), RadialLaw::chi(2))), UnsupportedPair);
}

TEST(SphericalEquivMap, PushforwardCovarianceScalesByNine) {
  const RadialLaw chi2 = RadialLaw::chi(2);
  const EllipticalDist p(SpdMatrix::identity(2), chi2);
  const TransportMap map = spherical_equiv_map(p, EllipticalDist(SpdMatrix::identity(2), RadialLaw::scaled(3.0, chi2)));
  const std::int64_t n = 400000;
  const PointSet y = apply_map(map, sample(p, n, 2));
  const Matrix cov = y.transpose() * y / double(n);
  EXPECT_LT((cov - 9.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.06);
}

TEST(GeneralMap, DegeneratesToRelatedClass) {
  RandomStream rng(3);
  const SpdMatrix a = random_spd(3, rng);
  const SpdMatrix b = random_spd(3, rng);
  const RadialLaw law = RadialLaw::t_radial(3, 6.0);
  const EllipticalDist p(a, law);
  const EllipticalDist q(b, law);
  const TransportMap g = general_map(p, q);
  const TransportMap r = related_class_map(p, q);
  const PointSet pts = sample(p, 100, 4);
  EXPECT_LT((apply_map(g, pts) - apply_map(r, pts)).cwiseAbs().maxCoeff(), 1e-12);
  const Vector x{{0.1, 0.2, 0.3}};
  EXPECT_EQ(general_map(p, p)(x), x);
}

TEST(TMap, DegenerateCases) {
  const SpdMatrix a = diag(1.0, 2.0);
  const SpdMatrix b = diag(3.0, 1.0);
  const Vector x{{0.7, -0.2}};
  EXPECT_EQ(t_map(2, 5.0, a, 5.0, a)(x), x);
  const TransportMap same_nu = t_map(2, 5.0, a, 5.0, b);
  EXPECT_LT((same_nu(x) - monge_matrix(a, b).matrix() * x).norm(), 1e-14);
}

TEST(TMap, RadialScalingOnUnitSphere) {
  // A = B = I: x with ||x|| = 1 maps to q x with q = F_27^{-1}(F_3(1)).
  const TransportMap m = t_map(2, 3.0, SpdMatrix::identity(2), 27.0, SpdMatrix::identity(2));
  const Vector x{{0.6, 0.8}};
  const RadialLaw t3 = RadialLaw::t_radial(2, 3.0);
  const RadialLaw t27 = RadialLaw::t_radial(2, 27.0);
  const double q = t27.quantile(t3.cdf(1.0));
  EXPECT_LT((m(x) - q * x).norm(), 1e-13);
  // Cross-check q by quantile matching of 10^6 simulated norms of each law.
  const std::int64_t n = 1000000;
  const PointSet s3 = sample(EllipticalDist(SpdMatrix::identity(2), t3), n, 5);
  const PointSet s27 = sample(EllipticalDist(SpdMatrix::identity(2), t27), n, 6);
  std::vector<double> r3(n);
  std::vector<double> r27(n);
  for (std::int64_t i = 0; i < n; ++i) {
    r3[i] = s3.row(i).norm();
    r27[i] = s27.row(i).norm();
  }
  std::sort(r3.begin(), r3.end());
  std::sort(r27.begin(), r27.end());
  const auto rank = std::lower_bound(r3.begin(), r3.end(), 1.0) - r3.begin();
  EXPECT_NEAR(r27[rank], q, 0.01);
}

TEST(TransportMap, AutoSelection) {
  const EllipticalDist p(diag(1.0, 2.0), RadialLaw::chi(2));
  const EllipticalDist q(diag(3.0, 1.0), RadialLaw::chi(2));
  const EllipticalDist r(diag(1.0, 2.0), RadialLaw::t_radial(2, 5.0));
  const EllipticalDist s(diag(3.0, 1.0), RadialLaw::t_radial(2, 5.0));
  EXPECT_TRUE(std::holds_alternative<maps::LinearPsd>(transport_map(p, q).variant()));
  EXPECT_TRUE(std::holds_alternative<maps::EllipticalRadial>(transport_map(p, r).variant()));
  EXPECT_TRUE(std::holds_alternative<maps::Composed>(transport_map(p, s).variant()));
  EXPECT_TRUE(std::holds_alternative<maps::Identity>(transport_map(p, p).variant()));
  EXPECT_THROW(transport_map(p, SimplicialDist(2, RadialLaw::chi(2))), UnsupportedPair);
  EXPECT_THROW(apply_map(transport_map(p, q), PointSet::Zero(3, 3)), DimensionMismatch);
}

TEST(W2Squared, Examples) {
  const EllipticalDist a(SpdMatrix::identity(2), RadialLaw::chi(2));
  const EllipticalDist b(SpdMatrix(2.0 * Matrix::Identity(2, 2)), RadialLaw::chi(2));
  EXPECT_NEAR(w2_squared(a, b), 2.0, 1e-12);
  EXPECT_EQ(w2_squared(a, a), 0.0);
  const EllipticalDist shifted(Vector{{3.0, 4.0}}, SpdMatrix(2.0 * Matrix::Identity(2, 2)), RadialLaw::chi(2));
  EXPECT_NEAR(w2_squared(a, shifted), 2.0 + 25.0, 1e-11);
  EXPECT_THROW(w2_squared(Distribution(a), Distribution(SimplicialDist(2, RadialLaw::chi(2)))), UnsupportedPair);
  EXPECT_THROW(w2_squared(a, EllipticalDist(SpdMatrix::identity(3), RadialLaw::chi(3))), DimensionMismatch);
}

// E||U||^2 = 2/(d+1) for U uniform on the simplex, so dirac(1) -> dirac(2) in d = 2
// (the map x -> 2x) costs E||X||^2 = 2/3.
TEST(W2Squared, SimplicialDirac) {
  const SimplicialDist r(2, RadialLaw::dirac(1.0));
  const SimplicialDist s(2, RadialLaw::dirac(2.0));
  EXPECT_NEAR(w2_squared(r, s), 2.0 / 3.0, 1e-13);
  EXPECT_EQ(w2_squared(r, r), 0.0);
}

TEST(W2Squared, GaussianMatchesCovarianceFormula) {
  // Oracle: scipy sqrtm of the covariance cross term.
  const SpdMatrix a(Matrix{{2.0, 0.3, 0.1}, {0.3, 1.5, -0.2}, {0.1, -0.2, 1.0}});
  const SpdMatrix b(Matrix{{1.0, -0.4, 0.0}, {-0.4, 2.5, 0.6}, {0.0, 0.6, 0.8}});
  const double w = w2_squared(EllipticalDist(a, RadialLaw::chi(3)), EllipticalDist(b, RadialLaw::chi(3)));
  EXPECT_NEAR(w, 4.1860757313463068, 1e-11);
}

TEST(W2Squared, RadialOnly) {
  EXPECT_NEAR(radial_w2_squared(RadialLaw::dirac(1.0), RadialLaw::dirac(3.0)), 4.0, 1e-13);
  EXPECT_NEAR(radial_w2_squared(RadialLaw::chi(2), RadialLaw::scaled(2.0, RadialLaw::chi(2))), 2.0, 1e-12);
  EXPECT_NEAR(radial_w2_squared(RadialLaw::chi(2), RadialLaw::t_radial(2, 5.0)), 0.27201958575798074, 1e-11);
}

TEST(W2Squared, MatchesCouplingCost) {
  const EllipticalDist p(diag(1.0, 2.0), RadialLaw::t_radial(2, 6.0));
  const EllipticalDist q(diag(3.0, 1.0), RadialLaw::chi(2));
  const TransportMap map = general_map(p, q);
  const auto est = empirical_coupling_cost(p, as_point_map(map), 100000, 7);
  EXPECT_NEAR(est.mean, w2_squared(p, q), 4.0 * est.standard_error);
}
