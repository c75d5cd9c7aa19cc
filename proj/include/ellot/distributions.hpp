#pragma once

// Elliptical (X = mean + R A U, U uniform on the L2 sphere) and simplicial
// (X = R U, U uniform on the L1 simplex) distributions, their exact moments,
// and seeded samplers.

#include <cstdint>
#include <variant>

#include "ellot/radial.hpp"
#include "ellot/rng.hpp"
#include "ellot/spd.hpp"

namespace ellot {

/// Rows of the returned matrices are points.
using PointSet = Matrix;

class EllipticalDist {
 public:
  EllipticalDist(Vector mean, SpdMatrix scale_root, RadialLaw radial)
      : mean_(std::move(mean)), scale_root_(std::move(scale_root)), radial_(std::move(radial)) {
    if (mean_.size() != scale_root_.dim()) {
      throw DimensionMismatch("elliptical: mean and scale dimensions differ");
    }
    if (!mean_.allFinite()) throw DomainError("elliptical: mean must be finite");
    if (!is_full_rank(scale_root_)) throw SingularError("elliptical: scale matrix must be full rank");
  }

  /// Centered distribution with scale factor A.
  EllipticalDist(const SpdMatrix& scale_root, RadialLaw radial)
      : EllipticalDist(Vector::Zero(scale_root.dim()), scale_root, std::move(radial)) {}

  /// Builds from the scale matrix Sigma = A A^T, using A = Sigma^{1/2}.
  static EllipticalDist from_sigma(Vector mean, const SpdMatrix& sigma, RadialLaw radial) {
    return EllipticalDist(std::move(mean), spd_sqrt(sigma), std::move(radial));
  }

  int dim() const { return scale_root_.dim(); }
  const Vector& mean() const { return mean_; }
  const SpdMatrix& scale_root() const { return scale_root_; }
  const RadialLaw& radial() const { return radial_; }

  EllipticalDist with_radial(RadialLaw radial) const { return {mean_, scale_root_, std::move(radial)}; }

 private:
  Vector mean_;
  SpdMatrix scale_root_;
  RadialLaw radial_;
};

class SimplicialDist {
 public:
  SimplicialDist(int dim, RadialLaw radial) : dim_(dim), radial_(std::move(radial)) {
    if (dim < 1) throw DomainError("simplicial: dimension must be >= 1");
  }

  int dim() const { return dim_; }
  const RadialLaw& radial() const { return radial_; }

  SimplicialDist with_radial(RadialLaw radial) const { return {dim_, std::move(radial)}; }

 private:
  int dim_;
  RadialLaw radial_;
};

using Distribution = std::variant<EllipticalDist, SimplicialDist>;

inline int dim_of(const Distribution& d) {
  return std::visit([](const auto& x) { return x.dim(); }, d);
}

inline const RadialLaw& radial_of(const Distribution& d) {
  return std::visit([](const auto& x) -> const RadialLaw& { return x.radial(); }, d);
}

namespace detail {

// Draws are generated in fixed-size chunks, chunk k on stream k, so any
// partition of the work across threads reproduces the same points.
inline constexpr std::int64_t kSampleChunk = 1 << 16;

template <typename PerPoint>
PointSet sample_chunked(int dim, std::int64_t n, std::uint64_t seed, PerPoint per_point) {
  if (dim < 1) throw DomainError("sample: dimension must be >= 1");
  if (n < 1) throw DomainError("sample: count must be >= 1");
  PointSet out(n, dim);
  Vector scratch(dim);
  for (std::int64_t start = 0, chunk = 0; start < n; start += kSampleChunk, ++chunk) {
    RandomStream rng(seed, static_cast<std::uint64_t>(chunk));
    const std::int64_t end = std::min(n, start + kSampleChunk);
    for (std::int64_t i = start; i < end; ++i) {
      per_point(rng, scratch);
      out.row(i) = scratch.transpose();
    }
  }
  return out;
}

inline void draw_sphere(RandomStream& rng, Vector& v) {
  double norm2 = 0.0;
  do {
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  v /= std::sqrt(norm2);
}

inline void draw_simplex(RandomStream& rng, Vector& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.exponential();
  v /= v.sum();
}

}  // namespace detail

/// n points uniform on the unit L2 sphere (normalized Gaussian vectors).
inline PointSet sample_sphere(int dim, std::int64_t n, std::uint64_t seed) {
  return detail::sample_chunked(dim, n, seed, detail::draw_sphere);
}

/// n points uniform on the unit L1 simplex, i.e. Dirichlet(1, ..., 1).
inline PointSet sample_simplex(int dim, std::int64_t n, std::uint64_t seed) {
  return detail::sample_chunked(dim, n, seed, detail::draw_simplex);
}

inline PointSet sample(const EllipticalDist& dist, std::int64_t n, std::uint64_t seed) {
  const Matrix& a = dist.scale_root().matrix();
  Vector direction(dist.dim());
  return detail::sample_chunked(dist.dim(), n, seed, [&](RandomStream& rng, Vector& out) {
    const double r = dist.radial().quantile(rng.uniform());
    detail::draw_sphere(rng, direction);
    out = dist.mean() + r * (a * direction);
  });
}

inline PointSet sample(const SimplicialDist& dist, std::int64_t n, std::uint64_t seed) {
  return detail::sample_chunked(dist.dim(), n, seed, [&](RandomStream& rng, Vector& out) {
    const double r = dist.radial().quantile(rng.uniform());
    detail::draw_simplex(rng, out);
    out *= r;
  });
}

inline PointSet sample(const Distribution& dist, std::int64_t n, std::uint64_t seed) {
  return std::visit([&](const auto& d) { return sample(d, n, seed); }, dist);
}

/// (E[R^2] / d) A A^T.
inline SpdMatrix covariance(const EllipticalDist& dist) {
  const double m2 = second_moment(dist.radial());
  const Matrix& a = dist.scale_root().matrix();
  return SpdMatrix((m2 / dist.dim()) * (a * a.transpose()));
}

struct Moments {
  Vector mean;
  Matrix covariance;
};

/// Mean E[R] (1/d, ..., 1/d) and covariance E[R^2] Sigma_Dir - (E[R]^2 / d^2) W,
/// where Sigma_Dir is the Dirichlet(1, ..., 1) covariance and W the all-ones matrix.
inline Moments simplicial_moments(const SimplicialDist& dist) {
  const int d = dist.dim();
  const double m1 = first_moment(dist.radial());
  const double m2 = second_moment(dist.radial());
  const double dd = static_cast<double>(d);
  Matrix dirichlet = Matrix::Constant(d, d, -1.0 / (dd * dd * (dd + 1.0)));
  dirichlet.diagonal().setConstant((dd - 1.0) / (dd * dd * (dd + 1.0)));
  // E[U U^T] = Sigma_Dir + W / d^2, so Cov(RU) = E[R^2] E[UU^T] - E[R]^2 W / d^2.
  Matrix cov = m2 * dirichlet + ((m2 - m1 * m1) / (dd * dd)) * Matrix::Ones(d, d);
  return {Vector::Constant(d, m1 / dd), cov};
}

}  // namespace ellot
