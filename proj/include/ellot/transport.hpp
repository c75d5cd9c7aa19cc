#pragma once

// Closed-form transport maps and squared 2-Wasserstein distances between
// simplicial distributions and between elliptical distributions.
//
// Elliptical maps act on centered coordinates z = x - mean_source and add
// the target mean back. With R = ||A^{-1} z|| and alpha = F_S^{-1} o F_R:
//
//   linear_psd          z -> M z,                 M = B (B A A B)^{-1/2} B
//   elliptical_radial   z -> alpha(R) / R * z
//   composed            z -> alpha(R) / R * M z
//
// The simplicial map is x -> alpha(||x||_1) / ||x||_1 * x.

#include <cmath>
#include <variant>

#include "ellot/distributions.hpp"

namespace ellot {

namespace maps {

/// Source and target coincide up to the mean; points pass through unchanged.
struct Identity {};

struct SimplicialRadial {
  RadialLaw from;
  RadialLaw to;
};

struct LinearPsd {
  SpdMatrix m;
};

struct EllipticalRadial {
  SpdMatrix a_inv;
  RadialLaw from;
  RadialLaw to;
};

struct Composed {
  SpdMatrix a_inv;
  RadialLaw from;
  RadialLaw to;
  SpdMatrix m;
};

}  // namespace maps

class TransportMap {
 public:
  using Variant =
      std::variant<maps::Identity, maps::SimplicialRadial, maps::LinearPsd, maps::EllipticalRadial, maps::Composed>;

  TransportMap(int dim, Variant variant, Vector source_mean, Vector target_mean)
      : dim_(dim),
        variant_(std::move(variant)),
        source_mean_(std::move(source_mean)),
        target_mean_(std::move(target_mean)) {}

  /// Pure linear map x -> M x (no translation).
  static TransportMap linear(const SpdMatrix& m) {
    return {m.dim(), maps::LinearPsd{m}, Vector::Zero(m.dim()), Vector::Zero(m.dim())};
  }

  int dim() const { return dim_; }
  const Variant& variant() const { return variant_; }
  const Vector& source_mean() const { return source_mean_; }
  const Vector& target_mean() const { return target_mean_; }

  Vector operator()(const Vector& x) const {
    if (x.size() != dim_) throw DimensionMismatch("transport map: point dimension mismatch");
    return std::visit([&](const auto& v) { return apply_impl(v, x); }, variant_);
  }

 private:
  // Scale factor alpha(r) / r, with the origin mapped to the origin.
  static double radial_ratio(const RadialLaw& from, const RadialLaw& to, double r) {
    if (r == 0.0) return 0.0;
    if (from == to) return 1.0;
    return radial_quantile_map(from, to, r) / r;
  }

  Vector apply_impl(const maps::Identity&, const Vector& x) const {
    if (source_mean_ == target_mean_) return x;
    return target_mean_ + (x - source_mean_);
  }

  Vector apply_impl(const maps::SimplicialRadial& v, const Vector& x) const {
    const double r = x.cwiseAbs().sum();
    return radial_ratio(v.from, v.to, r) * x;
  }

  Vector apply_impl(const maps::LinearPsd& v, const Vector& x) const {
    return target_mean_ + v.m.matrix() * (x - source_mean_);
  }

  Vector apply_impl(const maps::EllipticalRadial& v, const Vector& x) const {
    const Vector z = x - source_mean_;
    const double r = (v.a_inv.matrix() * z).norm();
    return target_mean_ + radial_ratio(v.from, v.to, r) * z;
  }

  Vector apply_impl(const maps::Composed& v, const Vector& x) const {
    const Vector z = x - source_mean_;
    const double r = (v.a_inv.matrix() * z).norm();
    return target_mean_ + radial_ratio(v.from, v.to, r) * (v.m.matrix() * z);
  }

  int dim_;
  Variant variant_;
  Vector source_mean_;
  Vector target_mean_;
};

namespace detail {

inline void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

inline double relative_frobenius_gap(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(a.norm(), b.norm());
}

inline bool same_shape(const EllipticalDist& p, const EllipticalDist& q) {
  return p.scale_root().matrix() == q.scale_root().matrix() && p.radial() == q.radial();
}

inline TransportMap identity_map(const EllipticalDist& p, const EllipticalDist& q) {
  return {p.dim(), maps::Identity{}, p.mean(), q.mean()};
}

}  // namespace detail

/// Radial map between simplicial distributions.
inline TransportMap simplicial_map(const SimplicialDist& source, const SimplicialDist& target) {
  detail::require_same_dim(source.dim(), target.dim(), "simplicial_map");
  const int d = source.dim();
  return {d, maps::SimplicialRadial{source.radial(), target.radial()}, Vector::Zero(d),
          Vector::Zero(d)};
}

/// PSD linear map between ellipticals sharing the radial law.
inline TransportMap related_class_map(const EllipticalDist& source, const EllipticalDist& target) {
  detail::require_same_dim(source.dim(), target.dim(), "related_class_map");
  if (!(source.radial() == target.radial())) {
    throw UnsupportedPair("related_class_map: radial laws differ; use general_map");
  }
  if (detail::same_shape(source, target)) return detail::identity_map(source, target);
  return {source.dim(), maps::LinearPsd{monge_matrix(source.scale_root(), target.scale_root())},
          source.mean(), target.mean()};
}

/// Whitened radial map between ellipticals sharing the scale matrix.
inline TransportMap spherical_equiv_map(const EllipticalDist& source,
                                        const EllipticalDist& target) {
  detail::require_same_dim(source.dim(), target.dim(), "spherical_equiv_map");
  if (detail::relative_frobenius_gap(source.scale_root().matrix(),
                                     target.scale_root().matrix()) > 1e-10) {
    throw UnsupportedPair("spherical_equiv_map: scale matrices differ; use general_map");
  }
  if (detail::same_shape(source, target)) return detail::identity_map(source, target);
  return {source.dim(),
          maps::EllipticalRadial{spd_inverse(source.scale_root()), source.radial(),
                                 target.radial()},
          source.mean(), target.mean()};
}

/// Radial-times-PSD map between arbitrary full-rank ellipticals.
inline TransportMap general_map(const EllipticalDist& source, const EllipticalDist& target) {
  detail::require_same_dim(source.dim(), target.dim(), "general_map");
  if (detail::same_shape(source, target)) return detail::identity_map(source, target);
  return {source.dim(),
          maps::Composed{spd_inverse(source.scale_root()), source.radial(), target.radial(),
                         monge_matrix(source.scale_root(), target.scale_root())},
          source.mean(), target.mean()};
}

/// Map between centered multivariate t distributions with scale factors A, B.
inline TransportMap t_map(int dim, double nu_source, const SpdMatrix& a, double nu_target,
                          const SpdMatrix& b) {
  detail::require_same_dim(dim, a.dim(), "t_map");
  detail::require_same_dim(dim, b.dim(), "t_map");
  return general_map(EllipticalDist(a, RadialLaw::t_radial(dim, nu_source)),
                     EllipticalDist(b, RadialLaw::t_radial(dim, nu_target)));
}

/// Picks the most specific closed form: simplicial radial, PSD linear for a
/// shared radial law, whitened radial for a shared scale, else composed.
inline TransportMap transport_map(const Distribution& source, const Distribution& target) {
  if (source.index() != target.index()) {
    throw UnsupportedPair("transport_map: no closed form between a simplicial and an elliptical distribution");
  }
  if (const auto* s = std::get_if<SimplicialDist>(&source)) {
    return simplicial_map(*s, std::get<SimplicialDist>(target));
  }
  const auto& p = std::get<EllipticalDist>(source);
  const auto& q = std::get<EllipticalDist>(target);
  detail::require_same_dim(p.dim(), q.dim(), "transport_map");
  if (p.radial() == q.radial()) return related_class_map(p, q);
  if (detail::relative_frobenius_gap(p.scale_root().matrix(), q.scale_root().matrix()) <= 1e-10) {
    return spherical_equiv_map(p, q);
  }
  return general_map(p, q);
}

/// Applies the map to each row.
inline PointSet apply_map(const TransportMap& map, const PointSet& points) {
  if (points.cols() != map.dim()) throw DimensionMismatch("apply_map: point dimension mismatch");
  PointSet out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = map(points.row(i).transpose()).transpose();
  }
  return out;
}

/// One-dimensional squared W2 between radial laws: int_0^1 (F_A^{-1} - F_B^{-1})^2 du.
inline double radial_w2_squared(const RadialLaw& a, const RadialLaw& b,
                                const UnitRuleOptions* options = nullptr) {
  if (a == b) return 0.0;
  const RadialLaw* laws[] = {&a, &b};
  const double v = detail::integrate_quantiles(laws, options, [](auto q) {
    const double diff = q[0] - q[1];
    return diff * diff;
  });
  detail::require_finite_moment(v, "radial W2");
  return v;
}

/// Squared W2 for simplicial distributions: E[(R - S)^2] E||U||^2 with
/// E||U||^2 = 2 / (d + 1) for U uniform on the simplex.
inline double w2_squared(const SimplicialDist& p, const SimplicialDist& q,
                         const UnitRuleOptions* options = nullptr) {
  detail::require_same_dim(p.dim(), q.dim(), "w2_squared");
  return radial_w2_squared(p.radial(), q.radial(), options) * 2.0 / (p.dim() + 1.0);
}

/// Squared W2 for elliptical distributions:
///   ||m_p - m_q||^2 + (E[R^2] tr(AA) + E[S^2] tr(BB) - 2 E[RS] tr sqrt(ABBA)) / d.
inline double w2_squared(const EllipticalDist& p, const EllipticalDist& q,
                         const UnitRuleOptions* options = nullptr) {
  detail::require_same_dim(p.dim(), q.dim(), "w2_squared");
  const double mean_gap = (p.mean() - q.mean()).squaredNorm();
  const SpdMatrix& a = p.scale_root();
  const SpdMatrix& b = q.scale_root();
  const bool same_scale = a.matrix() == b.matrix();
  if (same_scale && p.radial() == q.radial()) return mean_gap;
  const double d = p.dim();
  if (same_scale) {
    return mean_gap + trace_product(a, a) / d * radial_w2_squared(p.radial(), q.radial(), options);
  }
  const double rr = second_moment(p.radial(), options);
  const double ss = second_moment(q.radial(), options);
  const double rs = p.radial() == q.radial() ? rr : cross_moment(p.radial(), q.radial(), options);
  const double value =
      (rr * trace_product(a, a) + ss * trace_product(b, b) - 2.0 * rs * nuclear_trace(a, b)) / d;
  return mean_gap + std::max(value, 0.0);
}

inline double w2_squared(const Distribution& p, const Distribution& q,
                         const UnitRuleOptions* options = nullptr) {
  if (p.index() != q.index()) {
    throw UnsupportedPair("w2_squared: no closed form between a simplicial and an elliptical distribution");
  }
  if (p.index() == 0) {
    return w2_squared(std::get<EllipticalDist>(p), std::get<EllipticalDist>(q), options);
  }
  return w2_squared(std::get<SimplicialDist>(p), std::get<SimplicialDist>(q), options);
}

}  // namespace ellot
