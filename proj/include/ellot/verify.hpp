#pragma once

// Monte Carlo and finite-difference checks of the closed forms: coupling
// cost against w2_squared, radial-norm pushforward laws (one-sample KS),
// the monotonicity and Jacobian-symmetry conditions for optimality, and
// covariance moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ellot/transport.hpp"

namespace ellot {

/// A check outcome. `statistic` is oriented so that passed <=> statistic <= threshold.
struct VerificationReport {
  std::string check_name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  std::string note;
};

inline VerificationReport make_report(std::string name, double statistic, double threshold,
                                      std::int64_t n, std::uint64_t seed, std::string note = {}) {
  return {std::move(name), statistic, threshold, n, seed, statistic <= threshold, std::move(note)};
}

using PointMap = std::function<Vector(const Vector&)>;

inline PointMap as_point_map(const TransportMap& map) {
  return [map](const Vector& x) { return map(x); };
}

/// Independent per-check seed derived from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct CostEstimate {
  double mean;
  double standard_error;
};

/// Mean of ||X - phi(X)||^2 over n draws of X from `dist`, with its standard error.
inline CostEstimate empirical_coupling_cost(const Distribution& dist, const PointMap& map,
                                            std::int64_t n, std::uint64_t seed) {
  if (n < 1000) throw DomainError("empirical_coupling_cost: need at least 1000 samples");
  const PointSet xs = sample(dist, n, seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    const double c = (x - map(x)).squaredNorm();
    const double delta = c - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (c - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n))};
}

/// Radial norm used to read off the target's radial variable.
struct L1Norm {};
struct Whitened {
  SpdMatrix inverse_scale;  // B^{-1}
  Vector center;            // target mean
};
using Whitener = std::variant<Whitened, L1Norm>;

/// One-sample Kolmogorov-Smirnov statistic of `values` against a CDF. The
/// CDF is read a relative 1e-12 either side of each value so that draws
/// sitting on an atom up to roundoff are not counted as misses.
inline double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
  constexpr double kSlack = 1e-12;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    const double hi = cdf(x + kSlack * std::abs(x));
    const double lo = cdf(x - kSlack * std::abs(x));
    d = std::max({d, (i + 1) / n - hi, lo - i / n});
  }
  return d;
}

/// KS test of the radial norms of phi(X) against the target radial CDF at
/// alpha = 0.01 (threshold 1.63 / sqrt(n)).
inline VerificationReport ks_pushforward(const Distribution& dist, const PointMap& map,
                                         const RadialLaw& target_radial, const Whitener& whitener,
                                         std::int64_t n, std::uint64_t seed,
                                         std::string name = "ks_pushforward") {
  if (n < 10000) throw DomainError("ks_pushforward: need at least 10^4 samples");
  const PointSet xs = sample(dist, n, seed);
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector y = map(xs.row(i).transpose());
    norms[i] = std::visit(
        [&](const auto& w) -> double {
          using W = std::decay_t<decltype(w)>;
          if constexpr (std::is_same_v<W, L1Norm>) {
            return y.cwiseAbs().sum();
          } else {
            return (w.inverse_scale.matrix() * (y - w.center)).norm();
          }
        },
        whitener);
  }
  const double stat = ks_statistic(std::move(norms), [&](double r) { return target_radial.cdf(r); });
  return make_report(std::move(name), stat, 1.63 / std::sqrt(static_cast<double>(n)), n, seed);
}

/// Minimum of <x - y, phi(x) - phi(y)> over random pairs in a box. The
/// report's statistic is the negated minimum; threshold 1e-9.
inline VerificationReport monotonicity_check(const PointMap& map, int dim, int n_pairs,
                                             double box_radius, std::uint64_t seed,
                                             const Vector& center = Vector(),
                                             bool positive_orthant = false,
                                             std::string name = "monotonicity") {
  if (n_pairs < 100) throw DomainError("monotonicity_check: need at least 100 pairs");
  const Vector c = center.size() == dim ? center : Vector::Zero(dim);
  RandomStream rng(seed);
  auto draw = [&] {
    Vector x(dim);
    for (int j = 0; j < dim; ++j) {
      const double u = rng.uniform();
      x(j) = positive_orthant ? box_radius * u : c(j) + box_radius * (2.0 * u - 1.0);
    }
    return x;
  };
  double min_inner = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_pairs; ++k) {
    const Vector x = draw();
    const Vector y = draw();
    min_inner = std::min(min_inner, (x - y).dot(map(x) - map(y)));
  }
  return make_report(std::move(name), -min_inner, 1e-9, n_pairs, seed,
                     "min inner product " + std::to_string(min_inner));
}

/// Largest |J - J^T| entry of the central-difference Jacobian over `points`.
/// Points within 10 * step of the origin (or of `center`) are skipped.
inline VerificationReport jacobian_symmetry_check(const PointMap& map, const PointSet& points,
                                                  double step, const Vector& center = Vector(),
                                                  std::string name = "jacobian_symmetry") {
  const auto dim = points.cols();
  const Vector c = center.size() == dim ? center : Vector::Zero(dim);
  double worst = 0.0;
  int skipped = 0;
  int used = 0;
  Matrix jac(dim, dim);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector x = points.row(i).transpose();
    if ((x - c).norm() <= 10.0 * step) {
      ++skipped;
      continue;
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      Vector xp = x;
      Vector xm = x;
      xp(j) += step;
      xm(j) -= step;
      jac.col(j) = (map(xp) - map(xm)) / (2.0 * step);
    }
    worst = std::max(worst, (jac - jac.transpose()).cwiseAbs().maxCoeff());
    ++used;
  }
  std::string note = std::to_string(used) + " points";
  if (skipped > 0) note += ", " + std::to_string(skipped) + " skipped near origin";
  return make_report(std::move(name), worst, 1e-5, used, 0, std::move(note));
}

/// Max entrywise |empirical covariance - exact covariance| in standard-error units.
inline VerificationReport moment_check(const Distribution& dist, std::int64_t n, std::uint64_t seed,
                                       std::string name = "moment") {
  if (n < 100000) throw DomainError("moment_check: need at least 10^5 samples");
  const PointSet xs = sample(dist, n, seed);
  const int d = dim_of(dist);
  Matrix exact;
  Vector exact_mean;
  if (const auto* e = std::get_if<EllipticalDist>(&dist)) {
    exact = covariance(*e).matrix();
    exact_mean = e->mean();
  } else {
    const auto m = simplicial_moments(std::get<SimplicialDist>(dist));
    exact = m.covariance;
    exact_mean = m.mean;
  }
  const Vector mean = xs.colwise().mean().transpose();
  const Matrix centered = xs.rowwise() - mean.transpose();
  double worst = 0.0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const Vector prod = centered.col(a).cwiseProduct(centered.col(b));
      const double cov = prod.mean();
      const double var = (prod.array() - cov).square().sum() / static_cast<double>(n - 1);
      const double se = std::sqrt(var / static_cast<double>(n));
      const double gap = std::abs(cov - exact(a, b));
      if (se > 0.0) {
        worst = std::max(worst, gap / se);
      } else if (gap > 0.0) {
        worst = std::numeric_limits<double>::infinity();
      }
    }
  }
  return make_report(std::move(name), worst, 5.0, n, seed);
}

/// A source/target pair with its closed-form map, used by the report suite.
struct Scenario {
  std::string name;
  int map_class;  // 1 simplicial, 2 related class, 3 common scale, 4 general
  Distribution source;
  Distribution target;
  TransportMap map;
  bool finite_cost_variance = true;  // fourth moments finite on both sides
};

namespace detail {

inline SpdMatrix random_spd(int dim, RandomStream& rng, double ridge = 0.25) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  return SpdMatrix(g * g.transpose() / dim + ridge * Matrix::Identity(dim, dim));
}

inline Scenario elliptical_scenario(std::string name, int map_class, EllipticalDist source,
                                    EllipticalDist target) {
  TransportMap map = map_class == 2   ? related_class_map(source, target)
                     : map_class == 3 ? spherical_equiv_map(source, target)
                                    : general_map(source, target);
  return {std::move(name), map_class, std::move(source), std::move(target), std::move(map)};
}

inline Scenario simplicial_scenario(std::string name, SimplicialDist source, SimplicialDist target) {
  TransportMap map = simplicial_map(source, target);
  return {std::move(name), 1, std::move(source), std::move(target), std::move(map)};
}

}  // namespace detail

/// Fixed grid: three parameterizations per map class, plus the heavy-tailed
/// t map (nu 3 -> 27, diagonal scales) whose cost has infinite variance.
inline std::vector<Scenario> standard_scenarios() {
  RandomStream rng(20240601);
  const auto diag = [](std::initializer_list<double> v) {
    return SpdMatrix::diagonal(Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size())));
  };
  std::vector<Scenario> out;
  out.push_back(detail::simplicial_scenario("simplicial/dirac-scaling-d2",
                                            SimplicialDist(2, RadialLaw::dirac(1.0)),
                                            SimplicialDist(2, RadialLaw::dirac(2.0))));
  out.push_back(detail::simplicial_scenario(
      "simplicial/chi-proportional-d3", SimplicialDist(3, RadialLaw::chi(3)),
      SimplicialDist(3, RadialLaw::scaled(2.5, RadialLaw::chi(3)))));
  out.push_back(detail::simplicial_scenario("simplicial/chi4-to-t5-d2",
                                            SimplicialDist(2, RadialLaw::chi(4)),
                                            SimplicialDist(2, RadialLaw::t_radial(2, 5.0))));

  out.push_back(detail::elliptical_scenario("related/gaussian-diagonal-d2", 2,
                                            EllipticalDist(diag({1.0, 2.0}), RadialLaw::chi(2)),
                                            EllipticalDist(diag({3.0, 1.0}), RadialLaw::chi(2))));
  {
    const SpdMatrix a = detail::random_spd(3, rng);
    const SpdMatrix b = detail::random_spd(3, rng);
    out.push_back(detail::elliptical_scenario(
        "related/t6-random-scales-d3", 2, EllipticalDist(a, RadialLaw::t_radial(3, 6.0)),
        EllipticalDist(b, RadialLaw::t_radial(3, 6.0))));
  }
  {
    const SpdMatrix a = detail::random_spd(5, rng);
    const SpdMatrix b = detail::random_spd(5, rng);
    Vector ma = Vector::LinSpaced(5, -1.0, 1.0);
    Vector mb = Vector::Constant(5, 0.5);
    out.push_back(detail::elliptical_scenario("related/gaussian-random-means-d5", 2,
                                              EllipticalDist(ma, a, RadialLaw::chi(5)),
                                              EllipticalDist(mb, b, RadialLaw::chi(5))));
  }

  out.push_back(detail::elliptical_scenario(
      "spherical/chi-scaled-identity-d2", 3, EllipticalDist(SpdMatrix::identity(2), RadialLaw::chi(2)),
      EllipticalDist(SpdMatrix::identity(2), RadialLaw::scaled(3.0, RadialLaw::chi(2)))));
  out.push_back(detail::elliptical_scenario(
      "spherical/chi-to-t5-identity-d3", 3, EllipticalDist(SpdMatrix::identity(3), RadialLaw::chi(3)),
      EllipticalDist(SpdMatrix::identity(3), RadialLaw::t_radial(3, 5.0))));
  {
    const SpdMatrix a(Matrix{{2.0, 0.5}, {0.5, 1.0}});
    out.push_back(detail::elliptical_scenario(
        "spherical/t5-to-t27-correlated-d2", 3, EllipticalDist(a, RadialLaw::t_radial(2, 5.0)),
        EllipticalDist(a, RadialLaw::t_radial(2, 27.0))));
  }

  out.push_back(detail::elliptical_scenario(
      "general/t5-to-t27-diagonal-d2", 4, EllipticalDist(diag({1.0, 2.0}), RadialLaw::t_radial(2, 5.0)),
      EllipticalDist(diag({3.0, 1.0}), RadialLaw::t_radial(2, 27.0))));
  out.push_back(detail::elliptical_scenario(
      "general/chi-to-t6-reciprocal-diagonal-d2", 4, EllipticalDist(diag({1.0, 2.0}), RadialLaw::chi(2)),
      EllipticalDist(diag({2.0, 1.0}), RadialLaw::t_radial(2, 6.0))));
  {
    const SpdMatrix a = detail::random_spd(3, rng);
    const SpdMatrix b = detail::random_spd(3, rng);
    Vector ma(3);
    ma << 1.0, -2.0, 0.5;
    out.push_back(detail::elliptical_scenario(
        "general/chi-to-t8-random-means-d3", 4, EllipticalDist(ma, a, RadialLaw::chi(3)),
        EllipticalDist(Vector::Zero(3), b, RadialLaw::t_radial(3, 8.0))));
  }

  Scenario heavy = detail::elliptical_scenario(
      "general/t3-to-t27-diagonal-d2", 4, EllipticalDist(diag({1.0, 2.0}), RadialLaw::t_radial(2, 3.0)),
      EllipticalDist(diag({3.0, 1.0}), RadialLaw::t_radial(2, 27.0)));
  heavy.finite_cost_variance = false;
  out.push_back(std::move(heavy));
  return out;
}

/// Radial norm matching a scenario's target family.
inline Whitener target_whitener(const Distribution& target) {
  if (const auto* e = std::get_if<EllipticalDist>(&target)) {
    return Whitened{spd_inverse(e->scale_root()), e->mean()};
  }
  return L1Norm{};
}

inline Vector source_center(const Distribution& source) {
  if (const auto* e = std::get_if<EllipticalDist>(&source)) return e->mean();
  return Vector::Zero(dim_of(source));
}

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  std::int64_t cost_samples = 1000000;
  std::int64_t ks_samples = 100000;
  std::int64_t moment_samples = 200000;
  int monotone_pairs = 500;
  int jacobian_points = 50;
  double jacobian_step = 1e-5;
  double box_radius = 3.0;
};

/// Closed-form cost vs Monte Carlo (4 standard errors).
inline VerificationReport cost_report(const Scenario& s, std::int64_t n, std::uint64_t seed) {
  const double exact = w2_squared(s.source, s.target);
  const auto est = empirical_coupling_cost(s.source, as_point_map(s.map), n, seed);
  const double z = std::abs(est.mean - exact) / est.standard_error;
  return make_report(s.name + "/cost", z, 4.0, n, seed,
                     "closed form " + std::to_string(exact) + ", empirical " +
                         std::to_string(est.mean) + " +- " + std::to_string(est.standard_error));
}

inline VerificationReport pushforward_report(const Scenario& s, std::int64_t n, std::uint64_t seed) {
  return ks_pushforward(s.source, as_point_map(s.map), radial_of(s.target), target_whitener(s.target),
                        n, seed, s.name + "/ks");
}

inline VerificationReport monotonicity_report(const Scenario& s, const SuiteOptions& o,
                                              std::uint64_t seed) {
  const bool simplicial = std::holds_alternative<SimplicialDist>(s.source);
  return monotonicity_check(as_point_map(s.map), dim_of(s.source), o.monotone_pairs, o.box_radius,
                            seed, source_center(s.source), simplicial, s.name + "/monotone");
}

inline VerificationReport jacobian_report(const Scenario& s, const SuiteOptions& o,
                                          std::uint64_t seed) {
  // Evaluation points are draws from the source itself (interior of its support).
  const PointSet pts = sample(s.source, o.jacobian_points, seed);
  auto report = jacobian_symmetry_check(as_point_map(s.map), pts, o.jacobian_step,
                                        source_center(s.source), s.name + "/jacobian");
  report.seed = seed;
  return report;
}

/// Every check on every scenario, plus moment checks and negative controls.
inline std::vector<VerificationReport> run_report_suite(const SuiteOptions& o = {}) {
  std::vector<VerificationReport> out;
  std::uint64_t index = 0;
  for (const auto& s : standard_scenarios()) {
    if (s.finite_cost_variance) out.push_back(cost_report(s, o.cost_samples, derive_seed(o.seed, index++)));
    out.push_back(pushforward_report(s, o.ks_samples, derive_seed(o.seed, index++)));
    out.push_back(monotonicity_report(s, o, derive_seed(o.seed, index++)));
    out.push_back(jacobian_report(s, o, derive_seed(o.seed, index++)));
  }
  const std::vector<std::pair<std::string, Distribution>> moment_cases = {
      {"moment/gaussian-identity-d3", EllipticalDist(SpdMatrix::identity(3), RadialLaw::chi(3))},
      {"moment/t5-identity-d2", EllipticalDist(SpdMatrix::identity(2), RadialLaw::t_radial(2, 5.0))},
      {"moment/simplicial-chi3-d3", SimplicialDist(3, RadialLaw::chi(3))},
      {"moment/dirac-zero-d2", EllipticalDist(SpdMatrix::identity(2), RadialLaw::dirac(0.0))},
  };
  for (const auto& [name, dist] : moment_cases) {
    out.push_back(moment_check(dist, o.moment_samples, derive_seed(o.seed, index++), name));
  }
  // Negative controls: a corrupted target law and a map stretched by 10%.
  {
    const EllipticalDist src(SpdMatrix::identity(2), RadialLaw::chi(2));
    const EllipticalDist dst(SpdMatrix::identity(2), RadialLaw::scaled(3.0, RadialLaw::chi(2)));
    const PointMap good = as_point_map(spherical_equiv_map(src, dst));
    out.push_back(ks_pushforward(src, good, RadialLaw::scaled(3.3, RadialLaw::chi(2)),
                                 Whitened{SpdMatrix::identity(2), Vector::Zero(2)}, o.ks_samples,
                                 derive_seed(o.seed, index++), "negative-control/wrong-target/ks"));
    const PointMap stretched = [good](const Vector& x) -> Vector { return 1.1 * good(x); };
    const auto seed = derive_seed(o.seed, index++);
    const auto est = empirical_coupling_cost(src, stretched, o.cost_samples, seed);
    out.push_back(make_report("negative-control/stretched-map/cost",
                              std::abs(est.mean - w2_squared(src, dst)) / est.standard_error, 4.0,
                              o.cost_samples, seed));
  }
  // Negative control: rotation by 120 degrees is neither monotone nor symmetric.
  const double angle = 2.0 * std::numbers::pi / 3.0;
  Matrix rot{{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}};
  const PointMap rotation = [rot](const Vector& x) -> Vector { return rot * x; };
  auto neg_mono = monotonicity_check(rotation, 2, o.monotone_pairs, o.box_radius,
                                     derive_seed(o.seed, index++), Vector(), false,
                                     "negative-control/rotation/monotone");
  out.push_back(neg_mono);
  const PointSet pts = sample_sphere(2, o.jacobian_points, derive_seed(o.seed, index++));
  out.push_back(jacobian_symmetry_check(rotation, pts, o.jacobian_step, Vector(),
                                        "negative-control/rotation/jacobian"));
  return out;
}

}  // namespace ellot
