#pragma once

// W2 barycenters of elliptical distributions sharing one scale matrix (and
// of simplicial distributions of one dimension). In both families the
// fixed-point operator G(mu) = Law(sum_j w_j T_j(X)) lands on the
// distribution whose radial quantile function is sum_j w_j F_{S_j}^{-1},
// independently of mu, so one application reaches the barycenter.

#include <cmath>
#include <optional>
#include <vector>

#include "ellot/transport.hpp"

namespace ellot {

class BarycenterProblem {
 public:
  BarycenterProblem(std::vector<Distribution> components, std::vector<double> weights)
      : components_(std::move(components)), weights_(std::move(weights)) {
    if (components_.empty()) throw DomainError("barycenter: no components");
    if (components_.size() != weights_.size()) {
      throw DimensionMismatch("barycenter: weights and components differ in length");
    }
    double total = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("barycenter: weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("barycenter: weights must sum to 1");
    for (double& w : weights_) w /= total;
    const auto family = components_.front().index();
    const int dim = dim_of(components_.front());
    for (const auto& c : components_) {
      if (c.index() != family) {
        throw UnsupportedPair("barycenter: components mix simplicial and elliptical families");
      }
      if (dim_of(c) != dim) throw DimensionMismatch("barycenter: component dimensions differ");
    }
  }

  const std::vector<Distribution>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_elliptical() const { return components_.front().index() == 0; }
  int dim() const { return dim_of(components_.front()); }

  /// Throws unless every elliptical component shares the first one's scale
  /// factor to 1e-10 relative Frobenius error.
  const SpdMatrix* common_scale() const {
    if (!is_elliptical()) return nullptr;
    const auto& first = std::get<EllipticalDist>(components_.front()).scale_root();
    for (const auto& c : components_) {
      const auto& a = std::get<EllipticalDist>(c).scale_root();
      if (detail::relative_frobenius_gap(first.matrix(), a.matrix()) > 1e-10) {
        throw UnsupportedPair(
            "barycenter: components have different scale matrices; only the common-scale "
            "case has a closed form");
      }
    }
    return &first;
  }

 private:
  std::vector<Distribution> components_;
  std::vector<double> weights_;
};

/// V(mu) = sum_i w_i W2^2(nu_i, mu).
inline double barycentric_cost(const BarycenterProblem& problem, const Distribution& candidate,
                               const UnitRuleOptions* options = nullptr) {
  double v = 0.0;
  for (std::size_t i = 0; i < problem.components().size(); ++i) {
    v += problem.weights()[i] * w2_squared(problem.components()[i], candidate, options);
  }
  return v;
}

namespace detail {

inline RadialLaw mixture_of_components(const BarycenterProblem& problem) {
  std::vector<RadialLaw> laws;
  laws.reserve(problem.components().size());
  for (const auto& c : problem.components()) laws.push_back(radial_of(c));
  return quantile_mixture(std::move(laws), problem.weights());
}

inline Vector weighted_mean(const BarycenterProblem& problem) {
  Vector m = Vector::Zero(problem.dim());
  for (std::size_t i = 0; i < problem.components().size(); ++i) {
    m += problem.weights()[i] * std::get<EllipticalDist>(problem.components()[i]).mean();
  }
  return m;
}

}  // namespace detail

/// One application of G. `current` must be in the components' family (same
/// scale factor for ellipticals, same dimension for simplicials).
inline Distribution fixed_point_step(const BarycenterProblem& problem, const Distribution& current) {
  if (current.index() != problem.components().front().index()) {
    throw UnsupportedPair("fixed_point_step: candidate is in a different family");
  }
  if (dim_of(current) != problem.dim()) throw DimensionMismatch("fixed_point_step: dimension mismatch");
  if (problem.is_elliptical()) {
    const SpdMatrix& a = *problem.common_scale();
    const auto& mu = std::get<EllipticalDist>(current);
    if (detail::relative_frobenius_gap(mu.scale_root().matrix(), a.matrix()) > 1e-10) {
      throw UnsupportedPair("fixed_point_step: candidate scale differs from the components'");
    }
    return EllipticalDist(detail::weighted_mean(problem), a, detail::mixture_of_components(problem));
  }
  return SimplicialDist(problem.dim(), detail::mixture_of_components(problem));
}

struct DescentCheck {
  double cost_current;  // V(mu)
  double cost_next;     // V(G(mu))
  double step_w2;       // W2^2(mu, G(mu))

  /// V(mu) >= V(G(mu)) + W2^2(mu, G(mu)) - slack.
  bool holds(double slack = 1e-9) const { return cost_current >= cost_next + step_w2 - slack; }
};

inline DescentCheck descent_check(const BarycenterProblem& problem, const Distribution& mu,
                                  const UnitRuleOptions* options = nullptr) {
  const Distribution next = fixed_point_step(problem, mu);
  return {barycentric_cost(problem, mu, options), barycentric_cost(problem, next, options),
          w2_squared(mu, next, options)};
}

/// Closed-form barycenter: shared scale, radial = weighted quantile mixture.
inline Distribution common_correlation_barycenter(const BarycenterProblem& problem) {
  if (problem.is_elliptical()) {
    const SpdMatrix& a = *problem.common_scale();
    return EllipticalDist(detail::weighted_mean(problem), a, detail::mixture_of_components(problem));
  }
  return SimplicialDist(problem.dim(), detail::mixture_of_components(problem));
}

/// How a t radial law is brought to unit covariance.
enum class Standardization {
  rooted,    // factor sqrt((nu - 2) / nu): covariance exactly I when A = I
  unrooted,  // factor (nu - 2) / nu applied to the quantile
};

inline double standardization_factor(double nu, Standardization convention) {
  const double ratio = (nu - 2.0) / nu;
  return convention == Standardization::rooted ? std::sqrt(ratio) : ratio;
}

/// t radial law rescaled so that E[Q^2] = d under the rooted convention.
inline RadialLaw standardized_t_radial(int d, double nu,
                                       Standardization convention = Standardization::rooted) {
  const RadialLaw base = RadialLaw::t_radial(d, nu);
  return RadialLaw::scaled(standardization_factor(nu, convention), base);
}

struct TFit {
  double nu_star;
  double distance;   // radial W2^2 at nu_star
  bool at_boundary;  // minimum sits on the search bracket edge
};

struct TFitOptions {
  double nu_min = 2.05;
  double nu_max = 200.0;
  double tolerance = 1e-3;  // absolute, in nu
  Standardization convention = Standardization::rooted;
  std::optional<UnitRuleOptions> quadrature;
};

/// Degrees of freedom of the standardized t radial law closest in W2 to
/// `target`, by golden-section search.
inline TFit fit_t_degrees(const RadialLaw& target, int d, const TFitOptions& options = {}) {
  if (d < 1) throw DomainError("fit_t_degrees: dimension must be >= 1");
  if (!(options.nu_min > 2.0) || !(options.nu_max > options.nu_min)) {
    throw DomainError("fit_t_degrees: need 2 < nu_min < nu_max");
  }
  if (!(options.tolerance > 0.0)) throw DomainError("fit_t_degrees: tolerance must be positive");

  const UnitRule rule(options.quadrature.value_or(UnitRuleOptions{}), target.breakpoints());
  const auto points = rule.evaluation_points();
  std::vector<double> target_q(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    target_q[i] = target.quantile(TailPair{points[i].u, points[i].upper});
  }
  std::vector<double> values(points.size());
  auto distance = [&](double nu) {
    const RadialLaw candidate = RadialLaw::t_radial(d, nu);
    const double factor = standardization_factor(nu, options.convention);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double diff =
          target_q[i] - factor * candidate.quantile(TailPair{points[i].u, points[i].upper});
      values[i] = diff * diff;
    }
    return rule.integrate_values(values);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = options.nu_min;
  double hi = options.nu_max;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = distance(x1);
  double f2 = distance(x2);
  while (hi - lo > options.tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = distance(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = distance(x2);
    }
  }
  const double nu_star = 0.5 * (lo + hi);
  const bool at_boundary = nu_star - options.nu_min <= 2.0 * options.tolerance ||
                           options.nu_max - nu_star <= 2.0 * options.tolerance;
  return {nu_star, distance(nu_star), at_boundary};
}

}  // namespace ellot
