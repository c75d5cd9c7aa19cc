#pragma once

// One-dimensional nonnegative radial laws: the R in X = R A U.
//
// A RadialLaw is an immutable value (shared, never mutated) describing the
// law by its quantile function and CDF. Moments are integrals of the
// quantile function over (0, 1); the cross moment E[RS] is taken under the
// comonotone coupling, which is the coupling induced by the radial map
// S = F_S^{-1}(F_R(R)).

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ellot/errors.hpp"
#include "ellot/quadrature.hpp"
#include "ellot/special.hpp"

namespace ellot {

class RadialLaw;

namespace law {

/// Norm of a standard normal vector in dimension d.
struct Chi {
  int d;
};

/// Q = ||Z|| sqrt(nu / chi2_nu); Q^2 / d follows F(d, nu).
struct TRadial {
  int d;
  double nu;
};

struct Dirac {
  double c;
};

struct Scaled {
  double c;
  std::shared_ptr<const RadialLaw> base;
};

/// Quantile function sum_j w_j F_j^{-1}.
struct Mixture {
  std::vector<double> weights;
  std::vector<RadialLaw> components;
};

struct Empirical {
  std::vector<double> sorted;
};

}  // namespace law

/// Both tails of a probability, each to full relative accuracy.
struct TailPair {
  double lower;
  double upper;
};

enum class RadialKind { chi, t_radial, dirac, scaled, quantile_mixture, empirical };

class RadialLaw {
 public:
  using Variant = std::variant<law::Chi, law::TRadial, law::Dirac, law::Scaled, law::Mixture,
                               law::Empirical>;

  static RadialLaw chi(int d) {
    if (d < 1) throw DomainError("chi law: dimension must be >= 1");
    return RadialLaw(law::Chi{d});
  }

  static RadialLaw t_radial(int d, double nu) {
    if (d < 1) throw DomainError("t_radial law: dimension must be >= 1");
    if (!std::isfinite(nu) || std::isnan(nu)) throw DomainError("t_radial law: nu must be finite");
    if (!(nu > 2.0)) {
      throw InfiniteMomentError("t_radial law: nu must exceed 2 for a finite second moment");
    }
    return RadialLaw(law::TRadial{d, nu});
  }

  static RadialLaw dirac(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("dirac law: location must be finite and >= 0");
    return RadialLaw(law::Dirac{c});
  }

  static RadialLaw scaled(double c, const RadialLaw& base) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("scaled law: factor must be finite and >= 0");
    return RadialLaw(law::Scaled{c, std::make_shared<const RadialLaw>(base)});
  }

  /// Law whose quantile function is the weighted sum of the components'.
  /// A single component is returned unchanged; all-Dirac mixtures collapse
  /// to a Dirac at the weighted location.
  static RadialLaw quantile_mixture(std::vector<RadialLaw> components, std::vector<double> weights) {
    if (components.empty()) throw DomainError("quantile_mixture: no components");
    if (components.size() != weights.size()) {
      throw DimensionMismatch("quantile_mixture: weights and components differ in length");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("quantile_mixture: weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("quantile_mixture: weights must sum to 1");
    for (double& w : weights) w /= total;
    if (components.size() == 1) return components.front();
    if (std::all_of(components.begin(), components.end(),
                    [](const RadialLaw& l) { return l.kind() == RadialKind::dirac; })) {
      double c = 0.0;
      for (std::size_t j = 0; j < components.size(); ++j) {
        c += weights[j] * std::get<law::Dirac>(components[j].variant()).c;
      }
      return dirac(c);
    }
    return RadialLaw(law::Mixture{std::move(weights), std::move(components)});
  }

  static RadialLaw empirical(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("empirical law: no samples");
    for (double s : samples) {
      if (!(s >= 0.0) || !std::isfinite(s)) {
        throw DomainError("empirical law: samples must be finite and nonnegative");
      }
    }
    std::sort(samples.begin(), samples.end());
    return RadialLaw(law::Empirical{std::move(samples)});
  }

  const Variant& variant() const { return *node_; }
  RadialKind kind() const { return static_cast<RadialKind>(node_->index()); }

  /// True for laws without atoms (chi, t, and mixtures/scalings of them).
  bool is_continuous() const {
    return std::visit(
        [](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, law::Chi> || std::is_same_v<K, law::TRadial>) {
            return true;
          } else if constexpr (std::is_same_v<K, law::Scaled>) {
            return k.c > 0.0 && k.base->is_continuous();
          } else if constexpr (std::is_same_v<K, law::Mixture>) {
            return std::any_of(k.components.begin(), k.components.end(),
                               [](const RadialLaw& l) { return l.is_continuous(); });
          } else {
            return false;
          }
        },
        *node_);
  }

  /// Quantile at level u in (0, 1).
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: level must lie in (0,1)");
    return quantile(TailPair{u, 1.0 - u});
  }

  /// Quantile from a level given by both tails (lower + upper = 1). Levels
  /// 0 and 1 return the essential infimum / supremum of the support.
  double quantile(TailPair p) const {
    return std::visit([&](const auto& k) { return quantile_impl(k, p); }, *node_);
  }

  double cdf(double r) const { return cdf_pair(r).lower; }

  /// P(R <= r) and P(R > r).
  TailPair cdf_pair(double r) const {
    if (!(r >= 0.0)) throw DomainError("cdf: radius must be nonnegative");
    return std::visit([&](const auto& k) { return cdf_impl(k, r); }, *node_);
  }

  /// Levels at which the quantile function jumps.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    collect_breakpoints(out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Structural equality: same kind and identical parameters.
  friend bool operator==(const RadialLaw& a, const RadialLaw& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->index() != b.node_->index()) return false;
    return std::visit(
        [&](const auto& ka) -> bool {
          using K = std::decay_t<decltype(ka)>;
          const auto& kb = std::get<K>(*b.node_);
          if constexpr (std::is_same_v<K, law::Chi>) {
            return ka.d == kb.d;
          } else if constexpr (std::is_same_v<K, law::TRadial>) {
            return ka.d == kb.d && ka.nu == kb.nu;
          } else if constexpr (std::is_same_v<K, law::Dirac>) {
            return ka.c == kb.c;
          } else if constexpr (std::is_same_v<K, law::Scaled>) {
            return ka.c == kb.c && *ka.base == *kb.base;
          } else if constexpr (std::is_same_v<K, law::Mixture>) {
            return ka.weights == kb.weights && ka.components == kb.components;
          } else {
            return ka.sorted == kb.sorted;
          }
        },
        *a.node_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          std::ostringstream os;
          if constexpr (std::is_same_v<K, law::Chi>) {
            os << "chi(" << k.d << ")";
          } else if constexpr (std::is_same_v<K, law::TRadial>) {
            os << "t_radial(" << k.d << ", " << k.nu << ")";
          } else if constexpr (std::is_same_v<K, law::Dirac>) {
            os << "dirac(" << k.c << ")";
          } else if constexpr (std::is_same_v<K, law::Scaled>) {
            os << "scaled(" << k.c << ", " << k.base->describe() << ")";
          } else if constexpr (std::is_same_v<K, law::Mixture>) {
            os << "quantile_mixture[" << k.components.size() << "]";
          } else {
            os << "empirical[" << k.sorted.size() << "]";
          }
          return os.str();
        },
        *node_);
  }

 private:
  template <typename Kind>
  explicit RadialLaw(Kind kind) : node_(std::make_shared<const Variant>(std::move(kind))) {}

  static double quantile_impl(const law::Chi& k, TailPair p) {
    if (p.lower <= 0.0) return 0.0;
    if (p.upper <= 0.0) return std::numeric_limits<double>::infinity();
    const double a = 0.5 * k.d;
    const double x = p.lower <= 0.5 ? special::gamma_p_inv(a, p.lower)
                                    : special::gamma_q_inv(a, p.upper);
    return std::sqrt(2.0 * x);
  }

  static double quantile_impl(const law::TRadial& k, TailPair p) {
    if (p.lower <= 0.0) return 0.0;
    if (p.upper <= 0.0) return std::numeric_limits<double>::infinity();
    const double a = 0.5 * k.d;
    const double b = 0.5 * k.nu;
    // x = Q^2 / (Q^2 + nu) ~ Beta(d/2, nu/2), y = 1 - x.
    if (p.lower <= 0.5) {
      const double x = special::beta_i_inv(a, b, p.lower);
      return std::sqrt(k.nu * x / (1.0 - x));
    }
    const double y = special::beta_i_inv(b, a, p.upper);
    return std::sqrt(k.nu * (1.0 - y) / y);
  }

  static double quantile_impl(const law::Dirac& k, TailPair) { return k.c; }

  static double quantile_impl(const law::Scaled& k, TailPair p) {
    if (k.c == 0.0) return 0.0;
    return k.c * k.base->quantile(p);
  }

  static double quantile_impl(const law::Mixture& k, TailPair p) {
    double q = 0.0;
    for (std::size_t j = 0; j < k.components.size(); ++j) {
      q += k.weights[j] * k.components[j].quantile(p);
    }
    return q;
  }

  // Left-continuous generalized inverse: smallest x with F(x) >= u.
  static double quantile_impl(const law::Empirical& k, TailPair p) {
    const auto n = static_cast<double>(k.sorted.size());
    double index;  // 1-based
    if (p.lower <= 0.5) {
      index = std::ceil(p.lower * n);
    } else {
      index = n - std::floor(p.upper * n);
    }
    index = std::clamp(index, 1.0, n);
    return k.sorted[static_cast<std::size_t>(index) - 1];
  }

  static TailPair cdf_impl(const law::Chi& k, double r) {
    if (r == 0.0) return {0.0, 1.0};
    const double a = 0.5 * k.d;
    const double x = 0.5 * r * r;
    const double lower = special::gamma_p(a, x);
    if (lower <= 0.5) return {lower, 1.0 - lower};
    const double upper = special::gamma_q(a, x);
    return {1.0 - upper, upper};
  }

  static TailPair cdf_impl(const law::TRadial& k, double r) {
    if (r == 0.0) return {0.0, 1.0};
    if (std::isinf(r)) return {1.0, 0.0};
    const double a = 0.5 * k.d;
    const double b = 0.5 * k.nu;
    const double r2 = r * r;
    const double lower = special::beta_i(a, b, r2 / (r2 + k.nu));
    if (lower <= 0.5) return {lower, 1.0 - lower};
    const double upper = special::beta_i(b, a, k.nu / (r2 + k.nu));
    return {1.0 - upper, upper};
  }

  static TailPair cdf_impl(const law::Dirac& k, double r) {
    return r >= k.c ? TailPair{1.0, 0.0} : TailPair{0.0, 1.0};
  }

  static TailPair cdf_impl(const law::Scaled& k, double r) {
    if (k.c == 0.0) return {1.0, 0.0};
    return k.base->cdf_pair(r / k.c);
  }

  static TailPair cdf_impl(const law::Empirical& k, double r) {
    const auto count = std::upper_bound(k.sorted.begin(), k.sorted.end(), r) - k.sorted.begin();
    const auto n = static_cast<double>(k.sorted.size());
    return {count / n, (n - count) / n};
  }

  // sup{u : Q(u) <= r}, searched on the logit scale so both tails resolve.
  static TailPair cdf_impl(const law::Mixture& k, double r) {
    auto level = [](double s) {
      return s < 0.0 ? TailPair{1.0 / (1.0 + std::exp(-s)), std::exp(s) / (1.0 + std::exp(s))}
                     : TailPair{1.0 / (1.0 + std::exp(-s)), 1.0 / (1.0 + std::exp(s))};
    };
    auto q = [&](double s) { return quantile_impl(k, level(s)); };
    constexpr double kEdge = 740.0;
    double lo = -kEdge;
    double hi = kEdge;
    double q_lo = q(lo);
    double q_hi = q(hi);
    if (q_lo > r) return {0.0, 1.0};
    if (q_hi <= r) return {1.0, 0.0};
    // Illinois false position with bisection safeguard; invariant q(lo) <= r < q(hi).
    int side = 0;
    double f_lo = q_lo - r;
    double f_hi = q_hi - r;
    for (int iter = 0; iter < 400 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++iter) {
      double s;
      if (iter % 3 == 2 || !std::isfinite(f_hi) || !std::isfinite(f_lo) || f_hi - f_lo <= 0.0) {
        s = 0.5 * (lo + hi);
      } else {
        s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
      }
      const double f = q(s) - r;
      if (f <= 0.0) {
        lo = s;
        f_lo = f;
        if (side == -1) f_hi *= 0.5;
        side = -1;
      } else {
        hi = s;
        f_hi = f;
        if (side == 1) f_lo *= 0.5;
        side = 1;
      }
    }
    return level(lo);
  }

  void collect_breakpoints(std::vector<double>& out) const {
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, law::Scaled>) {
            k.base->collect_breakpoints(out);
          } else if constexpr (std::is_same_v<K, law::Mixture>) {
            for (const auto& c : k.components) c.collect_breakpoints(out);
          } else if constexpr (std::is_same_v<K, law::Empirical>) {
            const std::size_t n = k.sorted.size();
            for (std::size_t i = 1; i < n; ++i) {
              if (k.sorted[i] != k.sorted[i - 1]) out.push_back(static_cast<double>(i) / n);
            }
          }
        },
        *node_);
  }

  std::shared_ptr<const Variant> node_;
};

inline RadialLaw t_radial_law(int d, double nu) { return RadialLaw::t_radial(d, nu); }

inline RadialLaw quantile_mixture(std::vector<RadialLaw> laws, std::vector<double> weights) {
  return RadialLaw::quantile_mixture(std::move(laws), std::move(weights));
}

inline double quantile(const RadialLaw& law, double u) { return law.quantile(u); }
inline double cdf(const RadialLaw& law, double r) { return law.cdf(r); }

namespace detail {

inline const UnitRule& default_unit_rule() {
  static const UnitRule rule{};
  return rule;
}

/// Integrates f(q_1(u), ..., q_k(u)) over u in (0, 1) for the given laws.
template <typename F>
double integrate_quantiles(std::span<const RadialLaw* const> laws, const UnitRuleOptions* options,
                           F&& f) {
  std::vector<double> cuts;
  for (const RadialLaw* l : laws) {
    const auto b = l->breakpoints();
    cuts.insert(cuts.end(), b.begin(), b.end());
  }
  std::unique_ptr<UnitRule> local;
  const UnitRule* rule = &default_unit_rule();
  if (!cuts.empty() || options != nullptr) {
    local = std::make_unique<UnitRule>(options ? *options : UnitRuleOptions{}, cuts);
    rule = local.get();
  }
  std::vector<double> qs(laws.size());
  return rule->integrate([&](double u, double upper) {
    for (std::size_t j = 0; j < laws.size(); ++j) qs[j] = laws[j]->quantile(TailPair{u, upper});
    return f(std::span<const double>(qs));
  });
}

inline void require_finite_moment(double value, const char* what) {
  if (!std::isfinite(value)) throw InfiniteMomentError(std::string(what) + " is not finite");
}

}  // namespace detail

/// E[R] = int_0^1 F^{-1}(u) du.
inline double first_moment(const RadialLaw& law, const UnitRuleOptions* options = nullptr) {
  const RadialLaw* laws[] = {&law};
  const double m = detail::integrate_quantiles(laws, options, [](auto q) { return q[0]; });
  detail::require_finite_moment(m, "first moment");
  return m;
}

/// E[R^2] = int_0^1 F^{-1}(u)^2 du.
inline double second_moment(const RadialLaw& law, const UnitRuleOptions* options = nullptr) {
  const RadialLaw* laws[] = {&law};
  const double m = detail::integrate_quantiles(laws, options, [](auto q) { return q[0] * q[0]; });
  detail::require_finite_moment(m, "second moment");
  return m;
}

/// E[RS] under the comonotone coupling: int_0^1 F_R^{-1}(u) F_S^{-1}(u) du.
inline double cross_moment(const RadialLaw& r, const RadialLaw& s,
                           const UnitRuleOptions* options = nullptr) {
  const RadialLaw* laws[] = {&r, &s};
  const double m = detail::integrate_quantiles(laws, options, [](auto q) { return q[0] * q[1]; });
  detail::require_finite_moment(m, "cross moment");
  return m;
}

/// F_S^{-1}(F_R(r)): the monotone rearrangement of R onto S. Between two
/// atoms the map is extended off the support as the scaling r -> r * c_S / c_R.
inline double radial_quantile_map(const RadialLaw& from, const RadialLaw& to, double r) {
  const auto* a = std::get_if<law::Dirac>(&from.variant());
  const auto* b = std::get_if<law::Dirac>(&to.variant());
  if (a != nullptr && b != nullptr && a->c > 0.0) return r * (b->c / a->c);
  return to.quantile(from.cdf_pair(r));
}

}  // namespace ellot
