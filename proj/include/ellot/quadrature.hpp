#pragma once

// Quadrature over the unit interval of probability levels.
//
// Functionals of quantile functions (moments, comonotone cross moments,
// one-dimensional W2) are integrals over u in (0, 1) whose integrands blow
// up at u -> 1 for heavy-tailed laws and lose smoothness at u -> 0. The rule
// below uses Gauss-Legendre on the bulk and Gauss-Legendre panels on the
// log-transformed tails, u = a * exp(-t) on the left and 1 - u = b * exp(-t)
// on the right. Every node carries both u and 1 - u, each accurate to full
// relative precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ellot/errors.hpp"

namespace ellot {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule of order n by Newton iteration on P_n.
inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// A quadrature node on (0, 1): level u, its complement 1 - u, and weight.
struct UnitNode {
  double u;
  double upper;
  double weight;
};

struct UnitRuleOptions {
  int bulk_nodes = 256;     // Gauss-Legendre order on the bulk (0.02, 0.98)
  int panel_nodes = 32;     // order on each log-tail panel
  double tail_mass = 0.02;  // probability handled by each log-transformed tail
  double max_log_depth = 690.0;  // tails reach u = exp(-max_log_depth)
};

/// Composite rule over (0, 1). Optional breakpoints (levels where an
/// integrand jumps, e.g. an empirical quantile function) split the bulk.
class UnitRule {
 public:
  explicit UnitRule(UnitRuleOptions options = {}, std::span<const double> breakpoints = {})
      : options_(options) {
    build(breakpoints);
  }

  std::span<const UnitNode> nodes() const { return nodes_; }
  const UnitRuleOptions& options() const { return options_; }

  /// Integrates values tabulated at evaluation_points(): one per node, then
  /// the two right-tail probes, which close the remaining tail mass.
  double integrate_values(std::span<const double> values) const {
    if (values.size() != nodes_.size() + 2) {
      throw DimensionMismatch("UnitRule::integrate_values: expected one value per node plus two probes");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += nodes_[i].weight * values[i];
    return sum + tail_remainder(values[nodes_.size()], values[nodes_.size() + 1]);
  }

  /// Evaluates f(u, 1 - u) on every node and both probes, then integrates.
  template <typename F>
  double integrate(F&& f) const {
    std::vector<double> values;
    values.reserve(nodes_.size() + 2);
    for (const auto& node : nodes_) values.push_back(f(node.u, node.upper));
    for (const auto& probe : probes_) values.push_back(f(probe.u, probe.upper));
    return integrate_values(values);
  }

  /// All evaluation points: the nodes followed by the two tail probes.
  std::vector<UnitNode> evaluation_points() const {
    std::vector<UnitNode> points(nodes_.begin(), nodes_.end());
    points.insert(points.end(), probes_.begin(), probes_.end());
    return points;
  }

 private:
  // Integrand h(t) = g(u(t)) * |du/dt| on the right tail beyond the last
  // panel, modeled as exp(-gamma t) from the two probes one unit apart.
  double tail_remainder(double g_inner, double g_outer) const {
    const double h_inner = g_inner * probes_[0].weight;
    const double h_outer = g_outer * probes_[1].weight;
    if (!(h_outer > 0.0) || !(h_inner > 0.0) || !std::isfinite(h_inner) ||
        !std::isfinite(h_outer)) {
      return 0.0;
    }
    const double decay = std::log(h_inner / h_outer);
    if (!(decay > 1e-6)) return std::numeric_limits<double>::infinity();
    return h_outer / decay;
  }

  void add_bulk_segment(double a, double b, int order) {
    const auto gl = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < order; ++i) {
      const double u = mid + half * gl.nodes[i];
      nodes_.push_back({u, 1.0 - u, half * gl.weights[i]});
    }
  }

  // Panels in t covering (0, depth) with widths 1, 1, 2, 4, ... .
  std::vector<std::pair<double, double>> tail_panels(double depth) const {
    std::vector<std::pair<double, double>> panels;
    double t = 0.0;
    double width = 1.0;
    bool first = true;
    while (t < depth) {
      const double end = std::min(depth, t + width);
      panels.emplace_back(t, end);
      t = end;
      if (!first) width *= 2.0;
      first = false;
    }
    return panels;
  }

  void add_left_tail(double edge) {
    const auto gl = gauss_legendre(options_.panel_nodes);
    const double depth = options_.max_log_depth + std::log(edge);
    for (auto [t0, t1] : tail_panels(depth)) {
      const double half = 0.5 * (t1 - t0);
      const double mid = 0.5 * (t0 + t1);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = mid + half * gl.nodes[i];
        const double u = edge * std::exp(-t);
        nodes_.push_back({u, 1.0 - u, half * gl.weights[i] * u});
      }
    }
  }

  void add_right_tail(double edge_upper) {
    const auto gl = gauss_legendre(options_.panel_nodes);
    const double depth = options_.max_log_depth + std::log(edge_upper) - 1.0;
    for (auto [t0, t1] : tail_panels(depth)) {
      const double half = 0.5 * (t1 - t0);
      const double mid = 0.5 * (t0 + t1);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = mid + half * gl.nodes[i];
        const double upper = edge_upper * std::exp(-t);
        nodes_.push_back({1.0 - upper, upper, half * gl.weights[i] * upper});
      }
    }
    // Probes at depth - 1 and depth; weight holds the Jacobian |du/dt|.
    for (double t : {depth - 1.0, depth}) {
      const double upper = edge_upper * std::exp(-t);
      probes_.push_back({1.0 - upper, upper, upper});
    }
  }

  void build(std::span<const double> breakpoints) {
    std::vector<double> cuts;
    for (double b : breakpoints) {
      if (b > 0.0 && b < 1.0) cuts.push_back(b);
    }
    cuts.push_back(options_.tail_mass);
    cuts.push_back(1.0 - options_.tail_mass);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    add_left_tail(cuts.front());
    const double bulk = cuts.back() - cuts.front();
    const std::size_t segments = cuts.size() - 1;
    for (std::size_t s = 0; s < segments; ++s) {
      const double a = cuts[s];
      const double b = cuts[s + 1];
      int order = options_.bulk_nodes;
      if (segments > 1) {
        order = std::max(8, static_cast<int>(std::ceil(options_.bulk_nodes * (b - a) / bulk)));
        order = std::min(order, options_.bulk_nodes);
      }
      add_bulk_segment(a, b, order);
    }
    add_right_tail(1.0 - cuts.back());
  }

  UnitRuleOptions options_;
  std::vector<UnitNode> nodes_;
  std::vector<UnitNode> probes_;
};

}  // namespace ellot
