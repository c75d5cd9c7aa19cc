// Acceptance suite: one PASS/FAIL line per criterion, followed by indented
// diagnostics. Exits nonzero when any criterion fails.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ellot/barycenter.hpp"
#include "ellot/verify.hpp"

using namespace ellot;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpdMatrix random_spd(int d, RandomStream& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  return SpdMatrix(g * g.transpose() / d + 0.1 * Matrix::Identity(d, d));
}

EllipticalDist standardized_t(double nu, Standardization c) {
  return EllipticalDist(SpdMatrix::identity(2), standardized_t_radial(2, nu, c));
}

TFit fit_equal_weight_barycenter(const std::vector<double>& nus, Standardization c) {
  std::vector<Distribution> comps;
  for (double nu : nus) comps.push_back(standardized_t(nu, c));
  const BarycenterProblem problem(comps, std::vector<double>(nus.size(), 1.0 / nus.size()));
  TFitOptions options;
  options.convention = c;
  return fit_t_degrees(radial_of(common_correlation_barycenter(problem)), 2, options);
}

Outcome t_barycenter_fit(const std::vector<double>& nus, double expected, double budget_s) {
  const auto t0 = Clock::now();
  const TFit rooted = fit_equal_weight_barycenter(nus, Standardization::rooted);
  const double elapsed = seconds_since(t0);
  const TFit unrooted = fit_equal_weight_barycenter(nus, Standardization::unrooted);
  const bool ok = std::abs(rooted.nu_star - expected) <= 0.2 && elapsed < budget_s;
  return {ok,
          {fmt("nu* = %.4f (rooted standardization, default), expected %.1f +- 0.2", rooted.nu_star, expected),
           fmt("nu* = %.4f under the unrooted standardization", unrooted.nu_star),
           fmt("W2^2 at nu* = %.3e, runtime %.2f s (budget %.0f s)", rooted.distance, elapsed, budget_s)}};
}

// Covariance-form Bures distance computed directly with Eigen.
double gaussian_w2_reference(const Matrix& s1, const Matrix& s2) {
  Eigen::SelfAdjointEigenSolver<Matrix> e1(s1);
  const Matrix r1 = e1.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Matrix> mid(r1 * s2 * r1);
  return s1.trace() + s2.trace() - 2.0 * mid.operatorSqrt().trace();
}

Outcome gaussian_cross_check() {
  RandomStream rng(301);
  double worst = 0.0;
  int pairs = 0;
  for (int d : {2, 3, 5}) {
    for (int k = 0; k < 20; ++k) {
      const SpdMatrix a = random_spd(d, rng);
      const SpdMatrix b = random_spd(d, rng);
      const double got = w2_squared(EllipticalDist(a, RadialLaw::chi(d)), EllipticalDist(b, RadialLaw::chi(d)));
      const Matrix s1 = a.matrix() * a.matrix();
      const Matrix s2 = b.matrix() * b.matrix();
      const double want = gaussian_w2_reference(s1, s2);
      worst = std::max(worst, std::abs(got - want) / want);
      ++pairs;
    }
  }
  return {worst < 1e-8, {fmt("%d pairs, max relative error %.3e (tolerance 1e-8)", pairs, worst)}};
}

Outcome trace_identity() {
  RandomStream rng(401);
  double worst = 0.0;
  int within = 0;
  for (int k = 0; k < 100; ++k) {
    const SpdMatrix a = random_spd(3, rng);
    const SpdMatrix b = random_spd(3, rng);
    const double tp = trace_product(a, b);
    const double gap = std::abs(nuclear_trace(a, b) - tp) / tp;
    worst = std::max(worst, gap);
    within += gap < 1e-8;
  }
  return {worst < 1e-8,
          {fmt("max |tr sqrt(ABBA) - tr(AB)| / tr(AB) = %.3e over 100 random 3x3 pairs; %d within 1e-8", worst,
               within),
           "the identity only holds when A and B commute; tr(AB) <= tr sqrt(ABBA) in general"}};
}

struct GridResults {
  std::vector<VerificationReport> cost, ks, monotone, jacobian;
  double cost_seconds = 0.0;
};

GridResults run_grid() {
  GridResults g;
  const SuiteOptions o;
  std::uint64_t index = 1000;
  const auto t0 = Clock::now();
  const auto scenarios = standard_scenarios();
  for (const auto& s : scenarios) {
    if (s.finite_cost_variance) g.cost.push_back(cost_report(s, 1000000, derive_seed(o.seed, index++)));
  }
  g.cost_seconds = seconds_since(t0);
  for (const auto& s : scenarios) {
    g.ks.push_back(pushforward_report(s, 100000, derive_seed(o.seed, index++)));
    g.monotone.push_back(monotonicity_report(s, o, derive_seed(o.seed, index++)));
    g.jacobian.push_back(jacobian_report(s, o, derive_seed(o.seed, index++)));
  }
  return g;
}

void add_reports(Outcome& out, const std::vector<VerificationReport>& reports, bool failures_only) {
  for (const auto& r : reports) {
    if (failures_only && r.passed) continue;
    out.details.push_back(fmt("%-4s %-44s statistic %.4g (threshold %.4g)%s%s", r.passed ? "ok" : "FAIL",
                              r.check_name.c_str(), r.statistic, r.threshold, r.note.empty() ? "" : "; ",
                              r.note.c_str()));
  }
}

bool all_passed(const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    if (!r.passed) return false;
  }
  return true;
}

Outcome optimality(const GridResults& g) {
  const SuiteOptions o;
  const double angle = 2.0 * std::numbers::pi / 3.0;
  const Matrix rot{{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}};
  const PointMap rotation = [rot](const Vector& x) -> Vector { return rot * x; };
  const auto neg_mono = monotonicity_check(rotation, 2, 500, 3.0, 77, Vector(), false, "rotation/monotone");
  const auto neg_jac = jacobian_symmetry_check(rotation, sample_sphere(2, 50, 78), 1e-5, Vector(), "rotation/jacobian");
  const bool controls_fail = !neg_mono.passed && !neg_jac.passed;
  Outcome out{all_passed(g.monotone) && all_passed(g.jacobian) && controls_fail, {}};
  int mono_ok = 0;
  int jac_ok = 0;
  for (const auto& r : g.monotone) mono_ok += r.passed;
  for (const auto& r : g.jacobian) jac_ok += r.passed;
  out.details.push_back(fmt("monotone on %d/%zu maps, symmetric Jacobian on %d/%zu maps", mono_ok,
                            g.monotone.size(), jac_ok, g.jacobian.size()));
  add_reports(out, g.monotone, true);
  add_reports(out, g.jacobian, true);
  out.details.push_back(fmt("negative control (rotation by 120 degrees): monotone %s, Jacobian %s",
                            neg_mono.passed ? "passes" : "fails", neg_jac.passed ? "passes" : "fails"));
  return out;
}

RadialLaw random_law(int d, RandomStream& rng) {
  switch (static_cast<int>(rng.uniform() * 4.0)) {
    case 0:
      return RadialLaw::chi(d);
    case 1:
      return RadialLaw::t_radial(d, 3.0 + 27.0 * rng.uniform());
    case 2:
      return RadialLaw::scaled(0.2 + 2.0 * rng.uniform(), RadialLaw::t_radial(d, 4.0 + 10.0 * rng.uniform()));
    default:
      return RadialLaw::dirac(0.1 + 3.0 * rng.uniform());
  }
}

Outcome fixed_point() {
  const double levels[] = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                           0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  RandomStream rng(801);
  double worst_idempotence = 0.0;
  double worst_slack = -std::numeric_limits<double>::infinity();
  int holds = 0;
  const int instances = 50;
  for (int k = 0; k < instances; ++k) {
    const int d = 1 + static_cast<int>(rng.uniform() * 4.0);
    const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
    const bool simplicial = k % 5 == 4;
    const SpdMatrix a = random_spd(d, rng);
    std::vector<Distribution> comps;
    std::vector<double> w;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      Vector mean(d);
      for (int i = 0; i < d; ++i) mean(i) = rng.normal();
      if (simplicial) {
        comps.push_back(SimplicialDist(d, random_law(d, rng)));
      } else {
        comps.push_back(EllipticalDist(mean, a, random_law(d, rng)));
      }
      w.push_back(0.1 + rng.uniform());
      total += w.back();
    }
    for (double& x : w) x /= total;
    const BarycenterProblem problem(comps, w);
    Vector mu_mean(d);
    for (int i = 0; i < d; ++i) mu_mean(i) = 2.0 * rng.normal();
    const Distribution mu = simplicial ? Distribution(SimplicialDist(d, random_law(d, rng)))
                                       : Distribution(EllipticalDist(mu_mean, a, random_law(d, rng)));
    const Distribution g1 = fixed_point_step(problem, mu);
    const Distribution g2 = fixed_point_step(problem, g1);
    for (double u : levels) {
      worst_idempotence = std::max(worst_idempotence, std::abs(radial_of(g1).quantile(u) - radial_of(g2).quantile(u)));
    }
    if (!simplicial) {
      worst_idempotence = std::max(
          worst_idempotence,
          (std::get<EllipticalDist>(g1).mean() - std::get<EllipticalDist>(g2).mean()).cwiseAbs().maxCoeff());
    }
    const DescentCheck c = descent_check(problem, mu);
    holds += c.holds(1e-9);
    worst_slack = std::max(worst_slack, c.cost_next + c.step_w2 - c.cost_current);
  }
  return {worst_idempotence <= 1e-10 && holds == instances,
          {fmt("G(G(mu)) vs G(mu): max quantile/mean gap %.3e at 19 levels (tolerance 1e-10)", worst_idempotence),
           fmt("V(mu) >= V(G(mu)) + W2^2(mu, G(mu)) within 1e-9 on %d/%d random instances "
               "(largest violation %.3e)",
               holds, instances, worst_slack)}};
}

Outcome moments() {
  double worst = 0.0;
  for (int d : {1, 2, 5}) {
    worst = std::max(worst, std::abs(second_moment(RadialLaw::chi(d)) - d) / d);
    for (double nu : {3.0, 5.0, 30.0}) {
      const double want = d * nu / (nu - 2.0);
      worst = std::max(worst, std::abs(second_moment(RadialLaw::t_radial(d, nu)) - want) / want);
    }
  }
  return {worst < 1e-9, {fmt("max relative error %.3e over chi(d) and t_radial(d, nu) (tolerance 1e-9)", worst)}};
}

void report(int id, const char* title, const Outcome& o, int& failures) {
  std::printf("criterion %d: %s  %s\n", id, o.passed ? "PASS" : "FAIL", title);
  for (const auto& line : o.details) std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
  failures += !o.passed;
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "two-component t barycenter fit (nu 3 and 27)", t_barycenter_fit({3.0, 27.0}, 5.5, 30.0), failures);
  std::vector<double> all;
  for (int nu = 3; nu <= 30; ++nu) all.push_back(nu);
  report(2, "28-component t barycenter fit (nu 3..30)", t_barycenter_fit(all, 11.3, 120.0), failures);
  report(3, "Gaussian distance vs covariance formula", gaussian_cross_check(), failures);
  report(4, "trace identity tr sqrt(ABBA) = tr(AB)", trace_identity(), failures);

  const GridResults grid = run_grid();
  Outcome cost{all_passed(grid.cost) && grid.cost_seconds < 300.0,
               {fmt("%zu scenarios at n = 10^6 in %.1f s (budget 300 s)", grid.cost.size(), grid.cost_seconds)}};
  add_reports(cost, grid.cost, false);
  report(5, "closed-form W2^2 vs Monte Carlo coupling cost (4 SE)", cost, failures);

  Outcome ks{all_passed(grid.ks), {}};
  add_reports(ks, grid.ks, false);
  report(6, "pushforward radial-norm KS test at n = 10^5", ks, failures);

  report(7, "optimality conditions: monotone map with symmetric Jacobian", optimality(grid), failures);
  report(8, "one-shot fixed point and descent inequality", fixed_point(), failures);
  report(9, "second moments of chi and t radial laws", moments(), failures);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
