// ellot: command-line front end for the closed-form transport library.
//
// Exit codes: 0 success, 1 malformed input, 2 unsupported distribution
// pair, 3 numerical failure (singular matrix, infinite moment).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ellot/io.hpp"

namespace fs = std::filesystem;
using ellot::io::Json;

namespace {

struct Options {
  std::string config;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> quad_nodes;
  std::optional<double> tol;
  std::string out;
  bool header = false;
  // Subcommand-specific.
  std::string points;
  std::string curve;
  std::string convention = "rooted";
};

struct Config {
  Json json;
  fs::path base_dir;
};

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ellot::io::SpecError("cannot open config " + path);
  Config c;
  c.json = Json::parse(in);
  c.base_dir = fs::path(path).parent_path();
  return c;
}

std::optional<ellot::UnitRuleOptions> quadrature(const Options& o) {
  if (!o.quad_nodes) return std::nullopt;
  if (*o.quad_nodes < 8) throw ellot::DomainError("--quad-nodes must be at least 8");
  ellot::UnitRuleOptions rule;
  rule.bulk_nodes = *o.quad_nodes;
  return rule;
}

// Writes to --out when given, stdout otherwise.
template <typename Writer>
void emit(const std::string& path, Writer write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ellot::io::SpecError("cannot write " + path);
  write(f);
}

std::vector<std::string> coordinate_header(const Options& o, Eigen::Index dim) {
  if (!o.header) return {};
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < dim; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

ellot::Distribution dist_field(const Config& c, const char* key) {
  return ellot::io::distribution_from_json(ellot::io::detail::field(c.json, key, "config"), c.base_dir);
}

int run_distance(const Options& o) {
  const Config c = load_config(o.config);
  const auto rule = quadrature(o);
  const double w2sq = ellot::w2_squared(dist_field(c, "source"), dist_field(c, "target"),
                                        rule ? &*rule : nullptr);
  emit(o.out, [&](std::ostream& s) {
    s << ellot::io::dump(Json{{"w2_squared", w2sq}, {"w2", std::sqrt(w2sq)}}) << '\n';
  });
  return 0;
}

ellot::TransportMap build_map(const Config& c) {
  const auto source = dist_field(c, "source");
  const auto target = dist_field(c, "target");
  const auto it = c.json.find("method");
  if (it == c.json.end()) return ellot::transport_map(source, target);
  if (!it->is_string()) throw ellot::io::SpecError("config: \"method\" must be a string");
  const std::string method = it->get<std::string>();
  if (method == "auto") return ellot::transport_map(source, target);
  if (method == "simplicial") {
    if (!std::holds_alternative<ellot::SimplicialDist>(source) ||
        !std::holds_alternative<ellot::SimplicialDist>(target)) {
      throw ellot::UnsupportedPair("method simplicial needs two simplicial distributions");
    }
    return ellot::simplicial_map(std::get<ellot::SimplicialDist>(source),
                                 std::get<ellot::SimplicialDist>(target));
  }
  if (!std::holds_alternative<ellot::EllipticalDist>(source) ||
      !std::holds_alternative<ellot::EllipticalDist>(target)) {
    throw ellot::UnsupportedPair("method " + method + " needs two elliptical distributions");
  }
  const auto& p = std::get<ellot::EllipticalDist>(source);
  const auto& q = std::get<ellot::EllipticalDist>(target);
  if (method == "related_class") return ellot::related_class_map(p, q);
  if (method == "spherical_equiv") return ellot::spherical_equiv_map(p, q);
  if (method == "general") return ellot::general_map(p, q);
  throw ellot::io::SpecError("config: unknown method \"" + method + "\"");
}

int run_map(const Options& o) {
  const Config c = load_config(o.config);
  const ellot::TransportMap map = build_map(c);
  const ellot::PointSet points = ellot::io::read_csv(o.points);
  const ellot::PointSet mapped = ellot::apply_map(map, points);
  emit(o.out, [&](std::ostream& s) {
    ellot::io::write_csv(s, mapped, coordinate_header(o, mapped.cols()));
  });
  return 0;
}

int run_barycenter(const Options& o) {
  const Config c = load_config(o.config);
  const ellot::BarycenterProblem problem = ellot::io::problem_from_json(c.json, c.base_dir);
  const ellot::Distribution bary = ellot::common_correlation_barycenter(problem);
  emit(o.out, [&](std::ostream& s) { s << ellot::io::dump(ellot::io::to_json(bary)) << '\n'; });

  std::string curve = o.curve;
  if (curve.empty()) {
    curve = o.out.empty() ? "barycenter_quantiles.csv"
                          : (fs::path(o.out).replace_extension("").string() + "_quantiles.csv");
  }
  const ellot::RadialLaw& radial = ellot::radial_of(bary);
  ellot::Matrix table(999, 2);
  for (int k = 1; k <= 999; ++k) {
    const double u = k / 1000.0;
    table(k - 1, 0) = u;
    table(k - 1, 1) = radial.quantile(u);
  }
  emit(curve, [&](std::ostream& s) {
    ellot::io::write_csv(s, table, o.header ? std::vector<std::string>{"u", "quantile"}
                                            : std::vector<std::string>{});
  });
  return 0;
}

int run_fit(const Options& o) {
  const Config c = load_config(o.config);
  ellot::RadialLaw target = ellot::RadialLaw::dirac(0.0);
  int d = 0;
  if (c.json.contains("radial")) {
    target = ellot::io::law_from_json(c.json["radial"], c.base_dir);
  } else {
    const auto problem = ellot::io::problem_from_json(c.json, c.base_dir);
    target = ellot::radial_of(ellot::common_correlation_barycenter(problem));
    d = problem.dim();
  }
  ellot::TFitOptions fit;
  if (const auto req = ellot::io::fit_request_from_json(c.json)) {
    d = req->d;
    fit.nu_min = req->nu_min;
    fit.nu_max = req->nu_max;
  }
  if (d < 1) throw ellot::io::SpecError("config: fit_t.d is required when fitting a bare radial law");
  if (o.tol) fit.tolerance = *o.tol;
  fit.quadrature = quadrature(o);
  if (o.convention == "rooted") {
    fit.convention = ellot::Standardization::rooted;
  } else if (o.convention == "unrooted") {
    fit.convention = ellot::Standardization::unrooted;
  } else {
    throw ellot::DomainError("--convention must be rooted or unrooted");
  }
  const ellot::TFit result = ellot::fit_t_degrees(target, d, fit);
  emit(o.out, [&](std::ostream& s) {
    s << ellot::io::dump(Json{{"nu_star", result.nu_star}, {"distance", result.distance}}) << '\n';
  });
  return 0;
}

int run_verify(const Options& o) {
  ellot::SuiteOptions suite;
  if (o.seed) suite.seed = *o.seed;
  const std::uint64_t seed = suite.seed;
  if (o.samples) {
    if (*o.samples < 100000) throw ellot::DomainError("--samples must be at least 100000 for verify");
    suite.cost_samples = *o.samples;
    suite.moment_samples = *o.samples;
    suite.ks_samples = std::min<std::int64_t>(*o.samples, 100000);
  }
  std::vector<ellot::VerificationReport> reports;
  if (!o.config.empty()) {
    // Checks on the single pair named by the config.
    const Config c = load_config(o.config);
    const auto source = dist_field(c, "source");
    const auto target = dist_field(c, "target");
    const ellot::Scenario s{"custom", 0, source, target, build_map(c)};
    std::uint64_t index = 0;
    reports.push_back(ellot::cost_report(s, suite.cost_samples, ellot::derive_seed(seed, index++)));
    reports.push_back(ellot::pushforward_report(s, suite.ks_samples, ellot::derive_seed(seed, index++)));
    reports.push_back(ellot::monotonicity_report(s, suite, ellot::derive_seed(seed, index++)));
    reports.push_back(ellot::jacobian_report(s, suite, ellot::derive_seed(seed, index++)));
    reports.push_back(ellot::moment_check(source, suite.moment_samples,
                                          ellot::derive_seed(seed, index++), "custom/source/moment"));
    reports.push_back(ellot::moment_check(target, suite.moment_samples,
                                          ellot::derive_seed(seed, index++), "custom/target/moment"));
  } else {
    reports = ellot::run_report_suite(suite);
  }
  emit(o.out, [&](std::ostream& s) {
    for (const auto& r : reports) s << ellot::io::dump(ellot::io::to_json(r)) << '\n';
  });
  return 0;
}

int run_sample(const Options& o) {
  const Config c = load_config(o.config);
  const ellot::Distribution dist = ellot::io::distribution_from_json(c.json, c.base_dir);
  const std::int64_t n = o.samples.value_or(1000);
  if (n < 1) throw ellot::DomainError("--samples must be at least 1");
  const ellot::PointSet points = ellot::sample(dist, n, o.seed.value_or(0));
  emit(o.out, [&](std::ostream& s) {
    ellot::io::write_csv(s, points, coordinate_header(o, points.cols()));
  });
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool config_required = true) {
  auto* cfg = cmd->add_option("config", o.config, "JSON configuration file");
  if (config_required) cfg->required();
  cmd->add_option("--samples", o.samples, "Sample count");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--quad-nodes", o.quad_nodes, "Gauss-Legendre nodes on the bulk of (0, 1)");
  cmd->add_option("--tol", o.tol, "Tolerance in nu for fit-t");
  cmd->add_option("--out", o.out, "Output file (default stdout)");
  cmd->add_flag("--header", o.header, "Write a header row in CSV output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form optimal transport between elliptical and simplicial distributions"};
  app.require_subcommand(1);
  Options o;

  auto* distance = app.add_subcommand("distance", "Squared W2 between \"source\" and \"target\"");
  add_common(distance, o);
  auto* map = app.add_subcommand("map", "Push CSV points through the transport map");
  add_common(map, o);
  map->add_option("--points", o.points, "CSV of input points, one per row")->required();
  auto* bary = app.add_subcommand("barycenter", "Barycenter spec plus a 999-point quantile curve");
  add_common(bary, o);
  bary->add_option("--curve", o.curve, "Quantile curve CSV path");
  auto* fit = app.add_subcommand("fit-t", "Closest standardized t law to a barycenter or radial law");
  add_common(fit, o);
  fit->add_option("--convention", o.convention, "Standardization: rooted or unrooted");
  auto* verify = app.add_subcommand("verify", "Monte Carlo report suite as JSON lines");
  add_common(verify, o, false);
  auto* sample = app.add_subcommand("sample", "Draw points from a distribution spec");
  add_common(sample, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*distance) return run_distance(o);
    if (*map) return run_map(o);
    if (*bary) return run_barycenter(o);
    if (*fit) return run_fit(o);
    if (*verify) return run_verify(o);
    if (*sample) return run_sample(o);
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return 1;
  } catch (const ellot::UnsupportedPair& e) {
    std::cerr << "error: unsupported pair: " << e.what() << '\n';
    return 2;
  } catch (const ellot::NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
