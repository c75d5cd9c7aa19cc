#pragma once

// JSON specs for radial laws, distributions and barycenter problems, CSV
// point files, and report serialization.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellot/barycenter.hpp"
#include "ellot/verify.hpp"
#include "json.hpp"

namespace ellot::io {

using Json = nlohmann::json;

/// Raised for structurally invalid specs (missing keys, wrong types, bad kinds).
class SpecError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw SpecError(where + ": expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SpecError(where + ": missing \"" + key + "\"");
  return *it;
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SpecError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(where + ": expected a finite number");
  return v;
}

inline int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SpecError(where + ": expected an integer");
  return j.get<int>();
}

}  // namespace detail

/// %.17g: enough digits for an exact round trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON number text: %.17g, keeping a decimal point on integral values.
inline std::string format_json_double(double v) {
  if (!std::isfinite(v)) return "null";
  std::string s = format_double(v);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

/// Compact JSON text with every float at 17 significant digits.
inline std::string dump(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::number_float:
      return format_json_double(j.get<double>());
    case nlohmann::json::value_t::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < j.size(); ++i) out += (i ? "," : "") + dump(j[i]);
      return out + "]";
    }
    case nlohmann::json::value_t::object: {
      std::string out = "{";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out += (first ? "" : ",") + nlohmann::json(it.key()).dump() + ":" + dump(it.value());
        first = false;
      }
      return out + "}";
    }
    default:
      return j.dump();
  }
}

inline Vector vector_from_json(const Json& j, const std::string& where = "vector") {
  if (!j.is_array()) throw SpecError(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = detail::number(j[i], where);
  return v;
}

/// Nested arrays of row vectors.
inline Matrix matrix_from_json(const Json& j, const std::string& where = "matrix") {
  if (!j.is_array() || j.empty()) throw SpecError(where + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw SpecError(where + ": rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[r], where);
    if (row.size() != cols) throw SpecError(where + ": ragged rows");
    m.row(r) = row.transpose();
  }
  return m;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

// ---------------------------------------------------------------- CSV

/// Reads comma-separated numeric rows. A first line that does not parse as
/// numbers is treated as a header and skipped.
inline PointSet read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw SpecError(path.string() + ": non-numeric row \"" + line + "\"");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw SpecError(path.string() + ": rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SpecError(path.string() + ": no data rows");
  PointSet out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
  }
  return out;
}

inline void write_csv(std::ostream& out, const Matrix& rows,
                      const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------- laws

/// Relative `samples_file` paths resolve against `base_dir`.
inline RadialLaw law_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  const std::string kind = [&] {
    const Json& k = detail::field(j, "kind", "radial law");
    if (!k.is_string()) throw SpecError("radial law: \"kind\" must be a string");
    return k.get<std::string>();
  }();
  const std::string where = "radial law (" + kind + ")";
  if (kind == "chi") return RadialLaw::chi(detail::integer(detail::field(j, "d", where), where));
  if (kind == "t_radial") {
    return RadialLaw::t_radial(detail::integer(detail::field(j, "d", where), where),
                               detail::number(detail::field(j, "nu", where), where));
  }
  if (kind == "dirac") return RadialLaw::dirac(detail::number(detail::field(j, "c", where), where));
  if (kind == "scaled") {
    return RadialLaw::scaled(detail::number(detail::field(j, "c", where), where),
                             law_from_json(detail::field(j, "base", where), base_dir));
  }
  if (kind == "quantile_mixture") {
    const Json& comps = detail::field(j, "components", where);
    const Json& ws = detail::field(j, "weights", where);
    if (!comps.is_array() || !ws.is_array()) throw SpecError(where + ": expected arrays");
    std::vector<RadialLaw> laws;
    for (const auto& c : comps) laws.push_back(law_from_json(c, base_dir));
    std::vector<double> weights;
    for (const auto& w : ws) weights.push_back(detail::number(w, where));
    return RadialLaw::quantile_mixture(std::move(laws), std::move(weights));
  }
  if (kind == "empirical") {
    std::vector<double> samples;
    if (const auto it = j.find("samples"); it != j.end()) {
      if (!it->is_array()) throw SpecError(where + ": \"samples\" must be an array");
      for (const auto& s : *it) samples.push_back(detail::number(s, where));
    } else {
      const Json& f = detail::field(j, "samples_file", where);
      if (!f.is_string()) throw SpecError(where + ": \"samples_file\" must be a string");
      std::filesystem::path path = f.get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      const PointSet data = read_csv(path);
      samples.assign(data.col(0).data(), data.col(0).data() + data.rows());
    }
    return RadialLaw::empirical(std::move(samples));
  }
  throw SpecError("radial law: unknown kind \"" + kind + "\"");
}

/// Empirical laws are written inline as "samples".
inline Json to_json(const RadialLaw& law) {
  return std::visit(
      [](const auto& k) -> Json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, law::Chi>) {
          return {{"kind", "chi"}, {"d", k.d}};
        } else if constexpr (std::is_same_v<K, law::TRadial>) {
          return {{"kind", "t_radial"}, {"d", k.d}, {"nu", k.nu}};
        } else if constexpr (std::is_same_v<K, law::Dirac>) {
          return {{"kind", "dirac"}, {"c", k.c}};
        } else if constexpr (std::is_same_v<K, law::Scaled>) {
          return {{"kind", "scaled"}, {"c", k.c}, {"base", to_json(*k.base)}};
        } else if constexpr (std::is_same_v<K, law::Mixture>) {
          Json comps = Json::array();
          for (const auto& c : k.components) comps.push_back(to_json(c));
          return {{"kind", "quantile_mixture"}, {"weights", k.weights}, {"components", comps}};
        } else {
          return {{"kind", "empirical"}, {"samples", k.sorted}};
        }
      },
      law.variant());
}

// ---------------------------------------------------------------- distributions

inline Distribution distribution_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  const Json& type = detail::field(j, "type", "distribution");
  if (!type.is_string()) throw SpecError("distribution: \"type\" must be a string");
  const std::string t = type.get<std::string>();
  const std::string where = "distribution (" + t + ")";
  const int dim = detail::integer(detail::field(j, "dim", where), where);
  RadialLaw radial = law_from_json(detail::field(j, "radial", where), base_dir);
  if (t == "simplicial") return SimplicialDist(dim, std::move(radial));
  if (t != "elliptical") throw SpecError("distribution: unknown type \"" + t + "\"");

  const Matrix scale = matrix_from_json(detail::field(j, "scale", where), where + " scale");
  if (scale.rows() != dim || scale.cols() != dim) {
    throw DimensionMismatch(where + ": scale must be dim x dim");
  }
  Vector mean = Vector::Zero(dim);
  if (const auto it = j.find("mean"); it != j.end()) mean = vector_from_json(*it, where + " mean");
  if (mean.size() != dim) throw DimensionMismatch(where + ": mean must have length dim");
  bool is_sigma = false;
  if (const auto it = j.find("is_sigma"); it != j.end()) {
    if (!it->is_boolean()) throw SpecError(where + ": \"is_sigma\" must be a boolean");
    is_sigma = it->get<bool>();
  }
  if (is_sigma) return EllipticalDist::from_sigma(std::move(mean), SpdMatrix(scale), std::move(radial));
  return EllipticalDist(std::move(mean), SpdMatrix(scale), std::move(radial));
}

/// The scale is written as the factor A ("is_sigma": false).
inline Json to_json(const Distribution& dist) {
  if (const auto* s = std::get_if<SimplicialDist>(&dist)) {
    return {{"type", "simplicial"}, {"dim", s->dim()}, {"radial", to_json(s->radial())}};
  }
  const auto& e = std::get<EllipticalDist>(dist);
  return {{"type", "elliptical"},
          {"dim", e.dim()},
          {"mean", to_json(e.mean())},
          {"scale", to_json(e.scale_root().matrix())},
          {"is_sigma", false},
          {"radial", to_json(e.radial())}};
}

// ---------------------------------------------------------------- barycenter

struct FitRequest {
  int d;
  double nu_min = 2.05;
  double nu_max = 200.0;
};

inline BarycenterProblem problem_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  const Json& comps = detail::field(j, "components", "barycenter problem");
  const Json& ws = detail::field(j, "weights", "barycenter problem");
  if (!comps.is_array() || !ws.is_array()) throw SpecError("barycenter problem: expected arrays");
  std::vector<Distribution> dists;
  for (const auto& c : comps) dists.push_back(distribution_from_json(c, base_dir));
  std::vector<double> weights;
  for (const auto& w : ws) weights.push_back(detail::number(w, "barycenter weights"));
  return BarycenterProblem(std::move(dists), std::move(weights));
}

inline std::optional<FitRequest> fit_request_from_json(const Json& j) {
  if (!j.is_object()) return std::nullopt;
  const auto it = j.find("fit_t");
  if (it == j.end()) return std::nullopt;
  const std::string where = "fit_t";
  FitRequest req{detail::integer(detail::field(*it, "d", where), where)};
  if (const auto lo = it->find("nu_min"); lo != it->end()) req.nu_min = detail::number(*lo, where);
  if (const auto hi = it->find("nu_max"); hi != it->end()) req.nu_max = detail::number(*hi, where);
  return req;
}

// ---------------------------------------------------------------- reports

inline Json to_json(const VerificationReport& r) {
  Json j = {{"check_name", r.check_name}, {"statistic", r.statistic}, {"threshold", r.threshold},
            {"n_samples", r.n_samples},   {"seed", r.seed},           {"passed", r.passed}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace ellot::io
