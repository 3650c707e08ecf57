#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <type_traits>
#include <unordered_map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusqe/measures.hpp"
#include "torusqe/observables.hpp"
#include "torusqe/spectral.hpp"

namespace torusqe::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Coefficient tables: {"dim": d, "entries": [[[n_1..n_d], re, im], ...]}

inline LatticePoint point_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw std::invalid_argument("frequency has wrong length");
  LatticePoint p(dim);
  for (int i = 0; i < dim; ++i) p[i] = j[i].get<std::int64_t>();
  return p;
}

inline json point_to_json(const LatticePoint& p) {
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

template <class Sink>
void read_entries(const json& j, int dim, Sink&& sink) {
  for (const auto& e : j.at("entries")) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw std::invalid_argument("entry must be [[n...], re, im]");
    const double re = e[1].get<double>();
    const double im = e.size() == 3 ? e[2].get<double>() : 0.0;
    sink(point_from_json(e[0], dim), cplx(re, im));
  }
}

/// "real" defaults to true; such tables must be Hermitian symmetric.
inline Observable observable_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  Observable::CoeffMap m;
  read_entries(j, dim, [&](const LatticePoint& n, cplx v) { m[n] += v; });
  return Observable(dim, std::move(m), j.value("real", true), j.value("tol", 1e-12));
}

inline json observable_to_json(const Observable& a) {
  json out{{"dim", a.dim()}, {"real", a.is_real()}, {"entries", json::array()}};
  for (const auto& [n, v] : a.coeffs()) out["entries"].push_back(json::array({point_to_json(n), v.real(), v.imag()}));
  return out;
}

inline TorusMeasure measure_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  std::unordered_map<LatticePoint, cplx, LatticePointHash> table;
  read_entries(j, dim, [&](const LatticePoint& n, cplx v) { table[n] += v; });
  double mass = j.contains("mass") ? j.at("mass").get<double>() : table[LatticePoint::zero(dim)].real();
  return tabulated_measure(dim, mass, std::move(table));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return json::parse(in);
}

// ---------------------------------------------------------------------------
// "name:key=value:key=value" specs used by the command line

struct Spec {
  std::string name;
  std::map<std::string, std::string> args;

  bool has(const std::string& k) const { return args.count(k) != 0; }
  double num(const std::string& k, double dflt) const {
    auto it = args.find(k);
    if (it == args.end()) return dflt;
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("bad number for " + k + ": " + it->second);
    return v;
  }
  std::string str(const std::string& k, const std::string& dflt = "") const {
    auto it = args.find(k);
    return it == args.end() ? dflt : it->second;
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline Spec parse_spec(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.empty() || parts[0].empty()) throw std::invalid_argument("empty spec");
  Spec s{parts[0], {}};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + text + "'");
    s.args[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  return s;
}

/// Comma-separated list of exponential | paired | reflection |
/// haar[:seed=S][:count=K]. A haar entry expands to seeds S..S+K-1.
inline std::vector<BasisSpec> parse_basis_specs(const std::string& text) {
  std::vector<BasisSpec> out;
  for (const auto& item : split(text, ',')) {
    const auto s = parse_spec(item);
    if (s.name == "exponential") {
      out.push_back({BasisKind::exponential, 0});
    } else if (s.name == "paired") {
      out.push_back({BasisKind::paired, 0});
    } else if (s.name == "reflection") {
      out.push_back({BasisKind::reflection, 0});
    } else if (s.name == "haar") {
      const auto seed = static_cast<std::uint64_t>(std::stoull(s.str("seed", "0")));
      const auto count = std::stoull(s.str("count", "1"));
      if (count == 0) throw std::invalid_argument("haar count must be positive");
      for (std::uint64_t i = 0; i < count; ++i) out.push_back({BasisKind::haar, seed + i});
    } else {
      throw std::invalid_argument("unknown basis '" + s.name + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("no basis given");
  return out;
}

inline std::vector<std::array<double, 2>> read_curve_samples(const std::string& path) {
  const auto j = read_json_file(path);
  std::vector<std::array<double, 2>> pts;
  for (const auto& p : j.at("samples")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pts;
}

/// Builds a measure from a spec string, e.g.
///   circle:r=0.5:cx=0:cy=0     sphere:r=1       lebesgue:d=2     dirac:x=0,0
///   ellipse:a=1:b=0.5          segment:h=0      plane:h=0        curve:file=pts.json
///   qcircle:r=1  qsphere:r=1   tabulated:file=mu.json
/// Quadrature-backed entries take tol= (default `tol`).
inline TorusMeasure parse_measure(const std::string& text, double tol = 1e-10) {
  const auto s = parse_spec(text);
  const double qt = s.num("tol", tol);
  if (s.name == "circle") return circle_measure({s.num("cx", 0), s.num("cy", 0)}, s.num("r", 1));
  if (s.name == "sphere") return sphere_measure({s.num("cx", 0), s.num("cy", 0), s.num("cz", 0)}, s.num("r", 1));
  if (s.name == "lebesgue") return lebesgue_measure(static_cast<int>(s.num("d", 2)));
  if (s.name == "dirac") {
    std::vector<double> x;
    for (const auto& v : split(s.str("x", "0,0"), ',')) x.push_back(std::stod(v));
    return dirac_measure(std::move(x));
  }
  if (s.name == "ellipse")
    return quadrature_measure(ellipse_curve({s.num("cx", 0), s.num("cy", 0)}, s.num("a", 1), s.num("b", 0.5)), qt);
  if (s.name == "qcircle") return quadrature_measure(circle_curve({s.num("cx", 0), s.num("cy", 0)}, s.num("r", 1)), qt);
  if (s.name == "segment") return quadrature_measure(flat_segment(s.num("h", 0)), qt);
  if (s.name == "qsphere")
    return quadrature_measure(sphere_surface({s.num("cx", 0), s.num("cy", 0), s.num("cz", 0)}, s.num("r", 1)), qt);
  if (s.name == "plane") return quadrature_measure(flat_plane(s.num("h", 0)), qt);
  if (s.name == "curve") return quadrature_measure(sampled_curve(read_curve_samples(s.str("file"))), qt);
  if (s.name == "tabulated") return measure_from_json(read_json_file(s.str("file")));
  throw std::invalid_argument("unknown measure '" + s.name + "'");
}

/// Geometry behind a quadrature-backed spec, if any (for curvature checks).
inline std::optional<ParamHypersurface> parse_hypersurface(const std::string& text) {
  const auto s = parse_spec(text);
  if (s.name == "ellipse") return ellipse_curve({s.num("cx", 0), s.num("cy", 0)}, s.num("a", 1), s.num("b", 0.5));
  if (s.name == "qcircle" || s.name == "circle") return circle_curve({s.num("cx", 0), s.num("cy", 0)}, s.num("r", 1));
  if (s.name == "segment") return flat_segment(s.num("h", 0));
  if (s.name == "qsphere" || s.name == "sphere")
    return sphere_surface({s.num("cx", 0), s.num("cy", 0), s.num("cz", 0)}, s.num("r", 1));
  if (s.name == "plane") return flat_plane(s.num("h", 0));
  if (s.name == "curve") return sampled_curve(read_curve_samples(s.str("file")));
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Output

/// Shortest round-trip decimal form, so written numbers are reproducible.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    if (r.size() != header_.size()) throw std::logic_error("csv row has wrong width");
    rows_.push_back(std::move(r));
  }

  // for tables whose width depends on the dimension
  void row_cells(std::vector<std::string> r) {
    if (r.size() != header_.size()) throw std::logic_error("csv row has wrong width");
    rows_.push_back(std::move(r));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    if constexpr (std::is_same_v<I, bool>) return v ? "1" : "0";
    else return std::to_string(v);
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Whitespace-separated columns with a leading comment block; gnuplot reads
/// it directly (`plot "f.dat" using 1:2`).
inline std::string plot_data(const std::string& title, const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows) {
  std::string out = "# " + title + "\n# columns:";
  for (std::size_t i = 0; i < columns.size(); ++i) out += " " + std::to_string(i + 1) + "=" + columns[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? " " : "") + fmt(r[i]);
    out += "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

}  // namespace torusqe::io
