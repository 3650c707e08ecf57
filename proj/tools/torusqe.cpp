// torusqe: batch driver for the lattice, variance and restriction sweeps.
//
// Every subcommand reads its parameters from (in increasing priority) the
// built-in defaults, an optional --config JSON document, and explicit flags.
// It writes <prefix>.csv, <prefix>.json and <prefix>.dat into --out and exits
// with 0 (ok), 1 (usage / invalid configuration) or 2 (an inequality that
// must hold was violated beyond its tolerance).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "torusqe/dictionary.hpp"
#include "torusqe/io.hpp"
#include "torusqe/torusqe.hpp"

using namespace torusqe;
using io::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Option table shared by flag parsing, config merging and the reference page

struct Param {
  Param(std::string n, json d, std::string h) : name(std::move(n)), dflt(std::move(d)), help(std::move(h)) {}

  std::string name;
  json dflt;
  std::string help;
  std::string raw;
  bool flag_value = false;
  CLI::Option* opt = nullptr;
};

struct Command {
  std::string name;
  std::string summary;
  std::string csv_doc;
  CLI::App* app = nullptr;
  std::vector<Param> params;  // stable addresses after registration
  std::function<int(const json&)> run;
};

std::string show(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void register_params(Command& c) {
  for (auto& p : c.params) {
    const std::string help = p.help + " [default: " + show(p.dflt) + "]";
    if (p.dflt.is_boolean()) {
      p.opt = c.app->add_flag("--" + p.name, p.flag_value, help);
    } else {
      p.opt = c.app->add_option("--" + p.name, p.raw, help);
    }
  }
}

json convert(const Param& p, const std::string& raw) {
  try {
    std::size_t used = 0;
    if (p.dflt.is_number_integer()) {
      const long long v = std::stoll(raw, &used);
      if (used == raw.size()) return v;
    } else if (p.dflt.is_number()) {
      const double v = std::stod(raw, &used);
      if (used == raw.size()) return v;
    } else {
      return raw;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("--" + p.name + ": cannot parse '" + raw + "'");
}

json merged_config(const Command& c, const std::string& config_path) {
  json cfg = json::object();
  for (const auto& p : c.params) cfg[p.name] = p.dflt;
  if (!config_path.empty()) {
    json file;
    try {
      file = io::read_json_file(config_path);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
    if (!file.is_object()) throw UsageError("--config must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      if (it.key() == "command") continue;
      if (!cfg.contains(it.key())) throw UsageError("config key '" + it.key() + "' is not an option of " + c.name);
      const auto& d = cfg[it.key()];
      const bool same = (d.is_number() && it->is_number()) || d.type() == it->type();
      if (!same) throw UsageError("config key '" + it.key() + "' has the wrong type");
      cfg[it.key()] = d.is_number_integer() ? json(it->get<long long>()) : *it;
    }
  }
  for (const auto& p : c.params) {
    if (p.opt->count() == 0) continue;
    cfg[p.name] = p.dflt.is_boolean() ? json(p.flag_value) : convert(p, p.raw);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Config accessors with validation

int get_int(const json& cfg, const std::string& k) { return cfg.at(k).get<int>(); }
std::int64_t get_i64(const json& cfg, const std::string& k) { return cfg.at(k).get<std::int64_t>(); }
double get_num(const json& cfg, const std::string& k) { return cfg.at(k).get<double>(); }
std::string get_str(const json& cfg, const std::string& k) { return cfg.at(k).get<std::string>(); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

int get_dim(const json& cfg) {
  const int d = get_int(cfg, "d");
  require(d >= 2 && d <= 8, "--d must lie in [2, 8]");
  return d;
}

unsigned thread_count(const json& cfg) {
  // TORUSQE_THREADS wins over the config; 0 means "use the default"
  if (std::getenv("TORUSQE_THREADS")) return default_thread_count();
  const int t = get_int(cfg, "threads");
  require(t >= 0, "--threads must be non-negative");
  return t == 0 ? default_thread_count() : static_cast<unsigned>(t);
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& s : io::split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used > 0 && used == s.size(), what + ": cannot parse '" + s + "'");
    out.push_back(v);
  }
  require(!out.empty(), what + " is empty");
  return out;
}

LatticePoint point_arg(const std::string& text, int d, const std::string& what) {
  const auto v = number_list(text, what);
  require(static_cast<int>(v.size()) == d, what + " needs " + std::to_string(d) + " coordinates");
  LatticePoint p(d);
  for (int i = 0; i < d; ++i) {
    require(v[i] == std::floor(v[i]), what + " must be integral");
    p[i] = static_cast<std::int64_t>(v[i]);
  }
  return p;
}

// dict:NAME | cos:n=1,2[:amp=A] | const:v=V | path to a JSON observable
Observable observable_arg(const std::string& text, int d) {
  Observable a = Observable::constant(d, 1.0);
  if (text.rfind("dict:", 0) == 0) {
    const auto name = text.substr(5);
    bool found = false;
    for (auto& e : observable_dictionary(d)) {
      if (e.name == name) {
        a = e.a;
        found = true;
      }
    }
    require(found, "unknown dictionary observable '" + name + "'");
  } else if (text.rfind("cos:", 0) == 0) {
    const auto s = io::parse_spec(text);
    a = Observable::cosine(point_arg(s.str("n"), d, "cos:n"), s.num("amp", 1.0));
  } else if (text.rfind("const:", 0) == 0) {
    a = Observable::constant(d, io::parse_spec(text).num("v", 1.0));
  } else {
    try {
      a = io::observable_from_json(io::read_json_file(text));
    } catch (const std::exception& e) {
      throw UsageError("--obs: " + std::string(e.what()));
    }
  }
  require(a.dim() == d, "observable dimension does not match --d");
  return a;
}

TorusMeasure measure_arg(const std::string& text, double tol) {
  try {
    return io::parse_measure(text, tol);
  } catch (const std::exception& e) {
    throw UsageError("--measure: " + std::string(e.what()));
  }
}

std::vector<BasisSpec> basis_arg(const std::string& text) {
  try {
    return io::parse_basis_specs(text);
  } catch (const std::exception& e) {
    throw UsageError("--basis: " + std::string(e.what()));
  }
}

// ---------------------------------------------------------------------------
// Output

struct Result {
  io::CsvWriter csv;
  std::string plot_title;
  std::vector<std::string> plot_columns;
  std::vector<std::vector<double>> plot_rows;
  json summary = json::object();
  json violations = json::array();

  explicit Result(std::vector<std::string> header) : csv(std::move(header)) {}

  void violation(const std::string& what, double lhs, double rhs, json where = json::object()) {
    violations.push_back({{"inequality", what}, {"lhs", lhs}, {"rhs", rhs}, {"at", std::move(where)}});
  }
};

int emit(const std::string& command, const json& cfg, const Result& r) {
  const std::filesystem::path dir = get_str(cfg, "out");
  std::filesystem::create_directories(dir);
  const std::string prefix = get_str(cfg, "prefix").empty() ? command : get_str(cfg, "prefix");
  json doc{{"schema_version", io::kSchemaVersion},
           {"command", command},
           {"config", cfg},
           {"summary", r.summary},
           {"violations", r.violations}};
  doc["config"].erase("threads");  // not part of the result
  io::write_file((dir / (prefix + ".csv")).string(), r.csv.str());
  io::write_file((dir / (prefix + ".json")).string(), doc.dump(2) + "\n");
  io::write_file((dir / (prefix + ".dat")).string(), io::plot_data(r.plot_title, r.plot_columns, r.plot_rows));
  std::cout << r.summary.dump() << "\n";
  if (!r.violations.empty()) {
    std::cerr << r.violations.size() << " violation(s); see " << (dir / (prefix + ".json")).string() << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Subcommands

int run_shell(const json& cfg) {
  const int d = get_dim(cfg);
  const auto emax = get_i64(cfg, "emax");
  if (emax > 0) {
    Result r({"E", "r"});
    r.plot_title = "shell sizes r_" + std::to_string(d) + "(E)";
    r.plot_columns = {"E", "r"};
    const auto sizes = parallel_map(
        static_cast<std::size_t>(emax) + 1,
        [&](std::size_t E) { return static_cast<std::int64_t>(shell_size(d, static_cast<std::int64_t>(E))); },
        thread_count(cfg));
    std::int64_t nonempty = 0, rmax = 0;
    for (std::size_t E = 0; E < sizes.size(); ++E) {
      r.csv.row(static_cast<std::int64_t>(E), sizes[E]);
      r.plot_rows.push_back({static_cast<double>(E), static_cast<double>(sizes[E])});
      nonempty += sizes[E] > 0;
      rmax = std::max(rmax, sizes[E]);
    }
    r.summary = {{"d", d}, {"emax", emax}, {"nonempty", nonempty}, {"max_r", rmax}};
    return emit("shell", cfg, r);
  }
  const auto E = get_i64(cfg, "E");
  require(E >= 0, "--E must be non-negative");
  const auto shell = enumerate_shell(d, E);
  std::vector<std::string> header;
  for (int i = 0; i < d; ++i) header.push_back("k" + std::to_string(i + 1));
  Result r(header);
  r.plot_title = "points of the shell |k|^2 = " + std::to_string(E);
  r.plot_columns = header;
  for (const auto& k : shell.points()) {
    std::vector<std::string> cells;
    std::vector<double> xs;
    for (int i = 0; i < d; ++i) {
      cells.push_back(std::to_string(k[i]));
      xs.push_back(static_cast<double>(k[i]));
    }
    r.csv.row_cells(std::move(cells));
    r.plot_rows.push_back(std::move(xs));
  }
  r.summary = {{"d", d}, {"E", E}, {"r", shell.size()}};
  return emit("shell", cfg, r);
}

int run_paircount(const json& cfg) {
  const int d = get_dim(cfg);
  const auto emax = get_i64(cfg, "emax");
  if (emax > 0) {
    // cap sweep: in d = 2 a nonzero difference occurs at most twice on a circle
    Result r({"E", "r", "max_pair_count"});
    r.plot_title = "max_n pair count per shell";
    r.plot_columns = {"E", "max_pair_count"};
    const auto caps = parallel_map(
        static_cast<std::size_t>(emax),
        [&](std::size_t i) {
          const auto shell = enumerate_shell(d, static_cast<std::int64_t>(i) + 1);
          return std::make_pair(static_cast<std::int64_t>(shell.size()), max_pair_count(shell));
        },
        thread_count(cfg));
    std::int64_t worst = 0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      if (caps[i].first == 0) continue;
      const auto E = static_cast<std::int64_t>(i) + 1;
      r.csv.row(E, caps[i].first, caps[i].second);
      r.plot_rows.push_back({static_cast<double>(E), static_cast<double>(caps[i].second)});
      worst = std::max(worst, caps[i].second);
      if (d == 2 && caps[i].second > 2) r.violation("pair count <= 2 (d = 2)", caps[i].second, 2, {{"E", E}});
    }
    r.summary = {{"d", d}, {"emax", emax}, {"max_pair_count", worst}};
    return emit("paircount", cfg, r);
  }
  const auto E = get_i64(cfg, "E");
  require(E >= 1, "--E must be positive (or give --emax)");
  const auto shell = enumerate_shell(d, E);
  const auto counts = difference_counts(shell);
  std::vector<std::pair<LatticePoint, std::int64_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> header;
  for (int i = 0; i < d; ++i) header.push_back("n" + std::to_string(i + 1));
  header.push_back("count");
  Result r(header);
  r.plot_title = "pair counts by |n|^2 on |k|^2 = " + std::to_string(E);
  r.plot_columns = {"norm_sq_n", "count"};
  for (const auto& [n, cnt] : sorted) {
    std::vector<std::string> cells;
    for (int i = 0; i < d; ++i) cells.push_back(std::to_string(n[i]));
    cells.push_back(std::to_string(cnt));
    r.csv.row_cells(std::move(cells));
    r.plot_rows.push_back({static_cast<double>(n.norm_sq()), static_cast<double>(cnt)});
    if (d == 2 && cnt > 2) r.violation("pair count <= 2 (d = 2)", cnt, 2, {{"n", io::point_to_json(n)}});
  }
  r.summary = {{"d", d}, {"E", E}, {"r", shell.size()}, {"max_pair_count", max_pair_count(shell)}};
  if (!get_str(cfg, "n").empty()) {
    const auto n = point_arg(get_str(cfg, "n"), d, "--n");
    r.summary["n"] = io::point_to_json(n);
    r.summary["pair_count"] = pair_count(shell, n);
    const double lam = get_num(cfg, "lambda");
    if (lam > 0.0) r.summary["window_pair_count"] = interval_pair_count(n, get_num(cfg, "c"), lam);
  }
  return emit("paircount", cfg, r);
}

int run_separation(const json& cfg) {
  const auto N = get_i64(cfg, "N");
  const double delta = get_num(cfg, "delta");
  require(N >= 1, "--N must be positive");
  require(delta > 0.0 && delta < 1.0, "--delta must lie in (0, 1)");
  const auto survey = separation_survey(N, delta, thread_count(cfg));
  Result r({"E", "r2", "min_sep", "threshold", "is_separated"});
  r.plot_title = "minimal spacing against E^((1-delta)/2)";
  r.plot_columns = {"E", "min_sep", "threshold"};
  for (const auto& rec : survey.records) {
    r.csv.row(rec.norm_sq, rec.r2, rec.r2 >= 2 ? rec.min_sep : 0.0, rec.threshold, rec.is_separated);
    r.plot_rows.push_back({static_cast<double>(rec.norm_sq), rec.min_sep, rec.threshold});
  }
  r.summary = {{"N", N},
               {"delta", delta},
               {"eigenvalues", survey.records.size()},
               {"non_separated", survey.non_separated},
               {"fraction_non_separated", survey.fraction_non_separated},
               {"ratio_to_bound", survey.ratio_to_bound}};
  return emit("separation", cfg, r);
}

int run_iwaniec(const json& cfg) {
  const auto limit = get_i64(cfg, "limit");
  require(limit >= 2, "--limit must be >= 2");
  const double tol = get_num(cfg, "tol");
  const auto entries = iwaniec_search(limit);
  const auto a = Observable::cosine(LatticePoint{0, 2});
  Result r({"n", "E", "factor_count", "r2", "deviation"});
  r.plot_title = "deviation of phi_q for a = cos(2 x_2)";
  r.plot_columns = {"n", "deviation", "r2"};
  const auto devs = parallel_map(
      entries.size(),
      [&](std::size_t i) { return integrate_density(a, sharpness_sequence(entries[i].n)).real() - a.mean().real(); },
      thread_count(cfg));
  double worst = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    r.csv.row(e.n, e.norm_sq, e.factor_count, e.r2, devs[i]);
    r.plot_rows.push_back({static_cast<double>(e.n), devs[i], static_cast<double>(e.r2)});
    worst = std::max(worst, std::abs(devs[i] - 1.0));
    if (std::abs(devs[i] - 1.0) > tol) r.violation("phi_q deviation = 1", devs[i], 1.0, {{"n", e.n}});
    if (e.n >= 2 && (e.r2 < 8 || e.r2 > 16)) r.violation("8 <= r2 <= 16", e.r2, 16, {{"n", e.n}});
  }
  r.summary = {{"limit", limit}, {"entries", entries.size()}, {"max_deviation_error", worst}};
  return emit("iwaniec", cfg, r);
}

int run_zygmund(const json& cfg) {
  const int d = get_dim(cfg);
  const auto emax = get_i64(cfg, "emax");
  const int samples = get_int(cfg, "samples");
  const auto seed = static_cast<std::uint64_t>(get_i64(cfg, "seed"));
  require(emax >= 1, "--emax must be positive");
  require(samples >= 1, "--samples must be positive");
  const double bound = std::pow(3.0, 0.25);
  const double tol = get_num(cfg, "tol");
  Result r({"E", "r", "max_l4"});
  r.plot_title = "max L4 norm of sampled eigenfunctions";
  r.plot_columns = {"E", "max_l4", "bound"};
  const auto maxes = parallel_map(
      static_cast<std::size_t>(emax),
      [&](std::size_t i) {
        const auto shell = make_shell(d, static_cast<std::int64_t>(i) + 1);
        double m = -1.0;
        if (shell->empty()) return std::make_pair(std::int64_t{0}, m);
        for (const auto& psi : haar_samples(shell, seed, samples)) m = std::max(m, l4_norm(psi));
        return std::make_pair(static_cast<std::int64_t>(shell->size()), m);
      },
      thread_count(cfg));
  double worst = 0.0;
  for (std::size_t i = 0; i < maxes.size(); ++i) {
    if (maxes[i].first == 0) continue;
    const auto E = static_cast<std::int64_t>(i) + 1;
    r.csv.row(E, maxes[i].first, maxes[i].second);
    r.plot_rows.push_back({static_cast<double>(E), maxes[i].second, bound});
    worst = std::max(worst, maxes[i].second);
    if (d == 2 && maxes[i].second > bound + tol) r.violation("L4 <= 3^(1/4)", maxes[i].second, bound, {{"E", E}});
  }
  r.summary = {{"d", d}, {"emax", emax}, {"samples", samples}, {"max_l4", worst}};
  if (d == 2) r.summary["bound"] = bound;
  return emit("zygmund", cfg, r);
}

SpectralWindow window_for(const json& cfg, int d, double lambda) {
  const auto mode = get_str(cfg, "mode");
  if (mode == "long") {
    const double c = get_num(cfg, "c");
    require(c >= 0.0 && c <= lambda, "--c must lie in [0, lambda]");
    return SpectralWindow::closed(d, c, lambda);
  }
  if (mode == "short") return SpectralWindow::short_window(d, lambda);
  throw UsageError("--mode must be long, short or eigenspace");
}

json report_json(const VarianceReport& rep) {
  return {{"c", rep.c},
          {"lambda", rep.lambda},
          {"open_lower", rep.open_lower},
          {"cardinality", rep.cardinality},
          {"v2", rep.v2},
          {"prop_rhs", rep.prop_rhs},
          {"maintheo_rhs", rep.maintheo_rhs},
          {"maintheo_ratio", rep.maintheo_ratio},
          {"short_ratio", rep.short_ratio},
          {"max_interval_cap", rep.max_interval_cap},
          {"moment_violations", rep.moment_violations},
          {"prop_holds", rep.prop_holds}};
}

void check_report(Result& r, const VarianceReport& rep, const std::string& basis) {
  for (const auto& row : rep.rows) {
    if (row.s2 > row.moment_rhs + kInequalitySlack) {
      r.violation("S2 <= moment bound", row.s2, row.moment_rhs, {{"basis", basis}, {"E", row.E}});
    }
  }
  if (!rep.prop_holds) r.violation("V2 <= window pair-count bound", rep.v2, rep.prop_rhs, {{"basis", basis}, {"lambda", rep.lambda}});
}

int run_variance(const json& cfg) {
  const int d = get_dim(cfg);
  const auto a = observable_arg(get_str(cfg, "obs"), d);
  require(a.is_real(), "variance needs a real-valued observable");
  const auto bases = basis_arg(get_str(cfg, "basis"));
  const auto threads = thread_count(cfg);
  const auto mode = get_str(cfg, "mode");

  if (mode == "eigenspace") {
    const auto E = get_i64(cfg, "E");
    auto shell = make_shell(d, E);
    require(!shell->empty(), "--E is not a sum of " + std::to_string(d) + " squares");
    Result r({"basis", "E", "r", "s2", "mean_variance", "d2_bound", "general_bound", "general_ratio"});
    r.plot_title = "eigenspace variance by basis";
    r.plot_columns = {"basis_index", "mean_variance", "d2_bound"};
    json per = json::array();
    for (std::size_t b = 0; b < bases.size(); ++b) {
      const auto rep = eigenspace_bound_report(a, shell, bases[b].provider());
      r.csv.row(bases[b].name(), rep.E, rep.r, rep.s2, rep.mean_variance, rep.d2_bound, rep.general_bound,
                rep.general_ratio);
      r.plot_rows.push_back({static_cast<double>(b), rep.mean_variance, rep.d2_bound});
      per.push_back({{"basis", bases[b].name()},
                     {"s2", rep.s2},
                     {"mean_variance", rep.mean_variance},
                     {"d2_bound", rep.d2_bound},
                     {"general_ratio", rep.general_ratio}});
      if (!rep.holds) r.violation("S2 / r <= 2 ||a||^2 / r", rep.mean_variance, rep.d2_bound, {{"basis", bases[b].name()}});
    }
    r.summary = {{"d", d}, {"E", E}, {"r", shell->size()}, {"bases", per}};
    return emit("variance", cfg, r);
  }

  const auto lambdas = number_list(get_str(cfg, "lambda"), "--lambda");
  Result r({"basis", "lambda", "E", "r", "s2", "moment_rhs", "max_abs_deviation"});
  r.plot_title = "V2 against lambda with both bounds";
  r.plot_columns = {"lambda", "v2", "prop_rhs", "maintheo_rhs"};
  json per = json::array();
  for (const auto& spec : bases) {
    const auto provider = caching_provider(spec.provider());
    for (double lambda : lambdas) {
      require(lambda > 0.0, "--lambda values must be positive");
      const auto w = window_for(cfg, d, lambda);
      VarianceReport rep;
      if (w.shells.empty()) {
        rep.lambda = lambda;
        rep.empty = true;
      } else {
        rep = v2(a, w, provider, threads);
      }
      for (const auto& row : rep.rows) {
        double m = 0.0;
        for (double x : row.deviations) m = std::max(m, std::abs(x));
        r.csv.row(spec.name(), lambda, row.E, row.r, row.s2, row.moment_rhs, m);
      }
      r.plot_rows.push_back({lambda, rep.v2, rep.prop_rhs, rep.maintheo_rhs});
      auto j = report_json(rep);
      j["basis"] = spec.name();
      j["empty"] = rep.empty;
      per.push_back(j);
      check_report(r, rep, spec.name());
    }
  }
  r.summary = {{"d", d}, {"mode", mode}, {"reports", per}};
  return emit("variance", cfg, r);
}

int run_measure_variance(const json& cfg) {
  const auto mu = measure_arg(get_str(cfg, "measure"), get_num(cfg, "quad-tol"));
  const int d = mu.dim();
  const auto a = observable_arg(get_str(cfg, "obs"), d);
  require(a.is_real(), "measure-variance needs a real-valued observable");
  const auto bases = basis_arg(get_str(cfg, "basis"));
  const auto mode_name = get_str(cfg, "mode");
  require(mode_name == "raw" || mode_name == "probability", "--mode must be raw or probability");
  const auto mode = mode_name == "raw" ? MeasureMode::raw : MeasureMode::probability;
  require(mode == MeasureMode::raw || mu.decay_alpha().has_value(),
          "probability mode needs a measure with a known decay exponent (circle, sphere, lebesgue, dirac)");
  const auto lambdas = number_list(get_str(cfg, "lambda"), "--lambda");
  const auto threads = thread_count(cfg);
  Result r({"basis", "lambda", "E", "r", "s2", "max_abs_deviation"});
  r.plot_title = "measure variance against lambda";
  r.plot_columns = {"lambda", "v2", "measure_rhs", "alpha_sum"};
  json per = json::array();
  for (const auto& spec : bases) {
    const auto provider = caching_provider(spec.provider());
    for (double lambda : lambdas) {
      require(lambda > 0.0, "--lambda values must be positive");
      const double c = get_num(cfg, "c");
      require(c >= 0.0 && c <= lambda, "--c must lie in [0, lambda]");
      const auto w = SpectralWindow::closed(d, c, lambda);
      require(!w.shells.empty(), "empty spectral window at lambda = " + io::fmt(lambda));
      const auto rep = measure_variance(a, mu, w, provider, mode, threads);
      for (const auto& row : rep.base.rows) {
        double m = 0.0;
        for (double x : row.deviations) m = std::max(m, std::abs(x));
        r.csv.row(spec.name(), lambda, row.E, row.r, row.s2, m);
      }
      r.plot_rows.push_back({lambda, rep.base.v2, rep.measure_rhs, rep.alpha_sum});
      json j{{"basis", spec.name()},         {"lambda", lambda},
             {"cardinality", rep.base.cardinality}, {"v2", rep.base.v2},
             {"target", rep.target},         {"measure_rhs", rep.measure_rhs},
             {"measure_ratio", rep.measure_ratio}};
      if (rep.alpha) {
        j["alpha"] = std::isfinite(*rep.alpha) ? json(*rep.alpha) : json("inf");
        j["alpha_case"] = to_string(rep.alpha_case);
        j["alpha_sum"] = rep.alpha_sum;
        j["envelopes"] = {{"log_sq", rep.envelopes[0]}, {"log", rep.envelopes[1]}, {"one", rep.envelopes[2]}};
      }
      per.push_back(j);
    }
  }
  r.summary = {{"d", d}, {"measure", mu.name()}, {"mass", mu.mass()}, {"mode", mode_name}, {"reports", per}};
  return emit("measure-variance", cfg, r);
}

int run_restriction(const json& cfg) {
  const auto sigma = measure_arg(get_str(cfg, "measure"), get_num(cfg, "quad-tol"));
  const int d = sigma.dim();
  const auto a = observable_arg(get_str(cfg, "obs"), d);
  const auto basis = basis_arg(get_str(cfg, "basis"));
  require(basis.size() == 1, "restriction takes a single --basis");
  const auto provider = basis[0].provider();
  const auto emin = get_i64(cfg, "emin"), emax = get_i64(cfg, "emax");
  require(emin >= 1 && emax >= emin, "need 1 <= emin <= emax");
  const auto threads = thread_count(cfg);
  const double tol = get_num(cfg, "tol");

  if (cfg.at("separated").get<bool>()) {
    require(d == 2, "--separated is for curves in T^2");
    const double delta = get_num(cfg, "delta");
    std::vector<std::int64_t> Es;
    for (const auto& rec : separation_survey(emax, delta, threads).records) {
      if (rec.norm_sq >= emin && rec.is_separated) Es.push_back(rec.norm_sq);
    }
    require(!Es.empty(), "no separated eigenvalues in [emin, emax]");
    const auto rows = curve_equidistribution_sweep(a, sigma, Es, provider, delta, threads);
    Result r({"E", "lambda", "max_deviation", "offdiag_mass", "budget"});
    r.plot_title = "restricted deviation along separated eigenvalues";
    r.plot_columns = {"lambda", "max_deviation", "budget"};
    double worst = 0.0;
    for (const auto& row : rows) {
      r.csv.row(row.E, row.lambda, row.max_deviation, row.offdiag_mass, row.budget);
      r.plot_rows.push_back({row.lambda, row.max_deviation, row.budget});
      worst = std::max(worst, row.max_deviation);
    }
    r.summary = {{"measure", sigma.name()}, {"eigenvalues", rows.size()}, {"max_deviation", worst},
                 {"target", restriction_target(a, sigma)}};
    return emit("restriction", cfg, r);
  }

  std::vector<ShellPtr> shells;
  for (std::int64_t E = emin; E <= emax; ++E) {
    auto s = make_shell(d, E);
    if (!s->empty()) shells.push_back(std::move(s));
  }
  require(!shells.empty(), "no eigenvalues in [emin, emax]");
  const auto recs = restriction_sweep(a, sigma, shells, provider, threads);
  Result r({"E", "j", "restriction_value", "target", "period_re", "period_im", "cs_bound", "l2_ratio"});
  r.plot_title = "restriction integrals per eigenfunction";
  r.plot_columns = {"E", "restriction_value", "target", "l2_ratio"};
  double max_dev = 0.0, max_ratio = 0.0, min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& rec : recs) {
    r.csv.row(rec.E, static_cast<std::int64_t>(rec.j), rec.restriction_value, rec.target, rec.period.real(),
              rec.period.imag(), rec.cs_bound, rec.l2_ratio);
    r.plot_rows.push_back({static_cast<double>(rec.E), rec.restriction_value, rec.target, rec.l2_ratio});
    max_dev = std::max(max_dev, std::abs(rec.restriction_value - rec.target));
    max_ratio = std::max(max_ratio, rec.l2_ratio);
    min_ratio = std::min(min_ratio, rec.l2_ratio);
    if (std::abs(rec.period) > rec.cs_bound + tol) {
      r.violation("|period| <= Cauchy-Schwarz bound", std::abs(rec.period), rec.cs_bound,
                  {{"E", rec.E}, {"j", rec.j}});
    }
  }
  r.summary = {{"measure", sigma.name()}, {"records", recs.size()}, {"target", recs.front().target},
               {"max_deviation", max_dev}, {"l2_ratio_min", min_ratio}, {"l2_ratio_max", max_ratio}};
  return emit("restriction", cfg, r);
}

int run_period_decay(const json& cfg) {
  const auto spec = get_str(cfg, "measure");
  const auto sigma = measure_arg(spec, get_num(cfg, "quad-tol"));
  if (!cfg.at("allow-flat").get<bool>()) {
    const auto geom = io::parse_hypersurface(spec);
    require(geom.has_value(), "period-decay needs a curved hypersurface measure (or --allow-flat)");
    const double kmin = curvature_min(*geom, 256);
    require(kmin > 1e-9, "hypersurface has vanishing curvature (min " + io::fmt(kmin) + "); pass --allow-flat");
  }
  const auto emax = get_i64(cfg, "emax");
  require(emax >= 1, "--emax must be positive");
  const double tol = get_num(cfg, "tol");
  const auto rows = period_decay_sweep(sigma, emax, static_cast<std::uint64_t>(get_i64(cfg, "seed")),
                                       get_int(cfg, "samples"), get_num(cfg, "delta"), thread_count(cfg));
  Result r({"E", "lambda", "max_period", "cs_bound", "scaled_half", "scaled_delta"});
  r.plot_title = "period integrals against the Cauchy-Schwarz bound";
  r.plot_columns = {"lambda", "max_period", "cs_bound", "scaled_half"};
  double max_scaled = 0.0;
  for (const auto& row : rows) {
    r.csv.row(row.E, row.lambda, row.max_period, row.cs_bound, row.scaled_half, row.scaled_delta);
    r.plot_rows.push_back({row.lambda, row.max_period, row.cs_bound, row.scaled_half});
    max_scaled = std::max(max_scaled, row.scaled_half);
    if (row.max_period > row.cs_bound + tol) r.violation("|period| <= Cauchy-Schwarz bound", row.max_period, row.cs_bound, {{"E", row.E}});
  }
  r.summary = {{"measure", sigma.name()}, {"shells", rows.size()}, {"max_scaled_half", max_scaled}};
  return emit("period-decay", cfg, r);
}

int run_decay_fit(const json& cfg) {
  const auto mu = measure_arg(get_str(cfg, "measure"), get_num(cfg, "quad-tol"));
  const auto emax = get_i64(cfg, "emax");
  require(emax >= 16, "--emax must be >= 16");
  const auto threads = thread_count(cfg);
  const auto fit = decay_fit(mu, emax, threads);
  const auto sups = parallel_map(
      static_cast<std::size_t>(emax),
      [&](std::size_t i) {
        const auto shell = enumerate_shell(mu.dim(), static_cast<std::int64_t>(i) + 1);
        double s = -1.0;
        for (const auto& n : shell.points()) s = std::max(s, std::norm(mu(n)));
        return s;
      },
      threads);
  Result r({"E", "norm", "sup_abs_sq"});
  r.plot_title = "sup |mu^(n)|^2 per shell with the fitted envelope";
  r.plot_columns = {"norm", "sup_abs_sq", "fit"};
  for (std::size_t i = 0; i < sups.size(); ++i) {
    if (sups[i] < 0.0) continue;
    const double nn = std::sqrt(static_cast<double>(i + 1));
    r.csv.row(static_cast<std::int64_t>(i + 1), nn, sups[i]);
    r.plot_rows.push_back({nn, sups[i], fit.constant * std::pow(nn, -fit.alpha)});
  }
  r.summary = {{"measure", mu.name()},          {"alpha_hat", fit.alpha},
               {"constant", fit.constant},      {"alpha_hat_shifted", fit.alpha_shifted},
               {"constant_shifted", fit.constant_shifted}, {"shells_used", fit.shells_used}};
  if (mu.decay_alpha() && std::isfinite(*mu.decay_alpha())) {
    const double expected = *mu.decay_alpha();
    r.summary["alpha_expected"] = expected;
    const double tol = get_num(cfg, "alpha-tol");
    if (fit.alpha < expected - tol) r.violation("fitted decay >= known exponent - tol", fit.alpha, expected - tol);
  }
  return emit("decay-fit", cfg, r);
}

// ---------------------------------------------------------------------------

std::vector<Command> make_commands() {
  const std::vector<Param> common{
      {"out", ".", "output directory"},
      {"prefix", "", "file name prefix (defaults to the subcommand name)"},
      {"threads", 0, "worker threads, 0 = all cores; TORUSQE_THREADS overrides"},
  };
  auto with_common = [&](std::vector<Param> p) {
    p.insert(p.end(), common.begin(), common.end());
    return p;
  };
  const std::string obs_help = "observable: dict:NAME | cos:n=1,2[:amp=A] | const:v=V | JSON file";
  const std::string measure_help =
      "measure: circle:r=R[:cx:cy] | sphere:r=R | lebesgue:d=D | dirac:x=a,b | ellipse:a=A:b=B | qcircle:r=R | "
      "segment:h=H | qsphere:r=R | plane:h=H | curve:file=F | tabulated:file=F";
  std::vector<Command> cmds;
  cmds.push_back({"shell", "enumerate one shell, or count r_d(E) for E <= emax", "k1..kd per point, or E,r", nullptr,
                  with_common({{"d", 2, "dimension"}, {"E", 25, "squared norm"}, {"emax", 0, "count mode when > 0"}}),
                  run_shell});
  cmds.push_back({"paircount", "difference multiplicities on a shell, or the cap sweep over E <= emax",
                  "n1..nd,count; or E,r,max_pair_count", nullptr,
                  with_common({{"d", 2, "dimension"},
                               {"E", 25, "squared norm"},
                               {"n", "", "difference vector a,b,... to report"},
                               {"c", 0.0, "window lower end for the window count"},
                               {"lambda", 0.0, "window upper end (> 0 enables the window count)"},
                               {"emax", 0, "cap sweep mode when > 0"}}),
                  run_paircount});
  cmds.push_back({"separation", "minimal spacing survey of d = 2 shells", "E,r2,min_sep,threshold,is_separated",
                  nullptr, with_common({{"N", 1000, "largest E"}, {"delta", 0.2, "separation exponent"}}),
                  run_separation});
  cmds.push_back({"iwaniec", "n with n^2+1 having at most two prime factors, and the phi_q deviation",
                  "n,E,factor_count,r2,deviation", nullptr,
                  with_common({{"limit", 100, "largest n"}, {"tol", 1e-12, "deviation tolerance"}}), run_iwaniec});
  cmds.push_back({"zygmund", "largest L4 norm over Haar samples per shell", "E,r,max_l4", nullptr,
                  with_common({{"d", 2, "dimension"},
                               {"emax", 500, "largest E"},
                               {"samples", 20, "Haar eigenfunctions per shell"},
                               {"seed", 0, "Haar seed"},
                               {"tol", 1e-9, "slack on the 3^(1/4) bound"}}),
                  run_zygmund});
  cmds.push_back({"variance", "quantum variance over long / short windows or one eigenspace",
                  "basis,lambda,E,r,s2,moment_rhs,max_abs_deviation (eigenspace: per basis)", nullptr,
                  with_common({{"d", 2, "dimension"},
                               {"mode", "long", "long | short | eigenspace"},
                               {"lambda", "10", "comma list of window upper ends"},
                               {"c", 0.0, "long window lower end"},
                               {"E", 25, "eigenspace mode: squared norm"},
                               {"obs", "dict:cos_1_1", obs_help},
                               {"basis", "haar:seed=0:count=1", "comma list: exponential | paired | reflection | haar:seed=S:count=K"}}),
                  run_variance});
  cmds.push_back({"measure-variance", "variance of integrals against a singular measure",
                  "basis,lambda,E,r,s2,max_abs_deviation", nullptr,
                  with_common({{"measure", "circle:r=1", measure_help},
                               {"mode", "probability", "raw | probability"},
                               {"lambda", "10", "comma list of window upper ends"},
                               {"c", 0.0, "window lower end"},
                               {"obs", "dict:cos_1_1", obs_help},
                               {"basis", "haar:seed=0:count=1", "basis list"},
                               {"quad-tol", 1e-10, "quadrature tolerance"}}),
                  run_measure_variance});
  cmds.push_back({"restriction", "restriction integrals, periods and L2 ratios on a hypersurface",
                  "E,j,restriction_value,target,period_re,period_im,cs_bound,l2_ratio (separated: E,lambda,max_deviation,offdiag_mass,budget)",
                  nullptr,
                  with_common({{"measure", "circle:r=1", measure_help},
                               {"obs", "const:v=1", obs_help},
                               {"basis", "haar:seed=0", "single basis"},
                               {"emin", 1, "smallest E"},
                               {"emax", 100, "largest E"},
                               {"separated", false, "only separated E (d = 2), reporting deviation and budget"},
                               {"delta", 0.2, "separation exponent"},
                               {"tol", 1e-9, "slack on the Cauchy-Schwarz bound"},
                               {"quad-tol", 1e-10, "quadrature tolerance"}}),
                  run_restriction});
  cmds.push_back({"period-decay", "period integrals of Haar eigenfunctions per shell",
                  "E,lambda,max_period,cs_bound,scaled_half,scaled_delta", nullptr,
                  with_common({{"measure", "circle:r=1", measure_help},
                               {"emax", 200, "largest E"},
                               {"samples", 8, "Haar eigenfunctions per shell"},
                               {"seed", 0, "Haar seed"},
                               {"delta", 0.1, "exponent in the scaled column"},
                               {"allow-flat", false, "skip the curvature check"},
                               {"tol", 1e-9, "slack on the Cauchy-Schwarz bound"},
                               {"quad-tol", 1e-10, "quadrature tolerance"}}),
                  run_period_decay});
  cmds.push_back({"decay-fit", "fit sup |mu^(n)|^2 ~ C |n|^-alpha over shells", "E,norm,sup_abs_sq", nullptr,
                  with_common({{"measure", "circle:r=1", measure_help},
                               {"emax", 2000, "largest E"},
                               {"alpha-tol", 0.15, "allowed shortfall against a known exponent"},
                               {"quad-tol", 1e-10, "quadrature tolerance"}}),
                  run_decay_fit});
  return cmds;
}

std::string reference_page(const std::vector<Command>& cmds) {
  std::string out = "# torusqe command reference\n\n";
  out += "Parameters come from the defaults below, then `--config FILE` (a JSON object keyed by option name), then "
         "explicit flags. Each run writes `<prefix>.csv`, `<prefix>.json` (schema_version " +
         std::to_string(io::kSchemaVersion) +
         ") and `<prefix>.dat`. Exit codes: 0 ok, 1 usage error, 2 violated inequality.\n";
  for (const auto& c : cmds) {
    out += "\n## " + c.name + "\n\n" + c.summary + "\n\nCSV columns: `" + c.csv_doc + "`\n\n";
    out += "| option | default | description |\n|---|---|---|\n";
    for (const auto& p : c.params) out += "| `--" + p.name + "` | `" + show(p.dflt) + "` | " + p.help + " |\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusqe: quantum variance experiments for eigenfunctions on flat tori"};
  app.require_subcommand(1);
  auto cmds = make_commands();
  std::string config_path;
  for (auto& c : cmds) {
    c.app = app.add_subcommand(c.name, c.summary);
    c.app->add_option("--config", config_path, "JSON file with option values");
    register_params(c);
  }
  auto* ref = app.add_subcommand("reference", "print the option reference as markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (ref->parsed()) {
    std::cout << reference_page(cmds);
    return 0;
  }
  for (auto& c : cmds) {
    if (!c.app->parsed()) continue;
    try {
      return c.run(merged_config(c, config_path));
    } catch (const UsageError& e) {
      std::cerr << "torusqe " << c.name << ": " << e.what() << "\n";
      return 1;
    } catch (const std::invalid_argument& e) {
      std::cerr << "torusqe " << c.name << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "torusqe " << c.name << ": error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
