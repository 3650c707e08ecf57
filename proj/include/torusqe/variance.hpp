#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusqe/measures.hpp"
#include "torusqe/observables.hpp"
#include "torusqe/parallel.hpp"
#include "torusqe/spectral.hpp"

namespace torusqe {

/// Slack used when checking the exact inequalities.
inline constexpr double kInequalitySlack = 1e-9;

/// The eigenvalues E with c^2 <= E <= lambda^2 (or c^2 < E for the short
/// window) whose shell in dimension d is nonempty.
struct SpectralWindow {
  int dim = 2;
  double c = 0.0;
  double lambda = 0.0;
  bool open_lower = false;
  std::int64_t E_lo = 0;  // inclusive integer bounds after conversion
  std::int64_t E_hi = -1;
  std::vector<ShellPtr> shells;

  /// [c, lambda], both ends inclusive.
  static SpectralWindow closed(int d, double c, double lambda) {
    const auto r = norm_sq_range(c, lambda);
    return build(d, c, lambda, false, r.lo, r.hi);
  }

  /// [0, lambda].
  static SpectralWindow long_window(int d, double lambda) { return closed(d, 0.0, lambda); }

  /// (lambda - 1, lambda], i.e. E in ((lambda-1)^2, lambda^2].
  static SpectralWindow short_window(int d, double lambda) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("short window needs lambda >= 1");
    const double c = lambda - 1.0;
    const auto r = norm_sq_range(c, lambda);
    const double csq = c * c;
    const auto lo = static_cast<std::int64_t>(std::floor(csq + 1e-9 * std::max(1.0, csq))) + 1;
    return build(d, c, lambda, true, lo, r.hi);
  }

  /// The single eigenspace E.
  static SpectralWindow eigenspace(int d, std::int64_t E) {
    const double l = std::sqrt(static_cast<double>(E));
    return build(d, l, l, false, E, E);
  }

  std::int64_t cardinality() const noexcept {
    std::int64_t n = 0;
    for (const auto& s : shells) n += static_cast<std::int64_t>(s->size());
    return n;
  }

  std::vector<std::int64_t> eigenvalues() const {
    std::vector<std::int64_t> out;
    for (const auto& s : shells) out.push_back(s->norm_sq());
    return out;
  }

 private:
  static SpectralWindow build(int d, double c, double lambda, bool open, std::int64_t lo, std::int64_t hi) {
    SpectralWindow w;
    w.dim = d;
    w.c = c;
    w.lambda = lambda;
    w.open_lower = open;
    w.E_lo = std::max<std::int64_t>(lo, 0);
    w.E_hi = hi;
    for (std::int64_t E = w.E_lo; E <= w.E_hi; ++E) {
      auto s = make_shell(d, E);
      if (!s->empty()) w.shells.push_back(std::move(s));
    }
    return w;
  }
};

/// Signed deviations int a|psi_j|^2 dx - int a dx over the rows of B.
/// For real a these are real; the imaginary parts are dropped after a check.
inline std::vector<double> deviations(const Observable& a, const EigenBasis& B) {
  if (!a.is_real()) throw std::invalid_argument("variance sums need a real-valued observable");
  if (a.dim() != B.shell().dim()) throw std::invalid_argument("observable and basis dimensions differ");
  const MatrixElementPlan plan(a, B.shell());
  const double mean = a.mean().real();
  std::vector<double> out(B.size());
  for (std::size_t j = 0; j < B.size(); ++j) {
    const cplx v = plan.apply(B.row(j));
    if (std::abs(v.imag()) > 1e-8) throw std::logic_error("matrix element of a real observable is not real");
    out[j] = v.real() - mean;
  }
  return out;
}

/// S_2(a, lambda): sum of squared deviations over the eigenbasis rows.
inline double s2(const Observable& a, const EigenBasis& B) {
  double s = 0.0;
  for (double v : deviations(a, B)) s += v * v;
  return s;
}

/// sum_{1 <= |n| <= 2 sqrt(E)} |a_n|^2 pair_count(shell, n).
inline double moment_bound_rhs(const Observable& a, const LatticeShell& shell) {
  if (a.dim() != shell.dim()) throw std::invalid_argument("observable and shell dimensions differ");
  const std::int64_t reach = 4 * shell.norm_sq();
  double s = 0.0;
  for (const auto& [n, v] : a.coeffs()) {
    if (n.is_zero() || n.norm_sq() > reach) continue;
    s += std::norm(v) * static_cast<double>(pair_count(shell, n));
  }
  return s;
}

/// (1/lambda) sum_{1 <= |n| <= 2 lambda} |a_n|^2 / |n^|, the long-window bound
/// without its dimensional constant.
inline double maintheo_rhs(const Observable& a, double lambda) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("maintheo_rhs needs lambda >= 1");
  const double reach = 4.0 * lambda * lambda * (1.0 + 1e-12);
  double s = 0.0;
  for (const auto& [n, v] : a.coeffs()) {
    if (n.is_zero() || static_cast<double>(n.norm_sq()) > reach) continue;
    s += std::norm(v) / primitive(n).norm();
  }
  return s / lambda;
}

struct VarianceRow {
  std::int64_t E = 0;
  std::int64_t r = 0;
  double s2 = 0.0;
  double moment_rhs = 0.0;
  std::vector<double> deviations;
};

/// Per-eigenvalue rows plus window aggregates. Theorem constants are not
/// assumed: each `*_ratio` is LHS / RHS, an empirical constant.
struct VarianceReport {
  int dim = 2;
  double c = 0.0;
  double lambda = 0.0;
  bool open_lower = false;
  std::vector<VarianceRow> rows;
  std::int64_t cardinality = 0;  // sum of r over rows
  double v2 = 0.0;
  double prop_rhs = 0.0;              // window pair-count bound
  double maintheo_rhs = 0.0;          // (1/lambda) sum |a_n|^2/|n^|
  double maintheo_ratio = 0.0;        // v2 / maintheo_rhs
  double l2_norm_sq = 0.0;            // ||a||^2
  double short_ratio = 0.0;           // v2 * lambda / ||a||^2
  double max_interval_cap = 0.0;      // max_n window pair count / lambda^{d-2}
  int moment_violations = 0;
  bool prop_holds = true;
  bool empty = false;

  bool ok() const noexcept { return moment_violations == 0 && prop_holds; }
};

namespace detail {

inline VarianceRow eigenspace_row(const Observable& a, const ShellPtr& shell, const BasisProvider& provider) {
  const EigenBasis B = provider(shell);
  VarianceRow row;
  row.E = shell->norm_sq();
  row.r = static_cast<std::int64_t>(shell->size());
  row.deviations = deviations(a, B);
  for (double v : row.deviations) row.s2 += v * v;
  row.moment_rhs = moment_bound_rhs(a, *shell);
  return row;
}

inline double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// V_2 over a window and the pair-count bound
/// sum_n |a_n|^2 |{k : |k| = |k+n| in window}| / |{k : |k| in window}|.
///
/// The numerator counts come from interval_pair_count_sq and are checked
/// against the per-shell pair counts.
inline VarianceReport v2(const Observable& a, const SpectralWindow& window, const BasisProvider& provider,
                         unsigned threads = 0) {
  if (a.dim() != window.dim) throw std::invalid_argument("observable and window dimensions differ");
  VarianceReport rep;
  rep.dim = window.dim;
  rep.c = window.c;
  rep.lambda = window.lambda;
  rep.open_lower = window.open_lower;
  rep.l2_norm_sq = a.l2_norm_sq();
  if (window.shells.empty()) throw std::invalid_argument("v2: empty spectral window");

  rep.rows = parallel_map(
      window.shells.size(),
      [&](std::size_t i) { return detail::eigenspace_row(a, window.shells[i], provider); }, threads);

  double total = 0.0;
  for (const auto& row : rep.rows) {
    total += row.s2;
    rep.cardinality += row.r;
    if (row.s2 > row.moment_rhs + kInequalitySlack) ++rep.moment_violations;
  }
  rep.v2 = total / static_cast<double>(rep.cardinality);

  const double reach = 4.0 * window.lambda * window.lambda * (1.0 + 1e-12);
  double num = 0.0;
  for (const auto& [n, v] : a.coeffs()) {
    if (n.is_zero() || static_cast<double>(n.norm_sq()) > reach) continue;
    const std::int64_t cnt = interval_pair_count_sq(n, window.E_lo, window.E_hi);
    std::int64_t per_shell = 0;
    for (const auto& s : window.shells) per_shell += pair_count(*s, n);
    if (cnt != per_shell) throw std::logic_error("interval pair count disagrees with per-shell pair counts");
    num += std::norm(v) * static_cast<double>(cnt);
    rep.max_interval_cap = std::max(rep.max_interval_cap,
                                    static_cast<double>(cnt) / std::pow(window.lambda, window.dim - 2));
  }
  rep.prop_rhs = num / static_cast<double>(rep.cardinality);
  rep.prop_holds = rep.v2 <= rep.prop_rhs + kInequalitySlack;
  if (window.lambda >= 1.0) {
    rep.maintheo_rhs = maintheo_rhs(a, window.lambda);
    rep.maintheo_ratio = detail::safe_ratio(rep.v2, rep.maintheo_rhs);
  }
  rep.short_ratio = detail::safe_ratio(rep.v2 * window.lambda, rep.l2_norm_sq);
  return rep;
}

/// V_2 over the short window (lambda - 1, lambda]. An empty window yields a
/// report with `empty` set rather than an error.
inline VarianceReport short_interval_report(const Observable& a, double lambda, const BasisProvider& provider,
                                            unsigned threads = 0) {
  if (!(lambda >= 2.0)) throw std::invalid_argument("short_interval_report needs lambda >= 2");
  const auto window = SpectralWindow::short_window(a.dim(), lambda);
  if (window.shells.empty()) {
    VarianceReport rep;
    rep.dim = a.dim();
    rep.c = window.c;
    rep.lambda = lambda;
    rep.open_lower = true;
    rep.empty = true;
    rep.l2_norm_sq = a.l2_norm_sq();
    return rep;
  }
  return v2(a, window, provider, threads);
}

struct EigenspaceBound {
  std::int64_t E = 0;
  std::int64_t r = 0;
  double s2 = 0.0;
  double mean_variance = 0.0;  // s2 / r
  double d2_bound = 0.0;       // 2 ||a||^2 / r, d = 2 only
  double general_bound = 0.0;  // ||a||^2 min{1, lambda^{d-2} / r}, constant omitted
  double general_ratio = 0.0;  // mean_variance / general_bound
  bool holds = true;           // d2 inequality (always true for d != 2)
};

inline EigenspaceBound eigenspace_bound_report(const Observable& a, const ShellPtr& shell,
                                               const BasisProvider& provider) {
  if (shell->empty()) throw std::invalid_argument("eigenspace_bound_report: empty shell");
  EigenspaceBound out;
  out.E = shell->norm_sq();
  out.r = static_cast<std::int64_t>(shell->size());
  out.s2 = s2(a, provider(shell));
  out.mean_variance = out.s2 / static_cast<double>(out.r);
  const double l2 = a.l2_norm_sq();
  const double rd = static_cast<double>(out.r);
  out.general_bound = l2 * std::min(1.0, std::pow(shell->lambda(), shell->dim() - 2) / rd);
  out.general_ratio = detail::safe_ratio(out.mean_variance, out.general_bound);
  if (shell->dim() == 2) {
    out.d2_bound = 2.0 * l2 / rd;
    out.holds = out.mean_variance <= out.d2_bound + kInequalitySlack;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variance against a measure

enum class MeasureMode {
  raw,          // hypersurface measure as given
  probability,  // mu / mass; requires decay metadata
};

enum class AlphaCase { above, critical, below };  // alpha vs d - 1

inline const char* to_string(AlphaCase c) {
  switch (c) {
    case AlphaCase::above: return "alpha>d-1";
    case AlphaCase::critical: return "alpha=d-1";
    case AlphaCase::below: return "alpha<d-1";
  }
  return "?";
}

/// sum_{1 <= |n| <= lambda} 1 / (|n^| |n|^alpha) over Z^d.
inline double alpha_pipeline_sum(int d, double alpha, double lambda) {
  const std::int64_t hi = static_cast<std::int64_t>(std::floor(lambda * lambda + 1e-9));
  double s = 0.0;
  LatticePoint n(d);
  auto rec = [&](auto&& self, int i, std::int64_t partial) -> void {
    const std::int64_t m = isqrt(hi - partial);
    for (std::int64_t v = -m; v <= m; ++v) {
      n[i] = v;
      if (i + 1 < d) {
        self(self, i + 1, partial + v * v);
      } else if (partial + v * v >= 1) {
        s += 1.0 / (primitive(n).norm() * std::pow(n.norm(), alpha));
      }
    }
  };
  rec(rec, 0, 0);
  return s;
}

inline AlphaCase classify_alpha(int d, double alpha, double tol = 1e-12) {
  if (std::fabs(alpha - (d - 1)) <= tol) return AlphaCase::critical;
  return alpha > d - 1 ? AlphaCase::above : AlphaCase::below;
}

/// Candidate envelopes (log lambda)^p lambda^{max(d-1-alpha, 0)} for p = 2, 1, 0.
inline std::array<double, 3> alpha_envelopes(int d, double alpha, double lambda) {
  const double power = std::pow(lambda, std::max(d - 1 - alpha, 0.0));
  const double L = std::log(lambda);
  return {L * L * power, L * power, power};
}

/// Least-squares exponent p in alpha_pipeline_sum ~ C (log lambda)^p lambda^{max(d-1-alpha,0)}
/// over the given lambdas (each > e).
inline double fit_log_exponent(int d, double alpha, const std::vector<double>& lambdas) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (double l : lambdas) {
    if (!(l > std::exp(1.0))) continue;
    const double y = std::log(alpha_pipeline_sum(d, alpha, l) / std::pow(l, std::max(d - 1 - alpha, 0.0)));
    const double x = std::log(std::log(l));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_log_exponent needs at least two lambdas above e");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct MeasureVarianceReport {
  VarianceReport base;           // rows/v2 with deviations against mu
  double target = 0.0;           // int a dmu
  double measure_rhs = 0.0;      // (1/lambda) sum_{1<=|n|<=2 lambda} |int a e^{-inx} dmu|^2 / |n^|
  double measure_ratio = 0.0;    // v2 / measure_rhs
  std::optional<double> alpha;
  double alpha_sum = 0.0;        // sum_{1<=|n|<=lambda} 1/(|n^| |n|^alpha)
  AlphaCase alpha_case = AlphaCase::above;
  std::array<double, 3> envelopes{};  // (log)^2, log, 1 times lambda^{max(d-1-alpha,0)}
};

/// Deviations int a|psi_j|^2 dmu - int a dmu for every basis row in the
/// window, computed as exact finite sums over mu^.
///
/// int a |psi|^2 dmu = sum_{k,l} c_k conj(c_l) W_{kl},  W_{kl} = int a e_{k-l} dmu.
inline MeasureVarianceReport measure_variance(const Observable& a, const TorusMeasure& mu_in,
                                              const SpectralWindow& window, const BasisProvider& provider,
                                              MeasureMode mode, unsigned threads = 0) {
  if (!a.is_real()) throw std::invalid_argument("variance sums need a real-valued observable");
  if (a.dim() != mu_in.dim() || a.dim() != window.dim) throw std::invalid_argument("measure_variance: dimension mismatch");
  if (window.shells.empty()) throw std::invalid_argument("measure_variance: empty spectral window");
  if (mode == MeasureMode::probability && !mu_in.decay_alpha()) {
    throw std::invalid_argument("measure_variance: probability mode needs decay metadata (alpha)");
  }
  const TorusMeasure mu = (mode == MeasureMode::probability ? mu_in.normalized() : mu_in).cached();
  const int d = window.dim;
  const LatticePoint zero = LatticePoint::zero(d);
  const cplx target = convolve_observable(a, mu, zero);

  MeasureVarianceReport out;
  out.target = target.real();
  auto& rep = out.base;
  rep.dim = d;
  rep.c = window.c;
  rep.lambda = window.lambda;
  rep.open_lower = window.open_lower;
  rep.l2_norm_sq = a.l2_norm_sq();

  rep.rows = parallel_map(
      window.shells.size(),
      [&](std::size_t si) {
        const auto& shell = window.shells[si];
        const std::size_t r = shell->size();
        const auto W = measure_pairing_matrix(a, mu, *shell);
        const EigenBasis B = provider(shell);
        VarianceRow row;
        row.E = shell->norm_sq();
        row.r = static_cast<std::int64_t>(r);
        row.deviations.resize(r);
        for (std::size_t j = 0; j < r; ++j) {
          const cplx v = measure_quadratic_form(W, B.row(j));
          row.deviations[j] = (v - target).real();
          row.s2 += std::norm(v - target);
        }
        return row;
      },
      threads);

  double total = 0.0;
  for (const auto& row : rep.rows) {
    total += row.s2;
    rep.cardinality += row.r;
  }
  rep.v2 = total / static_cast<double>(rep.cardinality);

  // (1/lambda) sum over the ball of radius 2 lambda
  const std::int64_t hi = static_cast<std::int64_t>(std::floor(4.0 * window.lambda * window.lambda + 1e-9));
  double rhs = 0.0;
  LatticePoint n(d);
  auto rec = [&](auto&& self, int i, std::int64_t partial) -> void {
    const std::int64_t m = isqrt(hi - partial);
    for (std::int64_t v = -m; v <= m; ++v) {
      n[i] = v;
      if (i + 1 < d) {
        self(self, i + 1, partial + v * v);
      } else if (partial + v * v >= 1) {
        rhs += std::norm(convolve_observable(a, mu, n)) / primitive(n).norm();
      }
    }
  };
  if (window.lambda >= 1.0) {
    rec(rec, 0, 0);
    out.measure_rhs = rhs / window.lambda;
    out.measure_ratio = detail::safe_ratio(rep.v2, out.measure_rhs);
  }

  out.alpha = mu.decay_alpha();
  if (out.alpha && std::isfinite(*out.alpha) && window.lambda >= 1.0) {
    out.alpha_sum = alpha_pipeline_sum(d, *out.alpha, window.lambda);
    out.alpha_case = classify_alpha(d, *out.alpha);
    out.envelopes = alpha_envelopes(d, *out.alpha, window.lambda);
  }
  return out;
}

struct DensityOneResult {
  std::vector<std::pair<std::int64_t, std::size_t>> kept;  // (E, row j)
  std::size_t total = 0;
  double density = 1.0;
};

/// Keeps the (E, j) with |deviation| <= R(lambda) log(lambda) lambda^{-1/2},
/// lambda = sqrt(E), and reports the kept fraction.
inline DensityOneResult density_one_extract(const VarianceReport& report, const std::function<double(double)>& R) {
  DensityOneResult out;
  for (const auto& row : report.rows) {
    const double lambda = std::sqrt(static_cast<double>(row.E));
    const double thr = lambda > 0.0 ? R(lambda) * std::log(lambda) / std::sqrt(lambda) : 0.0;
    for (std::size_t j = 0; j < row.deviations.size(); ++j) {
      ++out.total;
      if (std::fabs(row.deviations[j]) <= thr) out.kept.emplace_back(row.E, j);
    }
  }
  out.density = out.total ? static_cast<double>(out.kept.size()) / static_cast<double>(out.total) : 1.0;
  return out;
}

struct CancellationCheck {
  bool separated = false;  // min_sep > |p|
  double max_abs = 0.0;    // max |int e_p |psi|^2 dx| over the sampled psi (p != 0)
  bool holds = true;       // separated implies max_abs <= tol
};

/// When the d = 2 shell is separated at scale |p| no difference k - l equals
/// p, so int e_p |psi|^2 dx vanishes for every psi on the shell. Checked on
/// the given eigenfunctions; for p = 0 the integral must equal 1.
inline CancellationCheck exact_cancellation_check(const ShellPtr& shell, const LatticePoint& p,
                                                  std::span<const Eigenfunction> psis, double tol = 1e-12) {
  if (shell->dim() != 2 || p.dim() != 2) throw std::invalid_argument("exact_cancellation_check is for d = 2");
  CancellationCheck out;
  const MatrixElementPlan plan(Observable::exponential(p), *shell);
  if (p.is_zero()) {
    out.separated = true;
    for (const auto& psi : psis) out.max_abs = std::max(out.max_abs, std::abs(plan.apply(psi.coeffs()) - 1.0));
    out.holds = out.max_abs <= tol;
    return out;
  }
  out.separated = shell->size() < 2 || min_separation_sq(*shell) > p.norm_sq();
  if (!out.separated) return out;
  for (const auto& psi : psis) out.max_abs = std::max(out.max_abs, std::abs(plan.apply(psi.coeffs())));
  out.holds = out.max_abs <= tol;
  return out;
}

/// Same check on `samples` Haar eigenfunctions drawn from `seed`.
inline CancellationCheck exact_cancellation_check(const ShellPtr& shell, const LatticePoint& p, std::uint64_t seed = 0,
                                                  int samples = 20, double tol = 1e-12) {
  const auto psis = haar_samples(shell, seed, samples);
  return exact_cancellation_check(shell, p, psis, tol);
}

}  // namespace torusqe
