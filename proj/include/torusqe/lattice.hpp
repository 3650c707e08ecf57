#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "torusqe/factor.hpp"
#include "torusqe/parallel.hpp"
#include "torusqe/point.hpp"

namespace torusqe {

/// Floor of the square root of a non-negative 64-bit integer.
inline std::int64_t isqrt(std::int64_t v) {
  if (v < 0) throw std::domain_error("isqrt of negative value");
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(v)));
  while (s > 0 && s * s > v) --s;
  while ((s + 1) * (s + 1) <= v) ++s;
  return s;
}

/// Converts a real eigenvalue parameter lambda to E = lambda^2, requiring
/// lambda^2 to be an integer up to rounding.
inline std::int64_t lambda_to_norm_sq(double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const double sq = lambda * lambda;
  const double r = std::round(sq);
  if (std::abs(sq - r) > 1e-9 * std::max(1.0, sq)) {
    throw std::invalid_argument("lambda^2 is not an integer");
  }
  if (r > static_cast<double>(kMaxNormSq)) throw std::out_of_range("lambda^2 exceeds guarded range");
  return static_cast<std::int64_t>(r);
}

/// Integer range of squared norms E with c <= sqrt(E) <= lambda (inclusive).
struct NormSqRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
};

inline NormSqRange norm_sq_range(double c, double lambda) {
  if (!(c >= 0.0) || !(lambda >= c)) throw std::invalid_argument("need 0 <= c <= lambda");
  const double lo = c * c, hi = lambda * lambda;
  if (hi > static_cast<double>(kMaxNormSq)) throw std::out_of_range("lambda^2 exceeds guarded range");
  const double eps = 1e-9 * std::max(1.0, hi);
  return {static_cast<std::int64_t>(std::ceil(lo - eps)), static_cast<std::int64_t>(std::floor(hi + eps))};
}

/// All k in Z^d with |k|^2 = E, in lexicographic order.
class LatticeShell {
 public:
  LatticeShell(int dim, std::int64_t norm_sq, std::vector<LatticePoint> points)
      : dim_(dim), norm_sq_(norm_sq), points_(std::move(points)) {}

  int dim() const noexcept { return dim_; }
  std::int64_t norm_sq() const noexcept { return norm_sq_; }
  double lambda() const noexcept { return std::sqrt(static_cast<double>(norm_sq_)); }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<LatticePoint>& points() const noexcept { return points_; }
  const LatticePoint& operator[](std::size_t i) const noexcept { return points_[i]; }

  /// Index of p in the canonical ordering, or -1.
  std::ptrdiff_t index_of(const LatticePoint& p) const {
    if (p.dim() != dim_ || p.norm_sq() != norm_sq_) return -1;
    auto it = std::lower_bound(points_.begin(), points_.end(), p);
    if (it == points_.end() || *it != p) return -1;
    return it - points_.begin();
  }

  bool contains(const LatticePoint& p) const { return index_of(p) >= 0; }

 private:
  int dim_;
  std::int64_t norm_sq_;
  std::vector<LatticePoint> points_;
};

namespace detail {

inline void descend(int i, int d, std::int64_t residual, LatticePoint& cur, std::vector<LatticePoint>& out) {
  if (i == d - 1) {
    const std::int64_t s = isqrt(residual);
    if (s * s != residual) return;
    if (s == 0) {
      cur[i] = 0;
      out.push_back(cur);
    } else {
      cur[i] = -s;
      out.push_back(cur);
      cur[i] = s;
      out.push_back(cur);
    }
    return;
  }
  const std::int64_t m = isqrt(residual);
  for (std::int64_t v = -m; v <= m; ++v) {
    cur[i] = v;
    descend(i + 1, d, residual - v * v, cur, out);
  }
}

inline void check_shell_args(int d, std::int64_t E) {
  if (d < kMinDim || d > kMaxDim) throw std::invalid_argument("dimension must be in [2, 8]");
  if (E < 0) throw std::invalid_argument("squared norm must be non-negative");
  if (E > kMaxNormSq) throw std::out_of_range("squared norm exceeds 2^60 guard");
}

}  // namespace detail

/// Recursive descent over coordinates with residual-norm pruning.
inline LatticeShell enumerate_shell(int d, std::int64_t E) {
  detail::check_shell_args(d, E);
  std::vector<LatticePoint> pts;
  LatticePoint cur(d);
  detail::descend(0, d, E, cur, pts);
  return LatticeShell(d, E, std::move(pts));
}

/// r_d(sqrt(E)).
inline std::size_t shell_size(int d, std::int64_t E) { return enumerate_shell(d, E).size(); }

/// |{k in shell : |k + n|^2 = E}|, via the linear condition |n|^2 + 2<n,k> = 0.
///
/// Shell points are bucketed by <n,k>; only the bucket at -|n|^2/2 counts.
inline std::int64_t pair_count(const LatticeShell& shell, const LatticePoint& n) {
  if (n.dim() != shell.dim()) throw std::invalid_argument("pair_count: dimension mismatch");
  const std::int64_t nn = n.norm_sq();
  if (nn % 2 != 0) return 0;
  const std::int64_t target = -nn / 2;
  std::int64_t count = 0;
  for (const auto& k : shell.points()) count += (n.dot(k) == target);
  return count;
}

/// Same quantity as pair_count, by testing membership of k + n directly.
inline std::int64_t pair_count_direct(const LatticeShell& shell, const LatticePoint& n) {
  if (n.dim() != shell.dim()) throw std::invalid_argument("pair_count: dimension mismatch");
  std::int64_t count = 0;
  for (const auto& k : shell.points()) count += shell.contains(k + n);
  return count;
}

/// Index pairs (i, j) with shell[j] - shell[i] = n.
inline std::vector<std::pair<std::size_t, std::size_t>> pair_partners(const LatticeShell& shell,
                                                                      const LatticePoint& n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n.dim() != shell.dim()) throw std::invalid_argument("pair_partners: dimension mismatch");
  const std::int64_t nn = n.norm_sq();
  if (nn % 2 != 0) return out;
  for (std::size_t i = 0; i < shell.size(); ++i) {
    if (n.dot(shell[i]) != -nn / 2) continue;
    auto j = shell.index_of(shell[i] + n);
    if (j >= 0) out.emplace_back(i, static_cast<std::size_t>(j));
  }
  return out;
}

/// Multiplicity of every nonzero difference l - k of shell points; entry n
/// equals pair_count(shell, n), and n absent means pair_count = 0.
inline std::unordered_map<LatticePoint, std::int64_t, LatticePointHash> difference_counts(
    const LatticeShell& shell) {
  std::unordered_map<LatticePoint, std::int64_t, LatticePointHash> out;
  out.reserve(shell.size() * shell.size());
  for (const auto& k : shell.points()) {
    for (const auto& l : shell.points()) {
      if (k != l) ++out[l - k];
    }
  }
  return out;
}

/// Largest pair_count(shell, n) over all n != 0 (0 for shells with < 2 points).
inline std::int64_t max_pair_count(const LatticeShell& shell) {
  std::vector<LatticePoint> diffs;
  diffs.reserve(shell.size() * shell.size());
  for (const auto& k : shell.points()) {
    for (const auto& l : shell.points()) {
      if (k != l) diffs.push_back(l - k);
    }
  }
  std::sort(diffs.begin(), diffs.end());
  std::int64_t best = 0;
  for (std::size_t i = 0; i < diffs.size();) {
    std::size_t j = i;
    while (j < diffs.size() && diffs[j] == diffs[i]) ++j;
    best = std::max<std::int64_t>(best, static_cast<std::int64_t>(j - i));
    i = j;
  }
  return best;
}

/// |{k : E_lo <= |k|^2 <= E_hi, |n|^2 + 2<n,k> = 0}|.
///
/// Solves the linear condition for one coordinate with n_j != 0 and scans the
/// remaining d - 1 coordinates over the ball.
inline std::int64_t interval_pair_count_sq(const LatticePoint& n, std::int64_t E_lo, std::int64_t E_hi) {
  if (n.is_zero()) throw std::invalid_argument("interval_pair_count: n must be nonzero");
  const int d = n.dim();
  detail::check_shell_args(d, std::max<std::int64_t>(E_hi, 0));
  E_lo = std::max<std::int64_t>(E_lo, 0);
  if (E_hi < E_lo) return 0;
  const std::int64_t nn = n.norm_sq();
  if (nn % 2 != 0) return 0;

  int j = 0;
  while (n[j] == 0) ++j;
  std::vector<int> free;
  for (int i = 0; i < d; ++i) {
    if (i != j) free.push_back(i);
  }

  std::int64_t count = 0;
  LatticePoint k(d);
  // rest = sum_{i != j} n_i k_i, partial = sum_{i != j} k_i^2
  auto rec = [&](auto&& self, std::size_t f, std::int64_t partial, std::int64_t rest) -> void {
    if (f == free.size()) {
      const std::int64_t num = -nn / 2 - rest;
      if (num % n[j] != 0) return;
      const std::int64_t kj = num / n[j];
      const std::int64_t e = partial + kj * kj;
      if (e >= E_lo && e <= E_hi) ++count;
      return;
    }
    const std::int64_t m = isqrt(E_hi - partial);
    const int i = free[f];
    for (std::int64_t v = -m; v <= m; ++v) {
      self(self, f + 1, partial + v * v, rest + n[i] * v);
    }
  };
  rec(rec, 0, 0, 0);
  return count;
}

/// |{k : c <= |k| <= lambda and |k|^2 = |n + k|^2}|, both endpoints inclusive.
inline std::int64_t interval_pair_count(const LatticePoint& n, double c, double lambda) {
  const auto r = norm_sq_range(c, lambda);
  return interval_pair_count_sq(n, r.lo, r.hi);
}

/// Number of lattice points with E_lo <= |k|^2 <= E_hi.
inline std::int64_t ball_count(int d, std::int64_t E_lo, std::int64_t E_hi) {
  detail::check_shell_args(d, std::max<std::int64_t>(E_hi, 0));
  E_lo = std::max<std::int64_t>(E_lo, 0);
  if (E_hi < E_lo) return 0;
  std::int64_t count = 0;
  auto rec = [&](auto&& self, int i, std::int64_t partial) -> void {
    const std::int64_t m = isqrt(E_hi - partial);
    if (i == d - 1) {
      // last coordinate v with E_lo <= partial + v^2 <= E_hi
      const std::int64_t need = E_lo - partial;
      std::int64_t lo = 0;
      if (need > 0) {
        lo = isqrt(need - 1) + 1;
      }
      if (lo > m) return;
      count += (lo == 0) ? 2 * m + 1 : 2 * (m - lo + 1);
      return;
    }
    for (std::int64_t v = -m; v <= m; ++v) self(self, i + 1, partial + v * v);
  };
  rec(rec, 0, 0);
  return count;
}

struct SumTwoSquaresSpectrum {
  std::vector<std::int64_t> values;  // ascending, includes 0
  // |{1 <= E <= N}| / (N / sqrt(log N)); NaN when N < 2
  double density_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// All E <= N that are a sum of two squares.
inline SumTwoSquaresSpectrum sum_two_squares_spectrum(std::int64_t N) {
  if (N < 0) throw std::invalid_argument("N must be non-negative");
  if (N > (std::int64_t{1} << 32)) throw std::out_of_range("spectrum sieve limited to N <= 2^32");
  std::vector<bool> mark(static_cast<std::size_t>(N) + 1, false);
  for (std::int64_t a = 0; a * a <= N; ++a) {
    for (std::int64_t b = a; a * a + b * b <= N; ++b) mark[static_cast<std::size_t>(a * a + b * b)] = true;
  }
  SumTwoSquaresSpectrum out;
  for (std::int64_t e = 0; e <= N; ++e) {
    if (mark[static_cast<std::size_t>(e)]) out.values.push_back(e);
  }
  if (N >= 2) {
    const double positive = static_cast<double>(out.values.size() - 1);
    const double nd = static_cast<double>(N);
    out.density_ratio = positive / (nd / std::sqrt(std::log(nd)));
  }
  return out;
}

/// Smallest squared Euclidean distance between two distinct shell points.
inline std::int64_t min_separation_sq(const LatticeShell& shell) {
  if (shell.size() < 2) throw std::invalid_argument("min_separation needs at least two shell points");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  const auto& pts = shell.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm_sq());
  }
  return best;
}

inline double min_separation(const LatticeShell& shell) {
  return std::sqrt(static_cast<double>(min_separation_sq(shell)));
}

struct SeparationRecord {
  std::int64_t norm_sq = 0;
  std::int64_t r2 = 0;
  double min_sep = 0.0;
  double threshold = 0.0;  // E^{(1 - delta)/2}
  bool is_separated = false;
};

struct SeparationSurvey {
  std::vector<SeparationRecord> records;
  std::int64_t non_separated = 0;
  double fraction_non_separated = 0.0;  // of the records
  double ratio_to_bound = 0.0;          // non_separated / N^{1 - delta/3}
};

inline SeparationRecord separation_record(std::int64_t E, double delta) {
  const auto shell = enumerate_shell(2, E);
  SeparationRecord rec;
  rec.norm_sq = E;
  rec.r2 = static_cast<std::int64_t>(shell.size());
  rec.min_sep = min_separation(shell);
  rec.threshold = std::pow(static_cast<double>(E), (1.0 - delta) / 2.0);
  rec.is_separated = rec.min_sep > rec.threshold;
  return rec;
}

/// One record per E in [1, N] that is a sum of two squares (d = 2).
inline SeparationSurvey separation_survey(std::int64_t N, double delta, unsigned threads = 0) {
  if (N < 1) throw std::invalid_argument("separation_survey: N must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("separation_survey: delta must lie in (0, 1)");
  auto spectrum = sum_two_squares_spectrum(N).values;
  spectrum.erase(spectrum.begin());  // drop E = 0
  SeparationSurvey out;
  out.records = parallel_map(
      spectrum.size(), [&](std::size_t i) { return separation_record(spectrum[i], delta); }, threads);
  for (const auto& r : out.records) out.non_separated += !r.is_separated;
  if (!out.records.empty()) {
    out.fraction_non_separated = static_cast<double>(out.non_separated) / static_cast<double>(out.records.size());
  }
  out.ratio_to_bound = static_cast<double>(out.non_separated) / std::pow(static_cast<double>(N), 1.0 - delta / 3.0);
  return out;
}

struct IwaniecEntry {
  std::int64_t n = 0;
  std::int64_t norm_sq = 0;  // n^2 + 1
  int factor_count = 0;      // prime factors with multiplicity
  std::int64_t r2 = 0;
};

/// All 1 <= n <= limit with n^2 + 1 prime or a product of two primes.
inline std::vector<IwaniecEntry> iwaniec_search(std::int64_t limit) {
  if (limit < 2) throw std::invalid_argument("iwaniec_search: limit must be >= 2");
  if (limit > (std::int64_t{1} << 30)) throw std::out_of_range("iwaniec_search: n^2 + 1 must stay below 2^60");
  std::vector<IwaniecEntry> out;
  for (std::int64_t n = 1; n <= limit; ++n) {
    const std::int64_t E = n * n + 1;
    const auto f = factor(static_cast<std::uint64_t>(E));
    if (f.size() > 2) continue;
    out.push_back({n, E, static_cast<int>(f.size()), static_cast<std::int64_t>(shell_size(2, E))});
  }
  return out;
}

}  // namespace torusqe
