#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "torusqe/spectral.hpp"

namespace torusqe {

/// A trigonometric polynomial a = sum_n a_n e_n on T^d with finite support.
///
/// Integrals use the normalized volume, so the mean of a is a_0. When
/// `is_real()` holds the coefficients satisfy a_{-n} = conj(a_n).
class Observable {
 public:
  using CoeffMap = std::map<LatticePoint, cplx>;

  explicit Observable(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("observable dimension out of range");
  }

  /// Zero coefficients are dropped. When `real` is set the map must be
  /// Hermitian-symmetric within `tol`.
  Observable(int dim, CoeffMap coeffs, bool real, double tol = 1e-12) : dim_(dim), real_(real) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("observable dimension out of range");
    for (auto& [n, v] : coeffs) {
      if (n.dim() != dim) throw std::invalid_argument("observable frequency has wrong dimension");
      if (v != cplx(0.0)) coeffs_.emplace(n, v);
    }
    if (real_ && !hermitian(tol)) throw std::invalid_argument("real observable must satisfy a_{-n} = conj(a_n)");
  }

  static Observable constant(int dim, double value) {
    return Observable(dim, {{LatticePoint::zero(dim), value}}, true);
  }

  /// e_p; real only when p = 0.
  static Observable exponential(const LatticePoint& p) {
    return Observable(p.dim(), {{p, 1.0}}, p.is_zero());
  }

  /// amp * (e_p + e_{-p}) = 2 amp cos<p,x>.
  static Observable cosine(const LatticePoint& p, double amp = 1.0) {
    if (p.is_zero()) return constant(p.dim(), 2.0 * amp);
    return Observable(p.dim(), {{p, amp}, {-p, amp}}, true);
  }

  int dim() const noexcept { return dim_; }
  bool is_real() const noexcept { return real_; }
  const CoeffMap& coeffs() const noexcept { return coeffs_; }
  std::size_t support_size() const noexcept { return coeffs_.size(); }

  cplx coefficient(const LatticePoint& n) const {
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? cplx(0.0) : it->second;
  }

  /// Integral of a against the normalized volume.
  cplx mean() const { return coefficient(LatticePoint::zero(dim_)); }

  /// ||a||^2_{L^2} by Parseval.
  double l2_norm_sq() const noexcept {
    double s = 0.0;
    for (const auto& [n, v] : coeffs_) s += std::norm(v);
    return s;
  }

  /// sum_{n != 0} |a_n|^2
  double centered_l2_norm_sq() const {
    return l2_norm_sq() - std::norm(mean());
  }

  /// max_n max_i |n_i| over the support.
  std::int64_t max_frequency() const noexcept {
    std::int64_t m = 0;
    for (const auto& [n, v] : coeffs_) {
      for (auto c : n.coords()) m = std::max(m, c < 0 ? -c : c);
    }
    return m;
  }

  bool hermitian(double tol = 1e-12) const {
    for (const auto& [n, v] : coeffs_) {
      if (std::abs(coefficient(-n) - std::conj(v)) > tol) return false;
    }
    return true;
  }

  cplx evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("evaluate: dimension mismatch");
    cplx s = 0.0;
    for (const auto& [n, v] : coeffs_) {
      double phase = 0.0;
      for (int a = 0; a < dim_; ++a) phase += static_cast<double>(n[a]) * x[static_cast<std::size_t>(a)];
      s += v * cplx(std::cos(phase), std::sin(phase));
    }
    return s;
  }

  friend Observable operator+(const Observable& a, const Observable& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("observable dimension mismatch");
    CoeffMap m = a.coeffs_;
    for (const auto& [n, v] : b.coeffs_) m[n] += v;
    return Observable(a.dim_, std::move(m), a.real_ && b.real_, 1e-9);
  }

 private:
  int dim_;
  CoeffMap coeffs_;
  bool real_ = false;
};

/// a_lambda: coefficients with |n| <= 2 lambda (inclusive).
inline Observable truncate(const Observable& a, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("truncate: lambda must be non-negative");
  const double bound = 4.0 * lambda * lambda * (1.0 + 1e-12);
  Observable::CoeffMap kept;
  for (const auto& [n, v] : a.coeffs()) {
    if (static_cast<double>(n.norm_sq()) <= bound) kept.emplace(n, v);
  }
  return Observable(a.dim(), std::move(kept), a.is_real(), 1e-9);
}

/// Fourier coefficients of |psi|^2: d_m = sum_{k - l = m} c_k conj(c_l).
inline Observable density_coeffs(const Eigenfunction& psi) {
  const auto& pts = psi.shell().points();
  const auto c = psi.coeffs();
  Observable::CoeffMap m;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (c[i] == cplx(0.0)) continue;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (c[j] == cplx(0.0)) continue;
      m[pts[i] - pts[j]] += c[i] * std::conj(c[j]);
    }
  }
  if (m.empty()) m.emplace(LatticePoint::zero(psi.dim()), 0.0);
  return Observable(psi.dim(), std::move(m), true, 1e-10);
}

/// The sparse bilinear form psi -> int a |psi|^2 dx on one shell: the list of
/// index pairs (k, l) with l - k in supp(a), weighted by a_{l-k}.
class MatrixElementPlan {
 public:
  struct Term {
    std::size_t k;
    std::size_t l;
    cplx weight;
  };

  MatrixElementPlan(const Observable& a, const LatticeShell& shell) {
    if (a.dim() != shell.dim()) throw std::invalid_argument("observable and shell dimensions differ");
    const double reach = 4.0 * static_cast<double>(shell.norm_sq());
    for (const auto& [n, v] : a.coeffs()) {
      if (static_cast<double>(n.norm_sq()) > reach) continue;  // no pair spans more than the diameter
      if (n.is_zero()) {
        for (std::size_t i = 0; i < shell.size(); ++i) terms_.push_back({i, i, v});
        continue;
      }
      for (auto [k, l] : pair_partners(shell, n)) terms_.push_back({k, l, v});
    }
  }

  /// sum a_{l-k} c_k conj(c_l)
  cplx apply(std::span<const cplx> c) const noexcept {
    cplx s = 0.0;
    for (const auto& t : terms_) s += t.weight * c[t.k] * std::conj(c[t.l]);
    return s;
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  std::vector<Term> terms_;
};

/// int a |psi|^2 dx = sum_{k,l} a_{l-k} c_k conj(c_l).
inline cplx integrate_density(const Observable& a, const Eigenfunction& psi) {
  if (a.dim() != psi.dim()) throw std::invalid_argument("integrate_density: dimension mismatch");
  return MatrixElementPlan(a, psi.shell()).apply(psi.coeffs());
}

/// The same integral as the pairing sum_m a_m conj(d_m) with the density coefficients.
inline cplx integrate_density_parseval(const Observable& a, const Eigenfunction& psi) {
  if (a.dim() != psi.dim()) throw std::invalid_argument("integrate_density: dimension mismatch");
  const auto dens = density_coeffs(psi);
  cplx s = 0.0;
  for (const auto& [m, v] : a.coeffs()) s += v * std::conj(dens.coefficient(m));
  return s;
}

/// ||psi||_{L^4} by Parseval on |psi|^2.
inline double l4_norm(const Eigenfunction& psi) {
  return std::pow(density_coeffs(psi).l2_norm_sq(), 0.25);
}

/// Trapezoid rule for int a |psi|^2 dx on a uniform grid_n^d grid. Exact for
/// trigonometric polynomials once grid_n exceeds twice the top frequency.
inline cplx grid_integral_oracle(const Observable& a, const Eigenfunction& psi, int grid_n) {
  if (a.dim() != psi.dim()) throw std::invalid_argument("grid_integral_oracle: dimension mismatch");
  const int d = a.dim();
  std::int64_t spread = 0;
  const auto& pts = psi.shell().points();
  for (const auto& k : pts) {
    for (const auto& l : pts) {
      const LatticePoint diff = k - l;
      for (auto v : diff.coords()) spread = std::max(spread, v < 0 ? -v : v);
    }
  }
  const std::int64_t top = a.max_frequency() + spread;
  if (grid_n <= 2 * top) throw std::invalid_argument("grid_integral_oracle: grid too coarse (aliasing guard)");

  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= grid_n;
  const double h = 2.0 * std::numbers::pi / grid_n;
  std::vector<double> x(static_cast<std::size_t>(d));
  cplx acc = 0.0;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int i = 0; i < d; ++i) {
      x[static_cast<std::size_t>(i)] = h * static_cast<double>(rem % grid_n);
      rem /= grid_n;
    }
    acc += a.evaluate(x) * std::norm(evaluate(psi, x));
  }
  return acc / static_cast<double>(total);
}

}  // namespace torusqe
