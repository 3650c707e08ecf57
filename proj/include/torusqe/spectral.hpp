#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "torusqe/lattice.hpp"
#include "torusqe/rng.hpp"

namespace torusqe {

using cplx = std::complex<double>;
using ShellPtr = std::shared_ptr<const LatticeShell>;

inline ShellPtr make_shell(int d, std::int64_t E) {
  return std::make_shared<const LatticeShell>(enumerate_shell(d, E));
}

/// psi = sum_k c_k e_k over one shell; coefficients follow the shell order.
class Eigenfunction {
 public:
  /// Throws unless sum |c_k|^2 = 1 within `tol`.
  Eigenfunction(ShellPtr shell, std::vector<cplx> coeffs, double tol = 1e-12)
      : shell_(std::move(shell)), coeffs_(std::move(coeffs)) {
    if (!shell_) throw std::invalid_argument("eigenfunction needs a shell");
    if (coeffs_.size() != shell_->size()) throw std::invalid_argument("coefficient count differs from shell size");
    if (std::abs(norm_sq() - 1.0) > tol) throw std::invalid_argument("eigenfunction is not L2-normalized");
  }

  /// Scales `coeffs` to unit norm.
  static Eigenfunction normalized(ShellPtr shell, std::vector<cplx> coeffs) {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    if (s == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& c : coeffs) c *= inv;
    return Eigenfunction(std::move(shell), std::move(coeffs));
  }

  /// Single exponential e_k.
  static Eigenfunction exponential(ShellPtr shell, const LatticePoint& k) {
    auto i = shell->index_of(k);
    if (i < 0) throw std::invalid_argument("point " + k.to_string() + " is not on the shell");
    std::vector<cplx> c(shell->size());
    c[static_cast<std::size_t>(i)] = 1.0;
    return Eigenfunction(std::move(shell), std::move(c));
  }

  const LatticeShell& shell() const noexcept { return *shell_; }
  const ShellPtr& shell_ptr() const noexcept { return shell_; }
  int dim() const noexcept { return shell_->dim(); }
  std::int64_t norm_sq_eigenvalue() const noexcept { return shell_->norm_sq(); }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  double norm_sq() const noexcept {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }

 private:
  ShellPtr shell_;
  std::vector<cplx> coeffs_;
};

/// r x r coefficient matrix whose rows are an orthonormal basis of the eigenspace.
class EigenBasis {
 public:
  EigenBasis(ShellPtr shell, std::vector<cplx> matrix) : shell_(std::move(shell)), m_(std::move(matrix)) {
    if (!shell_) throw std::invalid_argument("basis needs a shell");
    if (m_.size() != shell_->size() * shell_->size()) throw std::invalid_argument("basis matrix must be r x r");
  }

  const LatticeShell& shell() const noexcept { return *shell_; }
  const ShellPtr& shell_ptr() const noexcept { return shell_; }
  std::size_t size() const noexcept { return shell_->size(); }

  std::span<const cplx> row(std::size_t j) const noexcept { return {m_.data() + j * size(), size()}; }
  const cplx& operator()(std::size_t j, std::size_t k) const noexcept { return m_[j * size() + k]; }

  Eigenfunction function(std::size_t j, double tol = 1e-10) const {
    auto r = row(j);
    return Eigenfunction(shell_, {r.begin(), r.end()}, tol);
  }

  /// max |(U U*)_{ij} - delta_ij|
  double unitarity_defect() const {
    const std::size_t r = size();
    double worst = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += m_[i * r + k] * std::conj(m_[j * r + k]);
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    }
    return worst;
  }

 private:
  ShellPtr shell_;
  std::vector<cplx> m_;
};

/// The basis {e_k}: identity coefficient matrix.
inline EigenBasis exponential_basis(ShellPtr shell) {
  const std::size_t r = shell->size();
  std::vector<cplx> m(r * r);
  for (std::size_t i = 0; i < r; ++i) m[i * r + i] = 1.0;
  return EigenBasis(std::move(shell), std::move(m));
}

namespace detail {

// Modified Gram-Schmidt on the rows, applied twice for stability. The row
// norms play the role of the (positive) diagonal of R.
inline void orthonormalize_rows(std::vector<cplx>& m, std::size_t r) {
  for (std::size_t i = 0; i < r; ++i) {
    cplx* ri = m.data() + i * r;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const cplx* rj = m.data() + j * r;
        cplx proj = 0.0;
        for (std::size_t k = 0; k < r; ++k) proj += std::conj(rj[k]) * ri[k];
        for (std::size_t k = 0; k < r; ++k) ri[k] -= proj * rj[k];
      }
    }
    double nrm = 0.0;
    for (std::size_t k = 0; k < r; ++k) nrm += std::norm(ri[k]);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) throw std::runtime_error("degenerate Gaussian sample in random_onb");
    for (std::size_t k = 0; k < r; ++k) ri[k] /= nrm;
  }
}

}  // namespace detail

/// Haar-distributed orthonormal basis from Gram-Schmidt on seeded complex
/// Gaussians. Each row is then rotated by a unit phase so that its diagonal
/// entry is real and non-negative; phases do not change |psi|^2.
///
/// The stream depends only on (seed, d, E).
inline EigenBasis random_onb(ShellPtr shell, std::uint64_t seed) {
  const std::size_t r = shell->size();
  if (r == 0) throw std::invalid_argument("random_onb: empty shell");
  if (r == 1) return exponential_basis(std::move(shell));  // the phase fix leaves exactly (1)
  SplitMix64 rng(stream_seed(seed, static_cast<std::uint64_t>(shell->dim()),
                             static_cast<std::uint64_t>(shell->norm_sq())));
  std::vector<cplx> m(r * r);
  for (auto& z : m) z = rng.complex_gaussian();
  detail::orthonormalize_rows(m, r);
  for (std::size_t i = 0; i < r; ++i) {
    const cplx d = m[i * r + i];
    const double a = std::abs(d);
    if (a == 0.0) continue;
    const cplx phase = std::conj(d) / a;
    for (std::size_t k = 0; k < r; ++k) m[i * r + k] *= phase;
    m[i * r + i] = a;
  }
  return EigenBasis(std::move(shell), std::move(m));
}

namespace detail {

// Pairs every point with its image under `partner`; fixed points keep e_k.
// Rows come out as cos-type (e_k + e_k')/sqrt2 and sin-type (e_k - e_k')/(i sqrt2).
template <typename Partner>
EigenBasis pairing_basis(ShellPtr shell, Partner partner, bool real_valued) {
  const std::size_t r = shell->size();
  std::vector<cplx> m(r * r);
  const double s = 1.0 / std::sqrt(2.0);
  const cplx minus_factor = real_valued ? cplx(0.0, -s) : cplx(s, 0.0);
  std::size_t row = 0;
  for (std::size_t i = 0; i < r; ++i) {
    const LatticePoint p = partner((*shell)[i]);
    const auto j = shell->index_of(p);
    if (j < 0) throw std::logic_error("pairing partner left the shell");
    const auto ju = static_cast<std::size_t>(j);
    if (ju == i) {
      m[row * r + i] = 1.0;
      ++row;
    } else if (i < ju) {
      m[row * r + i] = s;
      m[row * r + ju] = s;
      ++row;
      m[row * r + i] = minus_factor;
      m[row * r + ju] = -minus_factor;
      ++row;
    }
  }
  return EigenBasis(std::move(shell), std::move(m));
}

}  // namespace detail

/// Pairs k with -k: the real cos/sin basis sqrt2 cos<k,x>, sqrt2 sin<k,x>
/// (or (e_k +- e_{-k})/sqrt2 when real_valued is false).
inline EigenBasis paired_basis(ShellPtr shell, bool real_valued = true) {
  return detail::pairing_basis(std::move(shell), [](const LatticePoint& k) { return -k; }, real_valued);
}

/// Pairs k with its reflection in the last coordinate, (e_k +- e_k')/sqrt2.
/// On the shell n^2 + 1 this basis contains the sharpness function phi_q.
inline EigenBasis reflection_basis(ShellPtr shell) {
  return detail::pairing_basis(
      std::move(shell),
      [](LatticePoint k) {
        k[k.dim() - 1] = -k[k.dim() - 1];
        return k;
      },
      false);
}

/// phi_q = (e_{(n,1)} + e_{(n,-1)})/sqrt2 on the d = 2 shell E = n^2 + 1.
inline Eigenfunction sharpness_sequence(std::int64_t n_q) {
  if (n_q < 1) throw std::invalid_argument("sharpness_sequence: n_q must be >= 1");
  auto shell = make_shell(2, n_q * n_q + 1);
  std::vector<cplx> c(shell->size());
  const double s = 1.0 / std::sqrt(2.0);
  c[static_cast<std::size_t>(shell->index_of({n_q, 1}))] = s;
  c[static_cast<std::size_t>(shell->index_of({n_q, -1}))] = s;
  return Eigenfunction(std::move(shell), std::move(c));
}

/// exp(i k x_d) on T^d.
inline Eigenfunction flat_counterexample(int d, std::int64_t k) {
  if (k == 0) throw std::invalid_argument("flat_counterexample: k must be nonzero");
  LatticePoint p(d);
  p[d - 1] = k;
  return Eigenfunction::exponential(make_shell(d, k * k), p);
}

/// psi(x) = sum_k c_k exp(i<k,x>).
inline cplx evaluate(const Eigenfunction& psi, std::span<const double> x) {
  if (static_cast<int>(x.size()) != psi.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  cplx s = 0.0;
  const auto& pts = psi.shell().points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double phase = 0.0;
    for (int a = 0; a < psi.dim(); ++a) phase += static_cast<double>(pts[i][a]) * x[static_cast<std::size_t>(a)];
    s += psi.coeffs()[i] * cplx(std::cos(phase), std::sin(phase));
  }
  return s;
}

/// `count` independent Haar-random eigenfunctions: row 0 of random_onb under
/// derived seeds.
inline std::vector<Eigenfunction> haar_samples(const ShellPtr& shell, std::uint64_t seed, int count) {
  std::vector<Eigenfunction> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int s = 0; s < count; ++s) {
    out.push_back(random_onb(shell, stream_seed(seed, 0x5eedULL, static_cast<std::uint64_t>(s))).function(0));
  }
  return out;
}

/// Maps a shell to an orthonormal eigenbasis of it.
using BasisProvider = std::function<EigenBasis(const ShellPtr&)>;

enum class BasisKind { exponential, haar, paired, reflection };

struct BasisSpec {
  BasisKind kind = BasisKind::exponential;
  std::uint64_t seed = 0;

  BasisProvider provider() const {
    switch (kind) {
      case BasisKind::exponential:
        return [](const ShellPtr& s) { return exponential_basis(s); };
      case BasisKind::haar: {
        const auto sd = seed;
        return [sd](const ShellPtr& s) { return random_onb(s, sd); };
      }
      case BasisKind::paired:
        return [](const ShellPtr& s) { return paired_basis(s); };
      case BasisKind::reflection:
        return [](const ShellPtr& s) { return reflection_basis(s); };
    }
    throw std::logic_error("unknown basis kind");
  }

  std::string name() const {
    switch (kind) {
      case BasisKind::exponential: return "exponential";
      case BasisKind::haar: return "haar:seed=" + std::to_string(seed);
      case BasisKind::paired: return "paired";
      case BasisKind::reflection: return "reflection";
    }
    return "?";
  }
};

/// Memoizes a provider per (dim, E). Safe to share across threads; window
/// sweeps and repeated observables then build each basis once.
inline BasisProvider caching_provider(BasisProvider inner) {
  struct Cache {
    std::mutex mu;
    std::map<std::pair<int, std::int64_t>, std::shared_ptr<const EigenBasis>> bases;
  };
  auto cache = std::make_shared<Cache>();
  return [inner = std::move(inner), cache](const ShellPtr& s) {
    const auto key = std::make_pair(s->dim(), s->norm_sq());
    {
      std::lock_guard lk(cache->mu);
      auto it = cache->bases.find(key);
      if (it != cache->bases.end()) return *it->second;
    }
    auto B = std::make_shared<const EigenBasis>(inner(s));
    std::lock_guard lk(cache->mu);
    return *cache->bases.emplace(key, std::move(B)).first->second;
  };
}

}  // namespace torusqe
