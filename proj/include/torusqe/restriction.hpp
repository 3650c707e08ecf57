#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "torusqe/measures.hpp"
#include "torusqe/observables.hpp"
#include "torusqe/parallel.hpp"
#include "torusqe/spectral.hpp"

namespace torusqe {

// Everything below goes through sigma^ only. int_Sigma f dsigma for a
// trigonometric polynomial f is the finite sum sum_m f_m sigma^(-m).

/// int_Sigma a |psi|^2 dsigma, complex-valued (real for real a).
inline cplx restriction_integral_complex(const Observable& a, const Eigenfunction& psi, const TorusMeasure& sigma) {
  if (a.dim() != psi.dim() || a.dim() != sigma.dim()) throw std::invalid_argument("restriction_integral: dimension mismatch");
  return measure_quadratic_form(measure_pairing_matrix(a, sigma, psi.shell()), psi.coeffs());
}

inline double restriction_integral(const Observable& a, const Eigenfunction& psi, const TorusMeasure& sigma) {
  return restriction_integral_complex(a, psi, sigma).real();
}

/// int_Sigma a dsigma = sum_m a_m sigma^(-m).
inline double restriction_target(const Observable& a, const TorusMeasure& sigma) {
  return convolve_observable(a, sigma, LatticePoint::zero(a.dim())).real();
}

struct PeriodIntegral {
  cplx value;       // int_Sigma psi dsigma
  double cs_bound;  // (sum_{k in shell} |sigma^(k)|^2)^{1/2}
};

/// int_Sigma psi dsigma = sum_k c_k sigma^(-k), with its Cauchy-Schwarz bound.
inline PeriodIntegral period_integral(const Eigenfunction& psi, const TorusMeasure& sigma) {
  if (psi.dim() != sigma.dim()) throw std::invalid_argument("period_integral: dimension mismatch");
  PeriodIntegral out{0.0, 0.0};
  const auto& pts = psi.shell().points();
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.value += psi.coeffs()[i] * sigma(-pts[i]);
    s += std::norm(sigma(pts[i]));
  }
  out.cs_bound = std::sqrt(s);
  return out;
}

/// ||psi||_{L^2(Sigma)} / ||psi||_{L^2(T^2)}.
inline double br_ratio(const Eigenfunction& psi, const TorusMeasure& sigma) {
  if (psi.dim() != 2 || sigma.dim() != 2) throw std::invalid_argument("br_ratio is defined for curves in T^2");
  const double on_curve = restriction_integral(Observable::constant(2, 1.0), psi, sigma);
  return std::sqrt(std::max(on_curve, 0.0) / psi.norm_sq());
}

struct RestrictionRecord {
  std::int64_t E = 0;
  std::size_t j = 0;
  double restriction_value = 0.0;
  double target = 0.0;
  cplx period{0.0};
  double cs_bound = 0.0;
  double l2_ratio = 0.0;
};

/// One record per basis row for every shell of the window.
inline std::vector<RestrictionRecord> restriction_sweep(const Observable& a, const TorusMeasure& sigma_in,
                                                        const std::vector<ShellPtr>& shells,
                                                        const BasisProvider& provider, unsigned threads = 0) {
  const TorusMeasure sigma = sigma_in.cached();
  const double target = restriction_target(a, sigma);
  const Observable one = Observable::constant(sigma.dim(), 1.0);
  auto per_shell = parallel_map(
      shells.size(),
      [&](std::size_t si) {
        const auto& shell = shells[si];
        const auto W = measure_pairing_matrix(a, sigma, *shell);
        const auto W1 = measure_pairing_matrix(one, sigma, *shell);
        const auto B = provider(shell);
        std::vector<RestrictionRecord> recs;
        for (std::size_t j = 0; j < B.size(); ++j) {
          const auto psi = B.function(j);
          RestrictionRecord r;
          r.E = shell->norm_sq();
          r.j = j;
          r.restriction_value = measure_quadratic_form(W, B.row(j)).real();
          r.target = target;
          const auto p = period_integral(psi, sigma);
          r.period = p.value;
          r.cs_bound = p.cs_bound;
          r.l2_ratio = std::sqrt(std::max(measure_quadratic_form(W1, B.row(j)).real(), 0.0));
          recs.push_back(r);
        }
        return recs;
      },
      threads);
  std::vector<RestrictionRecord> out;
  for (auto& v : per_shell) out.insert(out.end(), v.begin(), v.end());
  return out;
}

struct PeriodDecayRow {
  std::int64_t E = 0;
  double lambda = 0.0;
  double max_period = 0.0;    // max over sampled Haar psi of |int psi dsigma|
  double cs_bound = 0.0;
  double scaled_half = 0.0;   // lambda^{1/2} cs_bound
  double scaled_delta = 0.0;  // lambda^{1/2 - delta} cs_bound
};

/// Per nonempty shell 1 <= E <= E_max of dimension sigma.dim(). The caller is
/// responsible for the curvature hypothesis (see curvature_min).
inline std::vector<PeriodDecayRow> period_decay_sweep(const TorusMeasure& sigma_in, std::int64_t E_max,
                                                      std::uint64_t seed = 0, int samples = 8, double delta = 0.1,
                                                      unsigned threads = 0) {
  if (E_max < 1) throw std::invalid_argument("period_decay_sweep needs E_max >= 1");
  const TorusMeasure sigma = sigma_in.cached();
  const int d = sigma.dim();
  auto rows = parallel_map(
      static_cast<std::size_t>(E_max),
      [&](std::size_t i) {
        PeriodDecayRow row;
        row.E = static_cast<std::int64_t>(i) + 1;
        auto shell = make_shell(d, row.E);
        if (shell->empty()) {
          row.E = -1;
          return row;
        }
        row.lambda = shell->lambda();
        for (const auto& psi : haar_samples(shell, seed, samples)) {
          const auto p = period_integral(psi, sigma);
          row.max_period = std::max(row.max_period, std::abs(p.value));
          row.cs_bound = p.cs_bound;
        }
        row.scaled_half = std::sqrt(row.lambda) * row.cs_bound;
        row.scaled_delta = std::pow(row.lambda, 0.5 - delta) * row.cs_bound;
        return row;
      },
      threads);
  std::erase_if(rows, [](const PeriodDecayRow& r) { return r.E < 0; });
  return rows;
}

struct CurveEquidistributionRow {
  std::int64_t E = 0;
  double lambda = 0.0;
  double max_deviation = 0.0;  // max_j |int_Sigma a|psi_j|^2 dsigma - int_Sigma a dsigma|
  double offdiag_mass = 0.0;   // max_j sum_{k != l} |c_k||c_l|
  double budget = 0.0;         // lambda^{-(1-delta)/2} offdiag_mass
};

/// Deviation of the restricted densities from the target on the given d = 2
/// eigenvalues (typically the separated ones).
inline std::vector<CurveEquidistributionRow> curve_equidistribution_sweep(
    const Observable& a, const TorusMeasure& sigma_in, const std::vector<std::int64_t>& eigenvalues,
    const BasisProvider& provider, double delta = 0.2, unsigned threads = 0) {
  if (a.dim() != 2 || sigma_in.dim() != 2) throw std::invalid_argument("curve_equidistribution_sweep is for d = 2");
  const TorusMeasure sigma = sigma_in.cached();
  const double target = restriction_target(a, sigma);
  return parallel_map(
      eigenvalues.size(),
      [&](std::size_t i) {
        CurveEquidistributionRow row;
        auto shell = make_shell(2, eigenvalues[i]);
        if (shell->empty()) throw std::invalid_argument("curve_equidistribution_sweep: empty shell");
        row.E = eigenvalues[i];
        row.lambda = shell->lambda();
        const auto W = measure_pairing_matrix(a, sigma, *shell);
        const auto B = provider(shell);
        for (std::size_t j = 0; j < B.size(); ++j) {
          const auto c = B.row(j);
          row.max_deviation = std::max(row.max_deviation, std::abs(measure_quadratic_form(W, c).real() - target));
          double sum_abs = 0.0, sum_sq = 0.0;
          for (const auto& z : c) {
            sum_abs += std::abs(z);
            sum_sq += std::norm(z);
          }
          row.offdiag_mass = std::max(row.offdiag_mass, sum_abs * sum_abs - sum_sq);
        }
        row.budget = std::pow(row.lambda, -(1.0 - delta) / 2.0) * row.offdiag_mass;
        return row;
      },
      threads);
}

}  // namespace torusqe
