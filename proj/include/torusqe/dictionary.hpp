#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "torusqe/observables.hpp"
#include "torusqe/rng.hpp"

namespace torusqe {

struct NamedObservable {
  std::string name;
  Observable a;
};

namespace detail {

inline LatticePoint embed(int d, std::initializer_list<std::int64_t> head) {
  LatticePoint p(d);
  int i = 0;
  for (auto v : head) {
    if (i >= d) break;
    p[i++] = v;
  }
  return p;
}

// Hermitian trigonometric polynomial with `terms` random frequencies in the
// box |n_i| <= box and Gaussian coefficients.
inline Observable random_real_observable(int d, std::uint64_t seed, int terms, std::int64_t box) {
  SplitMix64 rng(stream_seed(seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(box)));
  Observable::CoeffMap m;
  for (int t = 0; t < terms; ++t) {
    LatticePoint n(d);
    for (int i = 0; i < d; ++i) {
      n[i] = static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(2 * box + 1)) - box;
    }
    const cplx v = rng.complex_gaussian();
    if (n.is_zero()) {
      m[n] += v.real();
    } else {
      m[n] += v;
      m[-n] += std::conj(v);
    }
  }
  return Observable(d, std::move(m), true, 1e-12);
}

}  // namespace detail

/// Twelve fixed real observables in dimension d: single modes at primitive
/// and non-primitive frequencies, a sine mode, a mixture with nonzero mean, a
/// high-frequency mode, a positive Fejer-type bump and seeded random
/// polynomials. Deterministic for a given d.
inline std::vector<NamedObservable> observable_dictionary(int d) {
  using detail::embed;
  std::vector<NamedObservable> out;
  out.push_back({"cos_e1", Observable::cosine(embed(d, {1}))});
  out.push_back({"cos_0_2", Observable::cosine(embed(d, {0, 2}))});
  out.push_back({"cos_1_1", Observable::cosine(embed(d, {1, 1}))});
  out.push_back({"cos_2_1", Observable::cosine(embed(d, {2, 1}))});
  out.push_back({"half_cos_3_4", Observable::cosine(embed(d, {3, 4}), 0.5)});
  out.push_back({"cos_6_8", Observable::cosine(embed(d, {6, 8}))});
  {
    const auto p = embed(d, {2, 3});
    out.push_back({"sin_2_3", Observable(d, {{p, cplx(0.0, -0.5)}, {-p, cplx(0.0, 0.5)}}, true)});
  }
  out.push_back({"mixed_mean1",
                 Observable::constant(d, 1.0) + Observable::cosine(embed(d, {1}), 0.5) +
                     Observable::cosine(embed(d, {0, 1}), 0.25)});
  out.push_back({"cos_20_15", Observable::cosine(embed(d, {20, 15}))});
  {
    // Fejer product kernel of order 4 restricted to the first two axes
    Observable::CoeffMap m;
    for (std::int64_t x = -3; x <= 3; ++x) {
      for (std::int64_t y = -3; y <= 3; ++y) {
        const double w = (1.0 - std::abs(static_cast<double>(x)) / 4.0) * (1.0 - std::abs(static_cast<double>(y)) / 4.0);
        m[embed(d, {x, y})] = w;
      }
    }
    out.push_back({"fejer_bump", Observable(d, std::move(m), true)});
  }
  out.push_back({"random_box5", detail::random_real_observable(d, 11, 6, 5)});
  out.push_back({"random_box12", detail::random_real_observable(d, 12, 10, 12)});
  return out;
}

}  // namespace torusqe
