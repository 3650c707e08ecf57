#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "torusqe/dictionary.hpp"
#include "torusqe/restriction.hpp"

using namespace torusqe;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigenfunction paired(std::int64_t E, const LatticePoint& k) {
  auto shell = make_shell(2, E);
  std::vector<cplx> c(shell->size());
  c[shell->index_of(k)] = 1.0 / std::sqrt(2.0);
  c[shell->index_of(-k)] = 1.0 / std::sqrt(2.0);
  return Eigenfunction(shell, c);
}

// trapezoid rule in the angle, evaluating a and psi pointwise
cplx circle_oracle(const Observable& a, const Eigenfunction& psi, std::array<double, 2> c, double r, int M = 4096) {
  cplx s = 0.0;
  for (int i = 0; i < M; ++i) {
    const double t = kTwoPi * i / M;
    const double x[2] = {c[0] + r * std::cos(t), c[1] + r * std::sin(t)};
    s += a.evaluate(x) * std::norm(evaluate(psi, x));
  }
  return s * (kTwoPi * r / M);
}

}  // namespace

TEST(Restriction, KnownValues) {
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  const auto one = Observable::constant(2, 1.0);
  const auto e34 = Eigenfunction::exponential(make_shell(2, 25), {3, 4});
  EXPECT_NEAR(restriction_integral(one, e34, circle), kTwoPi, 1e-13);
  EXPECT_NEAR(restriction_integral(one, paired(25, {3, 4}), circle), kTwoPi * (1.0 + bessel_j0(10.0)), 1e-13);
  EXPECT_NEAR(std::abs(period_integral(e34, circle).value - kTwoPi * bessel_j0(5.0)), 0.0, 1e-13);

  const auto seg = quadrature_measure(flat_segment(), 1e-12);
  const auto e05 = Eigenfunction::exponential(make_shell(2, 25), {0, 5});
  EXPECT_NEAR(restriction_integral(one, e05, seg), kTwoPi, 1e-11);
  EXPECT_NEAR(std::abs(period_integral(e05, seg).value - kTwoPi), 0.0, 1e-11);
}

TEST(Restriction, BrRatio) {
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  EXPECT_NEAR(br_ratio(Eigenfunction::exponential(make_shell(2, 25), {3, 4}), circle), std::sqrt(kTwoPi), 1e-13);
  EXPECT_NEAR(br_ratio(paired(25, {3, 4}), circle), std::sqrt(kTwoPi * (1.0 + bessel_j0(10.0))), 1e-13);
  EXPECT_THROW(br_ratio(Eigenfunction::exponential(make_shell(3, 1), {1, 0, 0}), sphere_measure({0, 0, 0}, 1.0)),
               std::invalid_argument);
}

TEST(Restriction, AgreesWithPointwiseQuadrature) {
  const std::array<double, 2> c{0.3, -1.1};
  const double r = 0.8;
  const auto circle = circle_measure(c, r);
  for (const auto& [name, a] : observable_dictionary(2)) {
    if (name == "cos_20_15" || name == "fejer_bump") continue;  // keep the oracle grid cheap
    const auto B = random_onb(make_shell(2, 65), 9);
    for (std::size_t j = 0; j < B.size(); j += 5) {
      const auto psi = B.function(j);
      EXPECT_NEAR(std::abs(restriction_integral_complex(a, psi, circle) - circle_oracle(a, psi, c, r)), 0.0, 1e-10)
          << name;
    }
  }
}

TEST(Restriction, TargetIsIntegralOfA) {
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  EXPECT_NEAR(restriction_target(Observable::constant(2, 1.0), circle), kTwoPi, 1e-14);
  EXPECT_NEAR(restriction_target(Observable::cosine(LatticePoint{1, 0}), circle), 2.0 * kTwoPi * bessel_j0(1.0), 1e-13);
}

TEST(Restriction, SweepWithExponentialBasisHasNoDeviation) {
  // |e_k|^2 = 1, so int_Sigma a |e_k|^2 equals int_Sigma a exactly
  const auto circle = circle_measure({0.2, 0.1}, 1.3);
  const auto a = observable_dictionary(2)[7].a;
  std::vector<ShellPtr> shells{make_shell(2, 25), make_shell(2, 65), make_shell(2, 85)};
  const auto recs = restriction_sweep(a, circle, shells, [](const ShellPtr& s) { return exponential_basis(s); }, 1);
  EXPECT_EQ(recs.size(), 12u + 16u + 16u);
  for (const auto& r : recs) {
    EXPECT_NEAR(r.restriction_value - r.target, 0.0, 1e-12);
    EXPECT_NEAR(r.l2_ratio, std::sqrt(kTwoPi * 1.3), 1e-12);
    EXPECT_LE(std::abs(r.period), r.cs_bound + 1e-12);
  }
}

TEST(PeriodDecay, CauchySchwarzAndDeterminism) {
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  const auto rows = period_decay_sweep(circle, 50, 1, 4, 0.1, 1);
  const auto again = period_decay_sweep(circle, 50, 1, 4, 0.1, 2);
  ASSERT_EQ(rows.size(), again.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_GT(make_shell(2, rows[i].E)->size(), 0u);
    EXPECT_LE(rows[i].max_period, rows[i].cs_bound + 1e-12);
    EXPECT_EQ(rows[i].max_period, again[i].max_period);
  }
}

TEST(CurveEquidistribution, ExponentialBasisIsExact) {
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  const auto rows = curve_equidistribution_sweep(observable_dictionary(2)[2].a, circle, {25, 65, 85},
                                                 [](const ShellPtr& s) { return exponential_basis(s); }, 0.2, 1);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.max_deviation, 0.0, 1e-12);
    EXPECT_EQ(r.offdiag_mass, 0.0);
  }
  EXPECT_THROW(curve_equidistribution_sweep(observable_dictionary(2)[2].a, circle, {3},
                                            [](const ShellPtr& s) { return exponential_basis(s); }),
               std::invalid_argument);
}
