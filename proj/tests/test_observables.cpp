#include <gtest/gtest.h>

#include <cmath>

#include "torusqe/dictionary.hpp"
#include "torusqe/observables.hpp"

using namespace torusqe;

namespace {

Eigenfunction paired_35() {
  auto shell = make_shell(2, 25);
  std::vector<cplx> c(shell->size());
  c[shell->index_of({3, 4})] = 1.0 / std::sqrt(2.0);
  c[shell->index_of({-3, -4})] = 1.0 / std::sqrt(2.0);
  return Eigenfunction(shell, c);
}

}  // namespace

TEST(Observable, RejectsNonHermitianRealTable) {
  EXPECT_THROW(Observable(2, {{LatticePoint{1, 0}, 1.0}}, true), std::invalid_argument);
  EXPECT_NO_THROW(Observable(2, {{LatticePoint{1, 0}, 1.0}}, false));
  EXPECT_TRUE(Observable::cosine(LatticePoint{1, 2}).hermitian());
}

TEST(Observable, NormsAndMean) {
  const auto a = Observable::constant(2, 3.0) + Observable::cosine(LatticePoint{1, 0}, 0.5);
  EXPECT_DOUBLE_EQ(a.mean().real(), 3.0);
  EXPECT_DOUBLE_EQ(a.l2_norm_sq(), 9.5);
  EXPECT_DOUBLE_EQ(a.centered_l2_norm_sq(), 0.5);
  const double x[2] = {0.7, 0.1};
  EXPECT_NEAR(a.evaluate(x).real(), 3.0 + std::cos(0.7), 1e-15);
}

TEST(Truncate, KnownValues) {
  const auto a = Observable::constant(2, 1.0) + Observable::cosine(LatticePoint{3, 0});
  const auto t = truncate(a, 1.0);
  EXPECT_EQ(t.support_size(), 1u);
  EXPECT_EQ(t.coefficient(LatticePoint::zero(2)), cplx(1.0));
  EXPECT_EQ(truncate(a, 100.0).support_size(), a.support_size());
  // |n| = 2 lambda exactly is kept
  const auto b = Observable::cosine(LatticePoint{6, 8});
  EXPECT_EQ(truncate(b, 5.0).support_size(), 2u);
  EXPECT_EQ(truncate(b, 4.999).support_size(), 0u);
}

TEST(Density, KnownValues) {
  const auto e = density_coeffs(Eigenfunction::exponential(make_shell(2, 25), {3, 4}));
  EXPECT_EQ(e.support_size(), 1u);
  EXPECT_NEAR(std::abs(e.coefficient(LatticePoint::zero(2)) - 1.0), 0.0, 1e-15);

  const auto phi = density_coeffs(sharpness_sequence(3));
  EXPECT_EQ(phi.support_size(), 3u);
  EXPECT_NEAR(phi.coefficient(LatticePoint::zero(2)).real(), 1.0, 1e-15);
  EXPECT_NEAR(phi.coefficient(LatticePoint{0, 2}).real(), 0.5, 1e-15);
  EXPECT_NEAR(phi.coefficient(LatticePoint{0, -2}).real(), 0.5, 1e-15);

  const auto p = density_coeffs(paired_35());
  EXPECT_NEAR(p.coefficient(LatticePoint{6, 8}).real(), 0.5, 1e-15);
  EXPECT_NEAR(p.coefficient(LatticePoint{-6, -8}).real(), 0.5, 1e-15);
}

TEST(IntegrateDensity, KnownValues) {
  EXPECT_NEAR(std::abs(integrate_density(Observable::cosine(LatticePoint{1, 0}),
                                         Eigenfunction::exponential(make_shell(2, 25), {0, 5}))),
              0.0, 1e-15);
  EXPECT_NEAR(integrate_density(Observable::cosine(LatticePoint{6, 8}), paired_35()).real(), 1.0, 1e-15);
  EXPECT_NEAR(integrate_density(Observable::exponential(LatticePoint{0, 2}), sharpness_sequence(5)).real(), 0.5,
              1e-15);
}

TEST(IntegrateDensity, PlanAgreesWithParseval) {
  for (const auto& [name, a] : observable_dictionary(2)) {
    for (std::int64_t E : {25, 65, 325}) {
      const auto B = random_onb(make_shell(2, E), 17);
      for (std::size_t j = 0; j < B.size(); j += 3) {
        const auto psi = B.function(j);
        EXPECT_NEAR(std::abs(integrate_density(a, psi) - integrate_density_parseval(a, psi)), 0.0, 1e-12)
            << name << " E=" << E;
      }
    }
  }
}

TEST(IntegrateDensity, GridOracle) {
  const auto a = Observable::cosine(LatticePoint{6, 8}) + Observable::constant(2, 0.25);
  const auto psi = random_onb(make_shell(2, 25), 3).function(1);
  EXPECT_NEAR(std::abs(integrate_density(a, psi) - grid_integral_oracle(a, psi, 64)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(grid_integral_oracle(Observable::constant(2, 1.0), psi, 64) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(grid_integral_oracle(Observable::cosine(LatticePoint{6, 8}), paired_35(), 64).real(), 1.0, 1e-12);
  EXPECT_NEAR(grid_integral_oracle(Observable::exponential(LatticePoint{0, 2}), sharpness_sequence(2), 32).real(), 0.5,
              1e-12);
  EXPECT_THROW(grid_integral_oracle(a, psi, 10), std::invalid_argument);
}

TEST(L4, KnownValues) {
  EXPECT_NEAR(l4_norm(Eigenfunction::exponential(make_shell(2, 5), {1, 2})), 1.0, 1e-15);
  EXPECT_NEAR(l4_norm(sharpness_sequence(7)), std::pow(1.5, 0.25), 1e-12);
}

TEST(L4, MatchesGridQuadrature) {
  const auto psi = random_onb(make_shell(2, 65), 1).function(0);
  // ||psi||_4^4 = int |psi|^2 |psi|^2; the density is itself a trig polynomial
  const auto dens = density_coeffs(psi);
  const double via_grid = grid_integral_oracle(dens, psi, 72).real();
  EXPECT_NEAR(std::pow(via_grid, 0.25), l4_norm(psi), 1e-12);
}

TEST(L4, ZygmundBoundOnSmallShells) {
  for (std::int64_t E : {1, 5, 25, 65, 325, 1105}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto B = random_onb(make_shell(2, E), seed);
      for (std::size_t j = 0; j < B.size(); ++j) EXPECT_LE(l4_norm(B.function(j)), std::pow(3.0, 0.25) + 1e-9);
    }
  }
}

TEST(Dictionary, TwelveRealEntries) {
  for (int d : {2, 3}) {
    const auto dict = observable_dictionary(d);
    ASSERT_EQ(dict.size(), 12u);
    for (const auto& [name, a] : dict) {
      EXPECT_EQ(a.dim(), d);
      EXPECT_TRUE(a.is_real()) << name;
      EXPECT_TRUE(a.hermitian()) << name;
    }
    // deterministic
    const auto again = observable_dictionary(d);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(dict[i].a.coeffs(), again[i].a.coeffs());
  }
}
