#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "torusqe/factor.hpp"
#include "torusqe/lattice.hpp"

using namespace torusqe;

namespace {

// Brute-force oracles: scan the whole box [-R, R]^d.
std::vector<LatticePoint> box_points(int d, std::int64_t R) {
  std::vector<LatticePoint> out;
  LatticePoint p(d);
  for (int i = 0; i < d; ++i) p[i] = -R;
  while (true) {
    out.push_back(p);
    int i = d - 1;
    while (i >= 0 && p[i] == R) p[i--] = -R;
    if (i < 0) break;
    ++p[i];
  }
  return out;
}

std::set<LatticePoint> brute_shell(int d, std::int64_t E) {
  std::set<LatticePoint> s;
  for (const auto& p : box_points(d, isqrt(E))) {
    if (p.norm_sq() == E) s.insert(p);
  }
  return s;
}

}  // namespace

TEST(Point, PrimitiveDividesByGcd) {
  EXPECT_EQ(primitive(LatticePoint{4, 6}), (LatticePoint{2, 3}));
  EXPECT_EQ(primitive(LatticePoint{0, -5}), (LatticePoint{0, -1}));
  EXPECT_EQ(primitive(LatticePoint{7, 0, 0}), (LatticePoint{1, 0, 0}));
  EXPECT_THROW(primitive(LatticePoint::zero(2)), std::invalid_argument);
}

TEST(Point, ArithmeticAndOrdering) {
  const LatticePoint a{1, -2}, b{3, 4};
  EXPECT_EQ(a + b, (LatticePoint{4, 2}));
  EXPECT_EQ(b - a, (LatticePoint{2, 6}));
  EXPECT_EQ(a.dot(b), -5);
  EXPECT_EQ(b.norm_sq(), 25);
  EXPECT_LT(a, b);
  EXPECT_THROW(LatticePoint(0), std::invalid_argument);
  EXPECT_THROW(LatticePoint(9), std::invalid_argument);
}

TEST(Shell, KnownValues) {
  const auto s9 = enumerate_shell(2, 9);
  ASSERT_EQ(s9.size(), 4u);
  for (const LatticePoint& p : {LatticePoint{3, 0}, LatticePoint{-3, 0}, LatticePoint{0, 3}, LatticePoint{0, -3}}) {
    EXPECT_TRUE(s9.contains(p));
  }
  const auto s0 = enumerate_shell(2, 0);
  ASSERT_EQ(s0.size(), 1u);
  EXPECT_TRUE(s0[0].is_zero());
  EXPECT_EQ(shell_size(4, 2), 24u);
  EXPECT_EQ(shell_size(2, 25), 12u);
}

TEST(Shell, MatchesBruteForceAndIsSorted) {
  for (int d = 2; d <= 4; ++d) {
    for (std::int64_t E = 0; E <= (d == 4 ? 30 : 60); ++E) {
      const auto shell = enumerate_shell(d, E);
      const auto ref = brute_shell(d, E);
      ASSERT_EQ(shell.size(), ref.size()) << "d=" << d << " E=" << E;
      EXPECT_TRUE(std::is_sorted(shell.points().begin(), shell.points().end()));
      for (const auto& p : shell.points()) {
        EXPECT_TRUE(ref.count(p));
        EXPECT_TRUE(shell.contains(-p));  // symmetric under k -> -k
      }
    }
  }
}

TEST(Shell, RejectsBadArguments) {
  EXPECT_THROW(enumerate_shell(1, 4), std::invalid_argument);
  EXPECT_THROW(enumerate_shell(9, 4), std::invalid_argument);
  EXPECT_THROW(enumerate_shell(2, -1), std::invalid_argument);
}

TEST(Shell, LambdaConversion) {
  EXPECT_EQ(lambda_to_norm_sq(5.0), 25);
  EXPECT_EQ(lambda_to_norm_sq(std::sqrt(2.0)), 2);
  EXPECT_THROW(lambda_to_norm_sq(1.5), std::invalid_argument);
}

TEST(PairCount, KnownValues) {
  const auto s = enumerate_shell(2, 25);
  EXPECT_EQ(pair_count(s, LatticePoint{-1, -7}), 2);
  EXPECT_EQ(pair_count(s, LatticePoint{1, 0}), 0);
  EXPECT_EQ(pair_count(s, LatticePoint{-6, -8}), 1);
  const auto partners = pair_partners(s, LatticePoint{-6, -8});
  ASSERT_EQ(partners.size(), 1u);
  EXPECT_EQ(s[partners[0].first], (LatticePoint{3, 4}));
}

TEST(PairCount, LinearConditionMatchesMembership) {
  for (int d = 2; d <= 3; ++d) {
    for (std::int64_t E : {5, 25, 50, 65, 9, 14, 17}) {
      const auto s = enumerate_shell(d, E);
      if (s.empty()) continue;
      const auto R = 2 * isqrt(E) + 1;
      for (const auto& n : box_points(d, std::min<std::int64_t>(R, d == 2 ? R : 6))) {
        if (n.is_zero()) continue;
        ASSERT_EQ(pair_count(s, n), pair_count_direct(s, n)) << n;
        ASSERT_EQ(static_cast<std::int64_t>(pair_partners(s, n).size()), pair_count(s, n));
      }
    }
  }
}

TEST(PairCount, DifferenceMultiplicities) {
  const auto s = enumerate_shell(2, 65);
  const auto counts = difference_counts(s);
  std::int64_t mx = 0;
  for (const auto& [n, c] : counts) {
    EXPECT_EQ(c, pair_count(s, n));
    mx = std::max(mx, c);
  }
  EXPECT_EQ(max_pair_count(s), mx);
  EXPECT_LE(mx, 2);
}

TEST(IntervalPairCount, KnownValues) {
  EXPECT_EQ(interval_pair_count(LatticePoint{0, 2}, 0.0, 5.0), 9);
  EXPECT_EQ(interval_pair_count(LatticePoint{1, 1}, 0.0, 0.0), 0);
  // k_3 = -1 and ||k|| <= 10: lattice points in the disk of radius sqrt(99)
  std::int64_t disk = 0;
  for (std::int64_t x = -10; x <= 10; ++x) {
    for (std::int64_t y = -10; y <= 10; ++y) disk += (x * x + y * y <= 99);
  }
  EXPECT_EQ(interval_pair_count(LatticePoint{0, 0, 2}, 0.0, 10.0), disk);
}

TEST(IntervalPairCount, MatchesBruteForce) {
  for (int d = 2; d <= 3; ++d) {
    const std::int64_t R = d == 2 ? 7 : 6;
    const auto ball = box_points(d, R);
    for (const auto& n : box_points(d, 3)) {
      if (n.is_zero()) continue;
      for (auto [lo, hi] : {std::pair<std::int64_t, std::int64_t>{0, 36}, {5, 20}, {10, 10}, {17, 30}}) {
        std::int64_t ref = 0;
        for (const auto& k : ball) {
          const auto e = k.norm_sq();
          ref += (e >= lo && e <= hi && n.norm_sq() + 2 * n.dot(k) == 0);
        }
        ASSERT_EQ(interval_pair_count_sq(n, lo, hi), ref) << n << " [" << lo << "," << hi << "]";
      }
    }
  }
}

TEST(BallCount, DiskOfRadiusFive) { EXPECT_EQ(ball_count(2, 0, 25), 81); }

TEST(Spectrum, SumsOfTwoSquares) {
  EXPECT_EQ(sum_two_squares_spectrum(10).values, (std::vector<std::int64_t>{0, 1, 2, 4, 5, 8, 9, 10}));
  EXPECT_EQ(sum_two_squares_spectrum(0).values, (std::vector<std::int64_t>{0}));
  const auto v = sum_two_squares_spectrum(25).values;
  EXPECT_TRUE(std::count(v.begin(), v.end(), 25));
  EXPECT_FALSE(std::count(v.begin(), v.end(), 21));
  for (std::int64_t E = 0; E <= 25; ++E) {
    EXPECT_EQ(std::binary_search(v.begin(), v.end(), E), !enumerate_shell(2, E).empty()) << E;
  }
}

TEST(Separation, KnownValues) {
  EXPECT_DOUBLE_EQ(min_separation(enumerate_shell(2, 9)), std::sqrt(18.0));
  EXPECT_DOUBLE_EQ(min_separation(enumerate_shell(2, 25)), std::sqrt(2.0));
  // the closest pair on E = 1 is (1,0),(0,1), not the antipodal one
  EXPECT_DOUBLE_EQ(min_separation(enumerate_shell(2, 1)), std::sqrt(2.0));

  const auto r9 = separation_record(9, 0.2);
  EXPECT_NEAR(r9.threshold, 2.408, 1e-3);
  EXPECT_TRUE(r9.is_separated);
  const auto r25 = separation_record(25, 0.2);
  EXPECT_NEAR(r25.threshold, 3.624, 1e-3);
  EXPECT_FALSE(r25.is_separated);

  const auto survey = separation_survey(2, 0.5, 1);
  ASSERT_EQ(survey.records.size(), 2u);
  EXPECT_TRUE(survey.records[0].is_separated);
  EXPECT_TRUE(survey.records[1].is_separated);
}

TEST(Separation, SurveyIsThreadCountInvariant) {
  const auto a = separation_survey(3000, 0.2, 1);
  const auto b = separation_survey(3000, 0.2, 4);
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_EQ(a.non_separated, b.non_separated);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].min_sep, b.records[i].min_sep);
  EXPECT_GT(a.non_separated, 0);
  EXPECT_LT(a.fraction_non_separated, 1.0);
}

TEST(Factor, MatchesTrialDivision) {
  for (std::uint64_t n = 2; n < 5000; ++n) {
    std::vector<std::uint64_t> ref;
    auto m = n;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
      while (m % p == 0) {
        ref.push_back(p);
        m /= p;
      }
    }
    if (m > 1) ref.push_back(m);
    ASSERT_EQ(factor(n), ref) << n;
  }
  // large semiprime and prime
  EXPECT_EQ(factor(1000000007ULL * 998244353ULL), (std::vector<std::uint64_t>{998244353ULL, 1000000007ULL}));
  EXPECT_TRUE(is_prime(2305843009213693951ULL));
}

TEST(Iwaniec, KnownValues) {
  const auto entries = iwaniec_search(4);
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].norm_sq, 2);  // n = 1: E = 2 is prime but r2 = 4
  EXPECT_EQ(entries[0].r2, 4);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(entries[i].r2, 8) << entries[i].n;
  EXPECT_EQ(entries[1].n, 2);
  EXPECT_EQ(entries[2].norm_sq, 10);
  EXPECT_EQ(entries[2].factor_count, 2);
  EXPECT_EQ(entries[3].norm_sq, 17);
  for (const auto& e : iwaniec_search(100)) {
    if (e.n == 1) continue;
    EXPECT_GE(e.r2, 8);
    EXPECT_LE(e.r2, 16);
  }
}

TEST(Identities, SumOfSquaresCounts) {
  std::int64_t p = 1;
  for (int q = 0; q <= 8; ++q, p *= 9) EXPECT_EQ(shell_size(2, p), 4u) << q;
  p = 1;
  for (int q = 0; q <= 6; ++q, p *= 4) {
    EXPECT_EQ(shell_size(3, p), 6u);
    EXPECT_EQ(shell_size(4, 2 * p), 24u);
  }
  // 210 = 2*3*5*7: Jacobi gives r4 = 24 * sigma(105) = 4608 = 8 * prod(1 + p)
  EXPECT_EQ(shell_size(4, 210), 4608u);
}

TEST(Identities, JacobiFourSquares) {
  auto jacobi = [](std::int64_t n) {
    std::int64_t s = 0;
    for (std::int64_t k = 1; k <= n; ++k) s += (n % k == 0 && k % 4 != 0) ? k : 0;
    return 8 * s;
  };
  for (std::int64_t n = 1; n <= 120; ++n) EXPECT_EQ(static_cast<std::int64_t>(shell_size(4, n)), jacobi(n)) << n;
}
