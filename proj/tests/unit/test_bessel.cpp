#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ldcs/bessel.hpp"

using namespace ldcs;

namespace {

// Independent reference: J_n from the standard library, negative orders by
// reflection.
double ref_j(int n, double x) {
  const int a = std::abs(n);
  double v = std::cyl_bessel_j(static_cast<double>(a), std::abs(x));
  if (n < 0 && (a % 2)) v = -v;
  if (x < 0 && (a % 2)) v = -v;
  return v;
}

// A_0(n, alpha, beta) = sum_l J_{n + 2l}(alpha) J_l(beta): expansion of
// exp(-i alpha sin t + i beta sin 2t) in two ordinary Bessel series.
double ref_a0(int n, double alpha, double beta) {
  double s = 0.0;
  for (int l = -80; l <= 80; ++l) s += ref_j(n + 2 * l, alpha) * ref_j(l, beta);
  return s;
}

}  // namespace

TEST(BesselJ, Values) {
  EXPECT_DOUBLE_EQ(bessel_j(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(bessel_j(1, 0.0), 0.0);
  for (int n : {0, 1, 2, 5, 17, 40, -3, -8})
    for (double x : {0.3, 1.0, 3.7, 12.5, 19.9, -6.2})
      EXPECT_NEAR(bessel_j(n, x), ref_j(n, x), 1e-13) << n << " " << x;
}

TEST(BesselJ, CompletenessSum) {
  double s = 0.0;
  for (int n = -40; n <= 40; ++n) s += bessel_j(n, 5.0) * bessel_j(n, 5.0);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(BesselJ, TableMatchesSingleValues) {
  const BesselRange r(-30, 45, 11.3);
  for (int n = -30; n <= 45; ++n) EXPECT_NEAR(r(n), ref_j(n, 11.3), 1e-13);
  const auto t = bessel_j_table(60, 25.0);
  for (int n = 0; n <= 60; ++n) EXPECT_NEAR(t[n], ref_j(n, 25.0), 1e-13);
}

TEST(GenBessel, TrivialAndOrdinaryLimits) {
  EXPECT_NEAR(gen_bessel_a({0, 0, 0.0, 0.0}), 1.0, 1e-15);
  for (auto [n, a] : {std::pair{0, 1.0}, std::pair{2, 3.7}, std::pair{5, -2.0}})
    EXPECT_NEAR(gen_bessel_a({0, n, a, 0.0}), ref_j(n, a), 1e-12);
}

TEST(GenBessel, MatchesTwoSeriesExpansion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> un(-60, 60);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const int n = un(rng);
    const double a = u(rng), b = u(rng);
    worst = std::max(worst, std::abs(gen_bessel_a({0, n, a, b}) - ref_a0(n, a, b)));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(GenBessel, HigherKFromRecurrence) {
  // cos t e^{i n t} splits into orders n +- 1.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> un(-60, 60);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = un(rng);
    const double a = u(rng), b = u(rng);
    const double a0p = gen_bessel_a({0, n + 1, a, b}), a0m = gen_bessel_a({0, n - 1, a, b});
    const double a1 = gen_bessel_a({1, n, a, b});
    worst = std::max(worst, std::abs(a1 - 0.5 * (a0p + a0m)));
    const double a2 = gen_bessel_a({2, n, a, b});
    const double ref2 = 0.25 * (gen_bessel_a({0, n + 2, a, b}) + 2.0 * gen_bessel_a({0, n, a, b}) +
                                gen_bessel_a({0, n - 2, a, b}));
    worst = std::max(worst, std::abs(a2 - ref2));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(GenBessel, SumOverOrdersIsOne) {
  for (auto [a, b] : {std::pair{3.0, 1.5}, std::pair{-12.0, 7.0}, std::pair{19.0, -19.0}}) {
    double s = 0.0;
    for (int n = -150; n <= 150; ++n) s += gen_bessel_a({0, n, a, b});
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
}

TEST(GenBessel, TableAgreesWithSingleEvaluation) {
  const GenBesselTable t(-70, 70, 14.2, -6.3);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int n = -70; n <= 70; ++n) worst = std::max(worst, std::abs(t(k, n) - gen_bessel_a({k, n, 14.2, -6.3})));
  EXPECT_LT(worst, 1e-12);
}

TEST(GenBessel, RejectsBadK) { EXPECT_THROW(gen_bessel_a({3, 0, 1.0, 1.0}), std::invalid_argument); }

TEST(JPlusMinus, ZeroArgumentAndNormIdentity) {
  EXPECT_NEAR(std::abs(j_plus_minus(0, 0.0, 0.7).first), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(j_plus_minus(1, 0.0, 0.7).first - 0.5), 0.0, 1e-15);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const int s = static_cast<int>(u(rng) * 3);
    const double a = u(rng), phi = u(rng);
    const auto [p, m] = j_plus_minus(s, a, phi);
    const double jl = ref_j(s - 1, a), jh = ref_j(s + 1, a);
    EXPECT_NEAR(std::norm(p) + std::norm(m), 0.5 * (jl * jl + jh * jh), 1e-12);
  }
}

TEST(SCutoff, GrowsWithArgumentAndBoundsTail) {
  EXPECT_LE(s_cutoff(0.0, 0.0), 40);
  EXPECT_GE(s_cutoff(10.0, 0.0, 1e-15), 10);
  for (auto [a, b] : {std::pair{10.0, 0.0}, std::pair{25.0, 8.0}, std::pair{3.0, 12.0}}) {
    const int s = s_cutoff(a, b, 1e-14);
    double tail = 0.0;
    for (int n = s + 1; n <= 2 * s; ++n)
      tail = std::max({tail, std::abs(gen_bessel_a({0, n, a, b})), std::abs(gen_bessel_a({0, -n, a, b}))});
    EXPECT_LT(tail, 1e-12) << a << " " << b;
  }
  EXPECT_THROW(s_cutoff(1.0, 1.0, 0.0), std::invalid_argument);
}
