#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "symco/rates.hpp"

using namespace symco;

TEST(Occupancy, Examples) {
  auto p = occupancy_pmf(2, 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  p = occupancy_pmf(1, 7);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], 1.0);
  p = occupancy_pmf(3, 2);
  EXPECT_NEAR(p[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 3, 1e-15);
}

TEST(Occupancy, MatchesEnumeration) {
  for (int k = 1; k <= 6; ++k)
    for (int i = 1; i <= 6; ++i) {
      const auto want = oracle::occupancy(k, i);
      const auto got = occupancy_pmf(k, i);
      const auto alt = occupancy_pmf_alternating(k, i);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t j = 0; j < want.size(); ++j) {
        EXPECT_NEAR(got[j], want[j], 1e-14) << k << " " << i << " " << j;
        EXPECT_NEAR(alt[j], want[j], 1e-13) << k << " " << i << " " << j;
      }
    }
}

TEST(Occupancy, LargeArgumentsNormalized) {
  for (std::int64_t k : {50LL, 1000LL, 100000000LL})
    for (int i : {10, 60, 200}) {
      const auto p = occupancy_pmf(k, i);
      double s = 0;
      for (double v : p) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Occupancy, RecurrenceAgreesWithAlternatingForm) {
  for (std::int64_t k : {7LL, 20LL, 45LL})
    for (int i : {5, 15, 25}) {
      const auto a = occupancy_pmf(k, i);
      const auto b = occupancy_pmf_alternating(k, i);
      for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-10);
    }
}

TEST(CollisionProb, Examples) {
  EXPECT_NEAR(collision_prob(2, 2), 0.5, 1e-15);
  EXPECT_EQ(collision_prob(3, 4), 1.0);
  EXPECT_NEAR(collision_prob(4, 3), 0.625, 1e-15);
  EXPECT_EQ(collision_prob(5, 1), 0.0);
}

TEST(CollisionProb, MatchesEnumeration) {
  for (int k = 1; k <= 6; ++k)
    for (int n = 1; n <= 6; ++n) EXPECT_NEAR(collision_prob(k, n), oracle::collision_prob(k, n), 1e-14);
}

TEST(CollisionProb, LargeKMatchesProduct) {
  for (std::int64_t k : {1000LL, 123456LL, 50000000LL})
    for (int n : {2, 10, 100, 999}) {
      if (n > k) continue;
      long double logp = 0;
      for (int i = 1; i < n; ++i) logp += std::log1p(-static_cast<long double>(i) / k);
      const double want = static_cast<double>(-std::expm1(logp));
      EXPECT_NEAR(collision_prob(k, n), want, 1e-13 * std::max(1.0, want)) << k << " " << n;
      EXPECT_NEAR(collision_prob_real(static_cast<double>(k), n), want, 1e-12 * std::max(1.0, want));
    }
}

TEST(Signature, CanonicalAndValidation) {
  CollisionSignature s(5, {1, 3, 1});
  EXPECT_EQ(s.parts(), (std::vector<int>{3, 1, 1}));
  EXPECT_EQ(s.to_string(), "(3,1,1)");
  EXPECT_TRUE(CollisionSignature(3, {1, 2}).is_kingman_pair());
  EXPECT_FALSE(CollisionSignature(4, {2, 2}).is_kingman_pair());
  EXPECT_THROW(CollisionSignature(4, {2, 1}), std::invalid_argument);
  EXPECT_THROW(CollisionSignature(3, {0, 3}), std::invalid_argument);
  EXPECT_THROW(collision_rate(CoagulationMeasure::kingman(), CollisionSignature(3, {1, 1, 1})), std::invalid_argument);
}

TEST(CollisionRate, Examples) {
  EXPECT_EQ(collision_rate(CoagulationMeasure::kingman(1.0), CollisionSignature(2, {2})), 1.0);
  const auto star = CoagulationMeasure::explicit_masses({{1, 1.0}});
  EXPECT_EQ(collision_rate(star, CollisionSignature(3, {3})), 1.0);
  EXPECT_EQ(collision_rate(star, CollisionSignature(3, {2, 1})), 0.0);
  EXPECT_NEAR(collision_rate(CoagulationMeasure::explicit_masses({{2, 1.0}}), CollisionSignature(3, {2, 1})), 0.25, 1e-15);
}

TEST(CollisionRate, MatchesEnumerationForPointMasses) {
  for (int k = 1; k <= 5; ++k) {
    const auto f = CoagulationMeasure::explicit_masses({{k, 1.0}});
    for (int b = 2; b <= 6; ++b)
      for (const auto& parts : integer_partitions(b)) {
        if (static_cast<int>(parts.size()) == b) continue;
        EXPECT_NEAR(collision_rate(f, CollisionSignature(b, parts)), oracle::specific_partition_prob(k, parts), 1e-12);
      }
  }
}

TEST(CollisionRate, SymmetricAcrossPartitionsWithEqualGroupCount) {
  const auto pl = CoagulationMeasure::power_law(0.7);
  const auto ex = CoagulationMeasure::explicit_masses({{2, 1.0}, {3, 2.0}});
  for (int b = 2; b <= 8; ++b)
    for (int r = 1; r < b; ++r) {
      const auto parts = integer_partitions(b, r);
      const double ref_pl = collision_rate(pl, CollisionSignature(b, parts.front()));
      const double ref_ex = collision_rate(ex, CollisionSignature(b, parts.front()));
      for (const auto& p : parts) {
        EXPECT_NEAR(collision_rate(pl, CollisionSignature(b, p)), ref_pl, 1e-12 * ref_pl);
        EXPECT_NEAR(collision_rate(ex, CollisionSignature(b, p)), ref_ex, 1e-12 * std::max(ref_ex, 1e-300));
      }
    }
}

TEST(CollisionRate, PowerLawAgreesWithLongDirectSum) {
  // Independent route: direct summation far past the horizon plus a crude integral tail.
  const double beta = 1.2;
  for (auto parts : std::vector<std::vector<int>>{{2, 1}, {3}, {2, 2}, {2, 1, 1}}) {
    int b = 0;
    for (int v : parts) b += v;
    const int r = static_cast<int>(parts.size());
    long double s = 0;
    const std::int64_t K = 2'000'000;
    for (std::int64_t k = r; k <= K; ++k) {
      long double term = std::pow(static_cast<long double>(k), -beta - b);
      for (int m = 0; m < r; ++m) term *= (k - m);
      s += term;
    }
    // tail ~ sum_{k > K} k^{r - b - beta}
    const double e = b - r + beta;
    s += std::pow(static_cast<double>(K) + 0.5, 1.0 - e) / (e - 1.0);
    EXPECT_NEAR(collision_rate(CoagulationMeasure::power_law(beta), CollisionSignature(b, parts)), static_cast<double>(s),
                1e-9 * static_cast<double>(s));
  }
}

TEST(Partitions, CountsAndShape) {
  EXPECT_EQ(integer_partitions(5).size(), 7u);
  EXPECT_EQ(integer_partitions(10).size(), 42u);
  EXPECT_EQ(integer_partitions(6, 3).size(), 3u);
  for (const auto& p : integer_partitions(8)) {
    int s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p[i];
      if (i) EXPECT_LE(p[i], p[i - 1]);
    }
    EXPECT_EQ(s, 8);
  }
}

TEST(Arrangements, Examples) {
  const std::vector<int> a{2, 2}, b{2, 1}, c{7};
  EXPECT_EQ(arrangements_count(4, a), 3u);
  EXPECT_EQ(arrangements_count(3, b), 3u);
  EXPECT_EQ(arrangements_count(7, c), 1u);
  EXPECT_THROW(arrangements_count(5, a), std::invalid_argument);
}

TEST(Arrangements, MatchesSetPartitionEnumeration) {
  for (int n = 1; n <= 9; ++n)
    for (const auto& p : integer_partitions(n)) {
      EXPECT_EQ(arrangements_count(n, p), oracle::count_partitions_with_sizes(n, p));
      EXPECT_NEAR(log_arrangements_count(n, p), std::log(static_cast<double>(oracle::count_partitions_with_sizes(n, p))),
                  1e-12);
    }
}

TEST(Generator, Examples) {
  auto q = block_counting_generator(CoagulationMeasure::kingman(1.0), 3);
  EXPECT_EQ(q.rate(3, 2), 3.0);
  EXPECT_EQ(q.rate(2, 1), 1.0);
  EXPECT_EQ(q.rate(3, 1), 0.0);
  q = block_counting_generator(CoagulationMeasure::explicit_masses({{2, 1.0}}), 2);
  EXPECT_NEAR(q.rate(2, 1), 0.5, 1e-15);
  q = block_counting_generator(CoagulationMeasure::explicit_masses({{1, 1.0}}), 5);
  EXPECT_EQ(q.rate(5, 1), 1.0);
  for (int j = 2; j < 5; ++j) EXPECT_EQ(q.rate(5, j), 0.0);
}

TEST(Generator, RowSumIdentity) {
  for (const auto& f : {CoagulationMeasure::explicit_masses({{2, 0.5}, {3, 1.5}, {10, 2.0}}, 0.7),
                        CoagulationMeasure::power_law(0.6), CoagulationMeasure::power_law(1.5, std::nullopt, 1.0),
                        CoagulationMeasure::power_law(0.8, 300)}) {
    const auto q = block_counting_generator(f, 20);
    q.validate();
    for (int i = 2; i <= 20; ++i) {
      const double want = total_rate(f, i, RateMethod::collision_prob_sum).value;
      EXPECT_NEAR(q.exit_rate(i), want, 1e-10 * std::max(1.0, want)) << i;
    }
  }
}

TEST(Generator, ValidateRejectsBadEntries) {
  GeneratorMatrix q(3);
  EXPECT_THROW(q.set_rate(2, 3, 1.0), std::invalid_argument);
  EXPECT_THROW(q.set_rate(3, 1, -1.0), std::invalid_argument);
}

TEST(TotalRate, Examples) {
  EXPECT_EQ(total_rate(CoagulationMeasure::kingman(1.0), 4, RateMethod::collision_prob_sum).value, 6.0);
  EXPECT_NEAR(total_rate(CoagulationMeasure::explicit_masses({{2, 1.0}}), 2, RateMethod::partition_sum).value, 0.5, 1e-15);
  const double v = total_rate(CoagulationMeasure::power_law(0.5), 1000, RateMethod::collision_prob_sum).value;
  EXPECT_NEAR(v / (std::sqrt(2 * M_PI) * 1000), 1.0, 0.15);
}

TEST(TotalRate, MethodsAgree) {
  for (const auto& f : {CoagulationMeasure::explicit_masses({{2, 1.0}, {3, 2.0}, {7, 0.3}}, 0.25),
                        CoagulationMeasure::explicit_masses({{1, 1.0}}), CoagulationMeasure::power_law(0.5, 5000)})
    for (int n = 2; n <= 20; ++n) {
      const double a = total_rate(f, n, RateMethod::partition_sum).value;
      const double b = total_rate(f, n, RateMethod::collision_prob_sum).value;
      EXPECT_NEAR(a, b, 1e-9 * b) << n;
    }
}

TEST(TotalRate, PartitionSumRefusesLargeN) {
  EXPECT_THROW(total_rate(CoagulationMeasure::kingman(), kPartitionSumMaxN + 1, RateMethod::partition_sum),
               std::invalid_argument);
}

TEST(TotalRate, PowerLawErrorBoundSmall) {
  const auto r = total_rate(CoagulationMeasure::power_law(0.5), 300, RateMethod::collision_prob_sum);
  EXPECT_LT(r.error_bound, 1e-6 * r.value);
}

TEST(TotalRate, PowerLawAgreesWithBruteForce) {
  // Brute force: direct sum to 10^7 plus integral tail of k^{-beta} n(n-1)/(2k).
  const double beta = 0.6;
  const int n = 30;
  long double s = 0;
  const std::int64_t K = 10'000'000;
  for (std::int64_t k = 1; k <= K; ++k) s += std::pow(static_cast<long double>(k), -beta) * collision_prob(k, n);
  const double c = n * (n - 1) / 2.0;
  s += c * std::pow(K + 0.5, -beta) / beta;
  const double got = total_rate(CoagulationMeasure::power_law(beta), n, RateMethod::collision_prob_sum).value;
  EXPECT_NEAR(got, static_cast<double>(s), 2e-6 * got);
}

TEST(TotalRate, AsymptoticFormula) {
  EXPECT_NEAR(total_rate_asymptotic(0.5, 1e4), std::sqrt(2 * M_PI) * 1e4, 1e-6);
  EXPECT_NEAR(total_rate_asymptotic(1.0, std::exp(10.0)), 20.0, 1e-12);
  EXPECT_NEAR(total_rate_limit_constant(0.5), std::sqrt(2 * M_PI), 1e-12);
  EXPECT_THROW(total_rate_asymptotic(1.5, 100), std::invalid_argument);
  EXPECT_THROW(total_rate_asymptotic(0.0, 100), std::invalid_argument);
  // exponent 2(1 - beta) -> 2 as beta -> 0
  const double e = std::log(total_rate_asymptotic(1e-3, 1e4) / total_rate_asymptotic(1e-3, 1e3)) / std::log(10.0);
  EXPECT_NEAR(e, 2.0, 0.01);
}

TEST(TotalRate, RatioApproachesOneMonotonically) {
  for (double beta : {0.3, 0.5, 0.8}) {
    double prev = INFINITY;
    for (double n : {1e2, 1e3, 1e4}) {
      const double v = total_rate(CoagulationMeasure::power_law(beta), static_cast<int>(n), RateMethod::collision_prob_sum).value;
      const double lr = std::abs(std::log(v / total_rate_asymptotic(beta, n)));
      EXPECT_LT(lr, prev) << beta << " " << n;
      prev = lr;
    }
  }
}

TEST(Generator, PowerLawTailAgreesWithOccupancySum) {
  // q_ij against a long direct sum of F(k) P(W^{k,i} = j).
  const double beta = 1.3;
  const int n = 6;
  const auto q = block_counting_generator(CoagulationMeasure::power_law(beta), n);
  std::vector<long double> s(n + 1, 0);
  const std::int64_t K = 400000;
  for (std::int64_t k = 1; k <= K; ++k) {
    const auto p = occupancy_pmf(k, n);
    const long double w = std::pow(static_cast<long double>(k), -beta);
    for (int j = 1; j < n && j <= static_cast<int>(p.size()); ++j) s[j] += w * p[j - 1];
  }
  // tail: only j = n-1 matters at leading order, P ~ C(n,2)/k
  s[n - 1] += n * (n - 1) / 2.0 * std::pow(K + 0.5, -beta) / beta;
  for (int j = 1; j < n; ++j) EXPECT_NEAR(q.rate(n, j), static_cast<double>(s[j]), 1e-6 * static_cast<double>(s[j]) + 1e-12);
}
