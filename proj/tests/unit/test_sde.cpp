#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "symco/sde.hpp"

using namespace symco;

namespace {

JumpDiffusionSpec spec_of(SdeModel m, double alpha, double x0, double horizon, double dt = 1e-3) {
  JumpDiffusionSpec s;
  s.model = std::move(m);
  s.alpha = alpha;
  s.x0 = x0;
  s.horizon = horizon;
  s.dt = dt;
  return s;
}

// Tavare's alternating series evaluated term by term in long double.
double tavare_direct(double sigma, int j) {
  long double s = 0;
  for (int k = j; k < j + 200; ++k) {
    const long double lt = -0.5L * k * (k - 1) * sigma + std::lgamma(static_cast<long double>(j + k - 1)) -
                           std::lgamma(static_cast<long double>(j)) - std::lgamma(static_cast<long double>(j + 1)) -
                           std::lgamma(static_cast<long double>(k - j + 1));
    const long double term = std::exp(lt) * (2 * k - 1) * ((k - j) % 2 ? -1 : 1);
    s += term;
  }
  return static_cast<double>(s);
}

}  // namespace

TEST(Sde, SingleSurvivorJumpIsBernoulli) {
  const int m = 40000;
  double ones = 0;
  for (int i = 0; i < m; ++i) {
    Rng rng = make_stream(1, i);
    const auto p = simulate_sde(spec_of(Sde1{DiscreteLaw::point(1), 1.0}, 0.5, 0.3, 20.0), rng);
    ASSERT_FALSE(p.jump_times.empty());
    const double after = p.path.value_at(p.jump_times.front());
    ASSERT_TRUE(after == 0.0 || after == 1.0);
    ones += after;
  }
  EXPECT_NEAR(ones / m, 0.3, 4.0 * std::sqrt(0.21 / m));
}

TEST(Sde, OneJumpVarianceForTwoSurvivors) {
  Rng rng = make_stream(2, 0);
  RunningStats s;
  const Sde1 m{DiscreteLaw::point(2), 1.0};
  for (int i = 0; i < 100000; ++i) s.add(sde1_jump(m, 0.5, rng));
  EXPECT_NEAR(s.mean(), 0.5, 4.0 * s.standard_error());
  // variance of a sample variance: (mu4 - sigma^4) / m with mu4 = 1/32 here
  EXPECT_NEAR(s.variance(), 0.125, 4.0 * std::sqrt((1.0 / 32 - 0.125 * 0.125) / 100000));
}

TEST(Sde, MartingaleForAllModels) {
  const std::vector<SdeModel> models{Sde1{DiscreteLaw({{2, 0.5}, {3, 0.5}}), 1.0},
                                     Sde2{DiscreteLaw::point(3), DiscreteLaw::point(2), 2.0},
                                     Sde3{PositiveLaw(PointMass{0.5}), 2.0}};
  for (std::size_t mi = 0; mi < models.size(); ++mi)
    for (double alpha : {0.5, 1.0}) {
      RunningStats mid, end;
      for (int i = 0; i < 8000; ++i) {
        Rng rng = make_stream(3 + mi, i * 2 + (alpha == 1.0));
        auto s = spec_of(models[mi], alpha, 0.35, 1.0, 2e-3);
        s.checkpoints = {0.5};
        const auto p = simulate_sde(s, rng);
        for (double v : p.path.values()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
        mid.add(p.path.value_at(0.5));
        end.add(p.path.final_value());
      }
      EXPECT_NEAR(mid.mean(), 0.35, 4.0 * mid.standard_error()) << mi << " " << alpha;
      EXPECT_NEAR(end.mean(), 0.35, 4.0 * end.standard_error()) << mi << " " << alpha;
    }
}

TEST(Sde, UnitDurationSde2MatchesSde1) {
  RunningStats a, b;
  for (int i = 0; i < 20000; ++i) {
    Rng r1 = make_stream(7, i), r2 = make_stream(8, i);
    a.add(std::pow(simulate_sde(spec_of(Sde1{DiscreteLaw::point(3), 1.5}, 1.0, 0.4, 0.5), r1).path.final_value(), 2));
    b.add(std::pow(
        simulate_sde(spec_of(Sde2{DiscreteLaw::point(3), DiscreteLaw::point(1), 1.5}, 1.0, 0.4, 0.5), r2).path.final_value(),
        2));
  }
  EXPECT_NEAR(a.mean(), b.mean(), 4.0 * std::hypot(a.standard_error(), b.standard_error()));
}

TEST(Sde, RejectsBadSpecs) {
  Rng rng = make_stream(9, 0);
  EXPECT_THROW(simulate_sde(spec_of(Sde1{}, 1.0, 0.5, 1.0, 0.0), rng), std::invalid_argument);
  EXPECT_THROW(simulate_sde(spec_of(Sde1{}, 1.0, 1.5, 1.0), rng), std::invalid_argument);
  EXPECT_THROW(simulate_sde(spec_of(Sde1{}, 1.0, -0.1, 1.0), rng), std::invalid_argument);
}

TEST(Sde, RecordsCheckpointsExactly) {
  Rng rng = make_stream(10, 0);
  auto s = spec_of(Sde1{DiscreteLaw::point(2), 1.0}, 1.0, 0.5, 1.0);
  s.dt_out = 0.25;
  const auto p = simulate_sde(s, rng);
  for (double c : {0.25, 0.5, 0.75})
    EXPECT_NE(std::find(p.path.times().begin(), p.path.times().end(), c), p.path.times().end());
}

TEST(Lineages, LongRunAbsorbs) {
  const auto p = kingman_lineages_pmf(50.0);
  EXPECT_GT(p[0], 1.0 - 1e-9);
}

TEST(Lineages, NormalizedAndMatchesDirectSeries) {
  for (double sigma : {0.05, 0.1, 0.5, 1.0, 3.0}) {
    const auto p = kingman_lineages_pmf(sigma);
    double s = 0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-10) << sigma;
  }
  for (double sigma : {1.0, 3.0})
    for (int j = 1; j <= 4; ++j) EXPECT_NEAR(kingman_lineages_pmf(sigma)[j - 1], tavare_direct(sigma, j), 1e-13);
}

TEST(Lineages, MatchesLargeSampleSimulation) {
  const auto pmf = kingman_lineages_pmf(0.5);
  Rng rng = make_stream(11, 0);
  const int m = 100000;
  // reaching 500 lineages from infinitely many takes 2/500 on average (sd below 1e-4)
  const int n0 = 500;
  std::vector<double> obs(pmf.size() + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const int j = kingman_lineages_from(n0, 0.5 - 2.0 / n0, rng);
    obs[std::min<std::size_t>(j - 1, pmf.size())] += 1;
  }
  std::vector<double> exp(pmf.size() + 1, 0.0);
  for (std::size_t j = 0; j < pmf.size(); ++j) exp[j] = pmf[j] * m;
  EXPECT_TRUE(oracle::chi_square_ok(oracle::chi_square(obs, exp)));
}

TEST(Lineages, MeanStrictlyDecreasing) {
  double prev = INFINITY;
  for (double sigma : {0.1, 0.2, 0.5, 1.0}) {
    const double m = kingman_lineages_mean(sigma);
    EXPECT_LT(m, prev);
    prev = m;
  }
  EXPECT_THROW(kingman_lineages_pmf(0.0), std::domain_error);
}

TEST(Dirichlet, Basics) {
  Rng rng = make_stream(12, 0);
  EXPECT_EQ(sorted_dirichlet(1, rng), std::vector<double>{1.0});
  for (int j : {2, 5, 40}) {
    const auto z = sorted_dirichlet(j, rng);
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      s += z[i];
      if (i) EXPECT_LE(z[i], z[i - 1]);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Dirichlet, TwoDimensionalMaxIsUniform) {
  Rng rng = make_stream(13, 0);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(sorted_dirichlet(2, rng)[0]);
  const double d = oracle::ks_statistic(xs, [](double v) { return std::clamp(2.0 * v - 1.0, 0.0, 1.0); });
  EXPECT_LT(d * std::sqrt(20000.0), oracle::kKs4Sigma);
}

TEST(Moments, ZeroTimeAndOrdering) {
  std::vector<SdePath> paths;
  for (int i = 0; i < 3000; ++i) {
    Rng rng = make_stream(14, i);
    paths.push_back(simulate_sde(spec_of(Sde1{DiscreteLaw::point(2), 1.0}, 1.0, 0.6, 1.0), rng));
  }
  const auto z = moment_estimate(paths, 3, 0.0);
  EXPECT_DOUBLE_EQ(z.mean, 0.216);
  EXPECT_EQ(z.standard_error, 0.0);
  const auto one = moment_estimate(paths, 1, 1.0);
  EXPECT_NEAR(one.mean, 0.6, 4.0 * one.standard_error);
  EXPECT_LE(moment_estimate(paths, 3, 1.0).mean, moment_estimate(paths, 2, 1.0).mean);
}
