#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "ssip/polya_gamma.hpp"
#include "ssip/rng.hpp"
#include "support/test_stats.hpp"

using namespace ssip;

TEST_CASE("pg_mean closed forms") {
  CHECK(pg_mean(1.0, 0.0) == doctest::Approx(0.25));
  CHECK(pg_mean(4.0, 0.0) == doctest::Approx(1.0));
  // (2/6) tanh(1.5)
  CHECK(pg_mean(2.0, 3.0) == doctest::Approx(2.0 / 6.0 * std::tanh(1.5)).epsilon(1e-12));
  CHECK(pg_mean(2.0, 3.0) == doctest::Approx(0.3017161).epsilon(1e-5));
  // even in c
  CHECK(pg_mean(3.0, -2.0) == doctest::Approx(pg_mean(3.0, 2.0)));
}

TEST_CASE("pg_var limits") {
  CHECK(pg_var(1.0, 0.0) == doctest::Approx(1.0 / 24.0));
  CHECK(pg_var(2.0, 1e-6) == doctest::Approx(2.0 / 24.0).epsilon(1e-6));
  // continuity across the series/closed-form switch
  CHECK(pg_var(5.0, 0.00999) == doctest::Approx(pg_var(5.0, 0.01001)).epsilon(1e-4));
}

TEST_CASE("empirical means match (b/2c)tanh(c/2) on a parameter grid") {
  const double bs[] = {1.0, 2.0, 5.0, 17.0};
  const double cs[] = {0.1, 1.0, 4.0};
  const int n = 100000;
  Rng rng(31);
  for (double b : bs) {
    for (double c : cs) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += sample_pg(b, c, rng);
      const double m = s / n;
      const double se = std::sqrt(pg_var(b, c) / n);
      INFO("b=", b, " c=", c, " mean=", m, " expect=", pg_mean(b, c));
      CHECK(std::fabs(m - pg_mean(b, c)) < 3.0 * se);
    }
  }
}

TEST_CASE("c = 0 mean is b/4") {
  Rng rng(77);
  const int n = 100000;
  for (double b : {1.0, 3.0}) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += sample_pg(b, 0.0, rng);
    const double se = std::sqrt(pg_var(b, 0.0) / n);
    CHECK(std::fabs(s / n - 0.25 * b) < 3.0 * se);
  }
}

TEST_CASE("draws at (b, c) and (b, -c) share one distribution") {
  Rng rng(99);
  const int n = 10000;
  std::vector<double> pos(n), neg(n);
  for (int k = 0; k < n; ++k) pos[static_cast<std::size_t>(k)] = sample_pg(2.0, 1.7, rng);
  for (int k = 0; k < n; ++k) neg[static_cast<std::size_t>(k)] = sample_pg(2.0, -1.7, rng);
  CHECK(test_stats::ks2_pvalue(pos, neg) > 0.001);
}

TEST_CASE("additivity: PG(b1,c) + PG(b2,c) matches PG(b1+b2,c) moments") {
  Rng rng(123);
  const int n = 60000;
  const double c = 0.8;
  const double b1 = 0.6, b2 = 1.9;  // exercises the fractional path
  std::vector<double> sum(n), direct(n);
  for (int k = 0; k < n; ++k) {
    sum[static_cast<std::size_t>(k)] = sample_pg(b1, c, rng) + sample_pg(b2, c, rng);
    direct[static_cast<std::size_t>(k)] = sample_pg(b1 + b2, c, rng);
  }
  const double se_mean = std::sqrt(2.0 * pg_var(b1 + b2, c) / n);
  CHECK(std::fabs(test_stats::mean_of(sum) - test_stats::mean_of(direct)) < 3.0 * se_mean);
  const double sd_a = test_stats::sd_of(sum), sd_b = test_stats::sd_of(direct);
  // var of the sample variance ~ 2 sigma^4 / n for near-normal tails; stay loose
  CHECK(std::fabs(sd_a * sd_a - sd_b * sd_b) < 6.0 * sd_a * sd_a / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("fractional b mean") {
  Rng rng(321);
  const int n = 100000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += sample_pg(0.5, 1.0, rng);
  const double se = std::sqrt(pg_var(0.5, 1.0) / n);
  // 200-term truncation bias is far below this tolerance
  CHECK(std::fabs(s / n - pg_mean(0.5, 1.0)) < 3.0 * se + 2e-4);
}

TEST_CASE("extreme parameters stay positive and finite") {
  Rng rng(11);
  for (double b : {0.3, 1.0, 42.0, 171.0, 10000.0}) {
    for (double c : {-50.0, -4.0, 0.0, 4.0, 50.0}) {
      for (int k = 0; k < 50; ++k) {
        const double x = sample_pg(b, c, rng);
        CHECK(x > 0.0);
        CHECK(std::isfinite(x));
      }
    }
  }
  CHECK_THROWS_AS(sample_pg(0.0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("large-b normal approximation matches exact-path moments") {
  // same b evaluated through both paths by shifting the crossover
  Rng rng(2024);
  PgConfig exact_cfg;
  exact_cfg.normal_approx_threshold = 1e9;
  PgConfig approx_cfg;
  approx_cfg.normal_approx_threshold = 10.0;
  const double b = 180.0, c = 1.3;
  const int n = 20000;
  std::vector<double> exact(n), approx(n);
  for (int k = 0; k < n; ++k) exact[static_cast<std::size_t>(k)] = sample_pg(b, c, rng, exact_cfg);
  for (int k = 0; k < n; ++k) approx[static_cast<std::size_t>(k)] = sample_pg(b, c, rng, approx_cfg);
  const double se = std::sqrt(2.0 * pg_var(b, c) / n);
  CHECK(std::fabs(test_stats::mean_of(exact) - test_stats::mean_of(approx)) < 3.0 * se);
}

TEST_CASE("throughput benchmark records draws per second") {
  Rng rng(5);
  const int n = 200000;
  const auto t0 = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (int k = 0; k < n; ++k) sink += sample_pg(1.0, 1.0, rng);
  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  MESSAGE("PG(1,1) draws/second: ", static_cast<long>(n / secs), " (sink ", sink > 0, ")");
  CHECK(sink > 0.0);  // no hard bound, just recorded
}
