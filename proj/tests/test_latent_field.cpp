#include <doctest.h>

#include <cmath>
#include <vector>

#include "ssip/latent_field.hpp"
#include "ssip/math_util.hpp"
#include "ssip/regression.hpp"
#include "ssip/rng.hpp"
#include "support/test_stats.hpp"

using namespace ssip;

TEST_CASE("conditional inclusion probability") {
  const auto g = AdjacencyGraph::grid(3, 3);
  auto field = LatentField::zeros(9, 1);

  // rho = 0, or zero neighbor sum: probability one half
  CHECK(conditional_inclusion_prob(field, g, 4, 0, 0.0) == doctest::Approx(0.5));
  CHECK(conditional_inclusion_prob(field, g, 4, 0, 0.9) == doctest::Approx(0.5));

  // center of the grid has n_i = 4; neighbor sum 2 with rho 1 gives Phi(1)
  field.z(1, 0) = 2.0;
  CHECK(conditional_inclusion_prob(field, g, 4, 0, 1.0) == doctest::Approx(0.841344746).epsilon(1e-6));

  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    field.z(1, 0) = 4.0 * (rng.u01() - 0.5);
    const double w = conditional_inclusion_prob(field, g, 4, 0, rng.u01());
    CHECK(w > 0.0);
    CHECK(w < 1.0);
  }
}

TEST_CASE("inclusion probability equals the positive-mass of the Z conditional") {
  // Phi(rho * S / sqrt(n)) == 1 - Phi_{mean = rho S / n, var = 1/n}(0)
  Rng rng(17);
  for (int k = 0; k < 500; ++k) {
    const double s = 8.0 * (rng.u01() - 0.5);
    const double n_i = 1.0 + static_cast<double>(rng.next_u64() % 8);
    const double rho = rng.u01();
    const double lhs = norm_cdf(rho * s / std::sqrt(n_i));
    const double mean = rho * s / n_i;
    const double sd = 1.0 / std::sqrt(n_i);
    const double rhs = 1.0 - norm_cdf((0.0 - mean) / sd);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("sample_z_given_gamma obeys the truncation region") {
  const auto g = AdjacencyGraph::grid(2, 2);
  auto field = LatentField::zeros(4, 2);
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const int i = static_cast<int>(rng.next_u64() % 4);
    const int j = static_cast<int>(rng.next_u64() % 2);
    field.gamma(i, j) = rng.bernoulli(0.5) ? 1 : 0;
    const double draw = sample_z_given_gamma(field, g, i, j, 0.9, rng);
    CHECK(field.z(i, j) == draw);
    if (field.gamma(i, j)) {
      CHECK(draw > 0.0);
    } else {
      CHECK(draw <= 0.0);
    }
  }

  // conditional mean deep in the rejected tail still terminates
  auto path = LatentField::zeros(2, 1);
  const auto g2 = AdjacencyGraph::from_edges(2, {{0, 1}});
  path.z(1, 0) = 6.0;
  path.gamma(0, 0) = 0;
  for (int k = 0; k < 200; ++k) {
    const double d = sample_z_given_gamma(path, g2, 0, 0, 1.0, rng);
    CHECK(d <= 0.0);
    CHECK(std::isfinite(d));
    path.z(1, 0) = 6.0;  // keep the neighbor pinned
  }
}

TEST_CASE("half-normal conditional at rho=0, n_i=1") {
  const auto g = AdjacencyGraph::from_edges(2, {{0, 1}});
  auto field = LatentField::zeros(2, 1);
  field.gamma(0, 0) = 0;
  Rng rng(8);
  const int n = 100000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += sample_z_given_gamma(field, g, 0, 0, 0.0, rng);
  const double se = std::sqrt(1.0 - 2.0 / M_PI) / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(s / n + 0.7978845608) < 3.0 * se);
}

TEST_CASE("prior field: diagonal case and marginal inclusion one half") {
  const auto g = AdjacencyGraph::grid(3, 3);
  Rng rng(13);

  // rho = 0: Z_ij ~ N(0, 1/n_i) independently
  const int reps = 20000;
  std::vector<double> corner, center;
  for (int r = 0; r < reps; ++r) {
    const auto f = sample_prior_field(g, 0.0, 1, rng);
    corner.push_back(f.z(0, 0));
    center.push_back(f.z(4, 0));
  }
  const double var_corner = test_stats::sd_of(corner) * test_stats::sd_of(corner);
  const double var_center = test_stats::sd_of(center) * test_stats::sd_of(center);
  // var of sample variance ~ 2 var^2 / n
  CHECK(std::fabs(var_corner - 0.5) < 3.0 * std::sqrt(2.0 * 0.25 / reps));
  CHECK(std::fabs(var_center - 0.25) < 3.0 * std::sqrt(2.0 * 0.0625 / reps));

  // rho = 0.9: every cell keeps marginal inclusion probability 1/2
  long hits[9] = {0};
  const int reps2 = 100000;
  for (int r = 0; r < reps2; ++r) {
    const auto f = sample_prior_field(g, 0.9, 1, rng);
    for (int i = 0; i < 9; ++i) hits[i] += f.gamma(i, 0);
  }
  for (int i = 0; i < 9; ++i) {
    const double freq = static_cast<double>(hits[i]) / reps2;
    CHECK(std::fabs(freq - 0.5) < 0.01);
  }

  CHECK_THROWS_AS(sample_prior_field(g, 1.0, 1, rng), std::invalid_argument);
}

TEST_CASE("prior field honors forced entries") {
  const auto g = AdjacencyGraph::grid(2, 2);
  Eigen::ArrayXXi forced = Eigen::ArrayXXi::Zero(4, 2);
  forced.col(0) = 1;
  Rng rng(6);
  for (int r = 0; r < 200; ++r) {
    const auto f = sample_prior_field(g, 0.8, 2, rng, &forced);
    CHECK(f.consistent());
    for (int i = 0; i < 4; ++i) {
      CHECK(f.gamma(i, 0) == 1);
      CHECK(f.z(i, 0) > 0.0);
    }
  }
}

TEST_CASE("rho = 0 collapse: gamma entries decorrelate") {
  const auto g = AdjacencyGraph::grid(3, 3);
  Rng rng(23);
  const int reps = 20000;
  std::vector<double> a(reps), b(reps), c(reps);
  for (int r = 0; r < reps; ++r) {
    const auto f = sample_prior_field(g, 0.0, 2, rng);
    a[static_cast<std::size_t>(r)] = f.gamma(4, 0);
    b[static_cast<std::size_t>(r)] = f.gamma(5, 0);  // neighbor pair, same column
    c[static_cast<std::size_t>(r)] = f.gamma(4, 1);  // same region, other column
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(reps));
  CHECK(std::fabs(pearson(a, b)) < 3.0 * se);
  CHECK(std::fabs(pearson(a, c)) < 3.0 * se);
}

TEST_CASE("Gibbs sweeps preserve the prior (successive vs marginal conditionals)") {
  const auto g = AdjacencyGraph::grid(3, 3);
  const double rho = 0.9;
  const int p = 2;
  Rng rng(29);

  // marginal-conditional: iid joint prior draws
  const int n_iid = 20000;
  std::vector<double> iid_z, iid_z2, iid_g;
  for (int r = 0; r < n_iid; ++r) {
    const auto f = sample_prior_field(g, rho, p, rng);
    iid_z.push_back(f.z.mean());
    iid_z2.push_back(f.z.array().square().mean());
    iid_g.push_back(f.gamma.cast<double>().mean());
  }

  // successive-conditional: the prior-only Gibbs kernel
  auto field = sample_prior_field(g, rho, p, rng);
  const int n_sweep = 20000;
  std::vector<double> chain_z, chain_z2, chain_g;
  std::vector<WorkingRegion> no_regions;
  Eigen::VectorXd mu, tau2;
  for (int s = 0; s < n_sweep; ++s) {
    update_gamma_z(field, g, no_regions, mu, tau2, rho, /*prior_only=*/true, rng);
    CHECK(field.consistent());
    chain_z.push_back(field.z.mean());
    chain_z2.push_back(field.z.array().square().mean());
    chain_g.push_back(field.gamma.cast<double>().mean());
  }

  CHECK(test_stats::means_agree(chain_z, iid_z));
  CHECK(test_stats::means_agree(chain_z2, iid_z2));
  CHECK(test_stats::means_agree(chain_g, iid_g));
}

TEST_CASE("rho MH move: reflection, validation, recovery") {
  SsipConfig cfg;
  cfg.rho_update = RhoUpdate::kMetropolis;
  cfg.rho_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg.rho_step = 0.05;
  cfg.rho = 0.2;
  const auto g = AdjacencyGraph::grid(10, 10);
  Rng rng(31);
  const auto field = sample_prior_field(g, 0.8, 10, rng);

  // proposals always land back inside [0, 1 - eps]
  double rho = 0.2;
  for (int s = 0; s < 50; ++s) {
    rho = update_rho_mh(field, g, cfg, rho, rng);
    CHECK(rho >= 0.0);
    CHECK(rho <= 1.0 - SsipConfig::kRhoEps);
  }

  // posterior concentrates near the generating value 0.8
  double sum = 0.0;
  int count = 0;
  rho = 0.2;
  for (int s = 0; s < 1500; ++s) {
    rho = update_rho_mh(field, g, cfg, rho, rng);
    if (s >= 300) {
      sum += rho;
      ++count;
    }
  }
  const double post_mean = sum / count;
  INFO("posterior mean of rho: ", post_mean);
  CHECK(std::fabs(post_mean - 0.8) < 0.15);
}
