#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssip/math_util.hpp"
#include "ssip/sim.hpp"
#include "support/test_stats.hpp"

using namespace ssip;

TEST_CASE("gaussian study generator: determinism and truth structure") {
  const auto a = simulate_gaussian_grid(42);
  const auto b = simulate_gaussian_grid(42);
  CHECK(a.truth.beta_true == b.truth.beta_true);
  CHECK((a.truth.gamma_true == b.truth.gamma_true).all());
  for (int i = 0; i < 9; ++i) {
    CHECK(a.regions[static_cast<std::size_t>(i)].X == b.regions[static_cast<std::size_t>(i)].X);
  }
  const auto c = simulate_gaussian_grid(43);
  CHECK(a.truth.beta_true != c.truth.beta_true);

  CHECK(a.graph.n_regions() == 9);
  for (const auto& r : a.regions) {
    CHECK(r.m() == 4);
    CHECK(r.p() == 3);
    CHECK((r.X.col(0).array() == 1.0).all());
  }
  // beta nonzero exactly where gamma says so (intercept always in)
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK((a.truth.beta_true(i, j + 1) != 0.0) == (a.truth.gamma_true(i, j) == 1));
    }
    // xi sorted ascending by region index
    if (i > 0) {
      CHECK(a.truth.xi(i, 0) >= a.truth.xi(i - 1, 0));
      CHECK(a.truth.xi(i, 1) >= a.truth.xi(i - 1, 1));
    }
  }
}

TEST_CASE("gaussian study: inclusion gradient and noise variance") {
  // lower-indexed regions include fewer covariates, on average over truths
  double num = 0.0;
  const int reps = 500;
  std::vector<double> idx, incl;
  for (int rep = 0; rep < reps; ++rep) {
    const auto sim = simulate_gaussian_grid(static_cast<std::uint64_t>(rep));
    for (int i = 0; i < 9; ++i) {
      idx.push_back(i);
      incl.push_back(sim.truth.gamma_true.row(i).sum());
    }
    (void)num;
  }
  CHECK(pearson(idx, incl) > 0.2);  // decisively positive rank relation

  // residual variance of the generated data approaches one
  double ss = 0.0;
  long count = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto sim = simulate_gaussian_grid(static_cast<std::uint64_t>(10000 + rep));
    for (int i = 0; i < 9; ++i) {
      const auto& r = sim.regions[static_cast<std::size_t>(i)];
      const Eigen::VectorXd resid = r.y - r.X * sim.truth.beta_true.row(i).transpose();
      ss += resid.squaredNorm();
      count += r.m();
    }
  }
  const double var = ss / static_cast<double>(count);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("capture study probability surfaces") {
  CHECK(crc_prob_l1(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(crc_prob_l4(0.0, 0.0) == doctest::Approx(1.0 / 16.0));
  CHECK(crc_prob_l2(0.2, 0.5, true) == doctest::Approx(3.0 / 16.0 * 0.125 + 1.0 / 16.0 + 0.5));
  CHECK(crc_prob_l2(0.5, 0.5, true) == doctest::Approx(3.0 / 16.0 * 0.125 + 1.0 / 16.0));  // x >= 0.4
  CHECK(crc_prob_l3(0.5, 0.2, true) == doctest::Approx(3.0 / 16.0 * 0.25 + 1.0 / 16.0 + 0.5));
  CHECK(crc_intensity(0.5, 0.5, 2000.0) == doctest::Approx(2000.0 * std::sqrt(2.0) / 2.0));
  CHECK(crc_intensity(0.0, 0.0, 2000.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("capture study: determinism, bookkeeping, list dependence") {
  const auto a = simulate_crc(7, 2000.0);
  const auto b = simulate_crc(7, 2000.0);
  CHECK(a.truth.locations == b.truth.locations);
  CHECK(a.table.total() == b.table.total());

  // unseen points are exactly the zero-pattern points
  long unseen = 0;
  for (std::size_t k = 0; k < a.truth.capture_patterns.size(); ++k) {
    if (a.truth.capture_patterns[k] == 0) ++unseen;
  }
  CHECK(static_cast<long>(a.truth.unseen_true.sum()) == unseen);
  CHECK(a.table.total() + unseen == static_cast<long>(a.truth.locations.size()));

  // left half: positive dependence of lists 1 and 2; right half: 1 and 3
  double l12[2][2] = {{0, 0}, {0, 0}};
  double l13[2][2] = {{0, 0}, {0, 0}};
  for (int rep = 0; rep < 20; ++rep) {
    const auto sim = simulate_crc(static_cast<std::uint64_t>(100 + rep), 2000.0);
    for (std::size_t k = 0; k < sim.truth.capture_patterns.size(); ++k) {
      const auto pat = sim.truth.capture_patterns[k];
      const double x = sim.truth.locations[k].first;
      const int on1 = (pat >> 3) & 1, on2 = (pat >> 2) & 1, on3 = (pat >> 1) & 1;
      if (x < 0.4) l12[on1][on2] += 1.0;
      if (x > 0.4) l13[on1][on3] += 1.0;
    }
  }
  const double or12 = l12[1][1] * l12[0][0] / (l12[1][0] * l12[0][1]);
  const double or13 = l13[1][1] * l13[0][0] / (l13[1][0] * l13[0][1]);
  INFO("odds ratios ", or12, " ", or13);
  CHECK(or12 > 1.0);
  CHECK(or13 > 1.0);
}

TEST_CASE("thinning reproduces the intensity surface") {
  // chi-square goodness of fit of cell counts against integrated lambda
  const int side = 5;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(side * side);
  // numeric cell integrals of lambda(s) on a fine grid
  const int fine = 200;
  const double c = 4000.0;
  for (int gx = 0; gx < fine; ++gx) {
    for (int gy = 0; gy < fine; ++gy) {
      const double x = (gx + 0.5) / fine;
      const double y = (gy + 0.5) / fine;
      const int cell = std::min(static_cast<int>(y * side), side - 1) * side +
                       std::min(static_cast<int>(x * side), side - 1);
      expected(cell) += crc_intensity(x, y, c) / (fine * fine);
    }
  }
  Eigen::VectorXd observed = Eigen::VectorXd::Zero(side * side);
  int reps = 0;
  long total = 0;
  while (total < 100000) {
    const auto sim = simulate_crc(static_cast<std::uint64_t>(500 + reps), c);
    for (int cell : sim.truth.cells) observed(cell) += 1.0;
    total += static_cast<long>(sim.truth.locations.size());
    ++reps;
  }
  const double scale = observed.sum() / expected.sum();
  double chisq = 0.0;
  for (int cell = 0; cell < side * side; ++cell) {
    const double e = expected(cell) * scale;
    chisq += (observed(cell) - e) * (observed(cell) - e) / e;
  }
  // 24 dof: P(chisq > 51.2) ~ 0.001
  INFO("chi-square ", chisq, " on 24 dof, n = ", total);
  CHECK(chisq < 51.18);
}

TEST_CASE("rho = 0 baseline is bit-identical to the engine at rho = 0") {
  const auto sim = simulate_gaussian_grid(11);
  Hyper hyper;
  GaussianConfig config;
  RunSettings run;
  run.iterations = 300;
  run.seed = 9;
  SsipConfig zero;
  zero.rho = 0.0;
  const auto direct = fit_gaussian_ssip(sim.regions, sim.graph, hyper, zero, config, run);
  const auto base = baseline_independent(sim.regions, sim.graph, hyper, config, run);
  CHECK(direct.chains[0].beta == base.chains[0].beta);
  CHECK(direct.chains[0].gamma == base.chains[0].gamma);
  CHECK(direct.chains[0].z == base.chains[0].z);
  CHECK(direct.chains[0].scale == base.chains[0].scale);
}

TEST_CASE("weak-coupling limit: rho to 0 approaches the independent baseline in distribution") {
  // a single-edge pair with rho nearly zero behaves like the rho = 0
  // engine: compare inclusion frequencies
  Rng rng(13);
  const auto graph = AdjacencyGraph::from_edges(2, {{0, 1}});
  std::vector<RegionData> regions(2);
  for (auto& r : regions) {
    r.X.resize(6, 2);
    r.y.resize(6);
    for (int k = 0; k < 6; ++k) {
      r.X(k, 0) = 1.0;
      r.X(k, 1) = rng.u01();
      r.y(k) = 1.0 + 2.0 * r.X(k, 1) + rng.normal();
    }
  }
  Hyper hyper;
  GaussianConfig config;
  RunSettings run;
  run.iterations = 6000;
  run.seed = 31;
  SsipConfig weak;
  weak.rho = 1e-4;
  const auto a = fit_gaussian_ssip(regions, graph, hyper, weak, config, run);
  const auto b = baseline_independent(regions, graph, hyper, config, run);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::fabs(a.inclusion_prob(i, 1) - b.inclusion_prob(i, 1)) < 0.05);
  }
}

TEST_CASE("exhaustive AIC selection") {
  Rng rng(17);
  Eigen::ArrayXi forced(3);
  forced << 1, 0, 0;

  // two unforced columns: four candidate models; the count is implicit in
  // correctness of the argmin over an enumerated lattice
  {
    RegionData r;
    const int m = 50;
    r.X.resize(m, 3);
    r.y.resize(m);
    for (int k = 0; k < m; ++k) {
      r.X(k, 0) = 1.0;
      r.X(k, 1) = rng.u01();
      r.X(k, 2) = rng.u01();
      r.y(k) = 0.5 + 10.0 * r.X(k, 1) + rng.normal();  // strong signal on column 1
    }
    const auto gamma = baseline_aic(r, forced);
    CHECK(gamma(0) == 1);
    CHECK(gamma(1) == 1);
  }

  // strong covariate selected in nearly every replication
  int strong_hits = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    Rng r2(static_cast<std::uint64_t>(300 + rep));
    RegionData r;
    const int m = 50;
    r.X.resize(m, 3);
    r.y.resize(m);
    for (int k = 0; k < m; ++k) {
      r.X(k, 0) = 1.0;
      r.X(k, 1) = r2.u01();
      r.X(k, 2) = r2.u01();
      r.y(k) = 0.5 + 10.0 * r.X(k, 1) + r2.normal();
    }
    if (baseline_aic(r, forced)(1) == 1) ++strong_hits;
  }
  CHECK(strong_hits >= 95);

  // pure noise: the forced-only model wins most of the time at m = 100
  int noise_only = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng r3(static_cast<std::uint64_t>(900 + rep));
    RegionData r;
    const int m = 100;
    r.X.resize(m, 3);
    r.y.resize(m);
    for (int k = 0; k < m; ++k) {
      r.X(k, 0) = 1.0;
      r.X(k, 1) = r3.u01();
      r.X(k, 2) = r3.u01();
      r.y(k) = r3.normal();
    }
    const auto gamma = baseline_aic(r, forced);
    if (gamma(1) == 0 && gamma(2) == 0) ++noise_only;
  }
  CHECK(noise_only >= 70);
}

TEST_CASE("AIC selection sharpens with sample size when the truth is in the lattice") {
  Eigen::ArrayXi forced(3);
  forced << 1, 0, 0;
  double freq[3];
  int mi = 0;
  for (int m : {8, 32, 128}) {
    int hits = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng(static_cast<std::uint64_t>(7000 + 131 * m + rep));
      RegionData r;
      r.X.resize(m, 3);
      r.y.resize(m);
      for (int k = 0; k < m; ++k) {
        r.X(k, 0) = 1.0;
        r.X(k, 1) = rng.u01();
        r.X(k, 2) = rng.u01();
        r.y(k) = 1.0 + 1.5 * r.X(k, 1) + rng.normal();  // truth: column 1 only
      }
      const auto gamma = baseline_aic(r, forced);
      if (gamma(1) == 1 && gamma(2) == 0) ++hits;
    }
    freq[mi++] = static_cast<double>(hits) / reps;
  }
  INFO("selection frequency over m: ", freq[0], " ", freq[1], " ", freq[2]);
  CHECK(freq[0] < freq[1]);
  CHECK(freq[1] < freq[2]);
}

TEST_CASE("coefficient MSE evaluator") {
  Eigen::MatrixXd truth(2, 2);
  truth << 1.0, 2.0, 3.0, 4.0;
  CHECK(evaluate_beta_mse(truth, truth) == doctest::Approx(0.0));
  Eigen::MatrixXd est = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd t2(2, 2);
  t2 << 3.0, 3.0, -3.0, 3.0;
  CHECK(evaluate_beta_mse(est, t2) == doctest::Approx(9.0));
  CHECK_THROWS_AS(evaluate_beta_mse(est, Eigen::MatrixXd::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("entropy of inclusion maps: spatial smoothing reduces noise") {
  // over a few seeds, the independent baseline's inclusion probabilities
  // sit closer to one half (higher binary entropy) than the smoothed fit
  double ssip_entropy = 0.0, indep_entropy = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    const auto sim = simulate_gaussian_grid(static_cast<std::uint64_t>(40 + s));
    Hyper hyper;
    GaussianConfig config;
    RunSettings run;
    run.iterations = 2500;
    run.seed = static_cast<std::uint64_t>(s);
    SsipConfig smooth;
    smooth.rho = 0.9;
    const auto a = fit_gaussian_ssip(sim.regions, sim.graph, hyper, smooth, config, run);
    const auto b = baseline_independent(sim.regions, sim.graph, hyper, config, run);
    auto entropy = [](double p) {
      p = std::clamp(p, 1e-12, 1.0 - 1e-12);
      return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
    };
    for (int i = 0; i < 9; ++i) {
      for (int j = 1; j < 3; ++j) {
        ssip_entropy += entropy(a.inclusion_prob(i, j));
        indep_entropy += entropy(b.inclusion_prob(i, j));
      }
    }
  }
  INFO("entropy ssip ", ssip_entropy, " indep ", indep_entropy);
  CHECK(ssip_entropy < indep_entropy);
}
