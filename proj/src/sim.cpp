#include "ssip/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssip/math_util.hpp"
#include "ssip/rng.hpp"

namespace ssip {

GaussianSim simulate_gaussian_grid(std::uint64_t seed, int obs_per_region, double noise_var) {
  if (obs_per_region < 1) throw std::invalid_argument("simulate_gaussian_grid: need observations");
  Rng rng = Rng::for_stream(seed, 0xa5c1ull);
  const int n = 9;
  const int p = 3;  // intercept + 2 covariates

  GaussianSimTruth truth;
  truth.seed = seed;
  truth.gamma_true = Eigen::ArrayXXi::Zero(n, 2);
  truth.beta_true = Eigen::MatrixXd::Zero(n, p);
  truth.xi.resize(n, 2);

  // inclusion gradients: sorted Beta(2,2) draws, lower-indexed regions get
  // the smaller probabilities, independently per covariate
  for (int j = 0; j < 2; ++j) {
    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) xi[static_cast<std::size_t>(i)] = rng.beta_rv(2.0, 2.0);
    std::sort(xi.begin(), xi.end());
    for (int i = 0; i < n; ++i) {
      truth.xi(i, j) = xi[static_cast<std::size_t>(i)];
      truth.gamma_true(i, j) = rng.bernoulli(xi[static_cast<std::size_t>(i)]) ? 1 : 0;
    }
  }
  for (int i = 0; i < n; ++i) {
    truth.beta_true(i, 0) = rng.normal();  // intercept, always present
    if (truth.gamma_true(i, 0)) truth.beta_true(i, 1) = 5.0 + 0.5 * rng.normal();
    if (truth.gamma_true(i, 1)) truth.beta_true(i, 2) = 3.0 + rng.normal();
  }

  const double noise_sd = std::sqrt(noise_var);
  std::vector<RegionData> regions(n);
  for (int i = 0; i < n; ++i) {
    auto& r = regions[static_cast<std::size_t>(i)];
    r.X.resize(obs_per_region, p);
    r.y.resize(obs_per_region);
    for (int row = 0; row < obs_per_region; ++row) {
      r.X(row, 0) = 1.0;
      r.X(row, 1) = rng.u01();
      r.X(row, 2) = rng.u01();
      r.y(row) = r.X.row(row).dot(truth.beta_true.row(i)) + noise_sd * rng.normal();
    }
  }
  return GaussianSim{std::move(regions), AdjacencyGraph::grid(3, 3), std::move(truth)};
}

double crc_intensity(double x, double y, double c) {
  const double dx = x - 0.5, dy = y - 0.5;
  return c * (std::sqrt(2.0) / 2.0 - std::sqrt(dx * dx + dy * dy));
}

double crc_prob_l1(double x, double y) { return 0.125 * std::pow(x + y, 3.0); }

double crc_prob_l2(double x, double y, bool on_l1) {
  (void)x;
  return 3.0 / 16.0 * y * y * y + 1.0 / 16.0 + (on_l1 && x < 0.4 ? 0.5 : 0.0);
}

double crc_prob_l3(double x, double y, bool on_l1) {
  (void)y;
  return 3.0 / 16.0 * x * x + 1.0 / 16.0 + (on_l1 && x > 0.4 ? 0.5 : 0.0);
}

double crc_prob_l4(double x, double y) {
  (void)y;
  return 3.0 / 16.0 * x * x + 1.0 / 16.0;
}

namespace {

void check_prob(double p) {
  if (p < 0.0 || p > 1.0) throw std::runtime_error("simulate_crc: capture probability outside [0,1]");
}

}  // namespace

CrcSim simulate_crc(std::uint64_t seed, double c, int grid_side) {
  if (c <= 0.0) throw std::invalid_argument("simulate_crc: intensity scale must be positive");
  if (grid_side < 2) throw std::invalid_argument("simulate_crc: grid side must be >= 2");
  Rng rng = Rng::for_stream(seed, 0xc7c2ull);

  CrcSimTruth truth;
  truth.seed = seed;
  truth.intensity_scale = c;
  truth.unseen_true = Eigen::VectorXd::Zero(grid_side * grid_side);

  // nonhomogeneous Poisson process by thinning against the peak intensity
  const double lambda_max = c * std::sqrt(2.0) / 2.0;
  const long n_candidates = rng.poisson(lambda_max);
  std::vector<CaptureHistory> histories;
  for (long k = 0; k < n_candidates; ++k) {
    const double x = rng.u01();
    const double y = rng.u01();
    if (rng.u01() * lambda_max >= crc_intensity(x, y, c)) continue;

    const double p1 = crc_prob_l1(x, y);
    check_prob(p1);
    const bool l1 = rng.bernoulli(p1);
    const double p2 = crc_prob_l2(x, y, l1);
    const double p3 = crc_prob_l3(x, y, l1);
    const double p4 = crc_prob_l4(x, y);
    check_prob(p2);
    check_prob(p3);
    check_prob(p4);
    const bool l2 = rng.bernoulli(p2);
    const bool l3 = rng.bernoulli(p3);
    const bool l4 = rng.bernoulli(p4);

    const std::uint32_t pattern = (l1 ? 8u : 0u) | (l2 ? 4u : 0u) | (l3 ? 2u : 0u) | (l4 ? 1u : 0u);
    const int col = std::min(static_cast<int>(x * grid_side), grid_side - 1);
    const int row = std::min(static_cast<int>(y * grid_side), grid_side - 1);
    const int cell = row * grid_side + col;

    truth.locations.emplace_back(x, y);
    truth.capture_patterns.push_back(pattern);
    truth.cells.push_back(cell);
    if (pattern == 0) {
      truth.unseen_true(cell) += 1.0;
    } else {
      histories.push_back(CaptureHistory{cell, 0, pattern});
    }
  }

  CaptureTable table = build_intersection_table(4, grid_side * grid_side, 1, histories);
  return CrcSim{std::move(table), AdjacencyGraph::grid(grid_side, grid_side), std::move(truth)};
}

PosteriorChain baseline_independent(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                    const Hyper& hyper, const GaussianConfig& config,
                                    const RunSettings& run) {
  SsipConfig ssip;
  ssip.rho = 0.0;
  ssip.rho_update = RhoUpdate::kOff;
  return fit_gaussian_ssip(regions, graph, hyper, ssip, config, run);
}

PosteriorChain baseline_independent_nb(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                                       const Hyper& hyper, const NbConfig& config, const RunSettings& run) {
  SsipConfig ssip;
  ssip.rho = 0.0;
  ssip.rho_update = RhoUpdate::kOff;
  return fit_nb_ssip(regions, graph, hyper, ssip, config, run);
}

namespace {

std::vector<int> unforced_indices(const Eigen::ArrayXi& forced) {
  std::vector<int> idx;
  for (int j = 0; j < forced.size(); ++j) {
    if (!forced(j)) idx.push_back(j);
  }
  return idx;
}

// subset masks ordered by (size, lexicographic on column indices) so that
// a strict < comparison implements the tie-break rule
std::vector<std::uint32_t> ordered_subsets(int u) {
  std::vector<std::uint32_t> masks(1u << u);
  std::iota(masks.begin(), masks.end(), 0u);
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return masks;
}

Eigen::ArrayXi gamma_from_mask(const Eigen::ArrayXi& forced, const std::vector<int>& unforced,
                               std::uint32_t mask) {
  Eigen::ArrayXi gamma = forced;
  for (std::size_t b = 0; b < unforced.size(); ++b) {
    if (mask & (1u << b)) gamma(unforced[b]) = 1;
  }
  return gamma;
}

}  // namespace

Eigen::ArrayXi baseline_aic(const RegionData& region, const Eigen::ArrayXi& forced) {
  if (forced.size() != region.p()) throw std::invalid_argument("baseline_aic: forced mask length");
  const std::vector<int> unforced = unforced_indices(forced);
  if (unforced.size() > 20) throw std::invalid_argument("baseline_aic: more than 20 unforced columns");
  const double m = static_cast<double>(region.m());

  double best_aic = std::numeric_limits<double>::infinity();
  Eigen::ArrayXi best_gamma = forced;
  for (std::uint32_t mask : ordered_subsets(static_cast<int>(unforced.size()))) {
    const Eigen::ArrayXi gamma = gamma_from_mask(forced, unforced, mask);
    std::vector<int> active;
    for (int j = 0; j < gamma.size(); ++j) {
      if (gamma(j)) active.push_back(j);
    }
    const int k = static_cast<int>(active.size());
    if (k >= region.m()) continue;  // saturated or worse; no residual dof
    double rss;
    if (k == 0) {
      rss = region.y.squaredNorm();
    } else {
      Eigen::MatrixXd xa(region.m(), k);
      for (int s = 0; s < k; ++s) xa.col(s) = region.X.col(active[static_cast<std::size_t>(s)]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
      if (qr.rank() < k) continue;  // rank-deficient fit skipped
      const Eigen::VectorXd coef = qr.solve(region.y);
      rss = (region.y - xa * coef).squaredNorm();
    }
    if (rss <= 0.0) continue;
    const double aic = m * std::log(rss / m) + 2.0 * (k + 1);
    if (aic < best_aic) {
      best_aic = aic;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

Eigen::VectorXd ls_refit(const RegionData& region, const Eigen::ArrayXi& gamma) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(region.p());
  std::vector<int> active;
  for (int j = 0; j < gamma.size(); ++j) {
    if (gamma(j)) active.push_back(j);
  }
  if (active.empty()) return beta;
  Eigen::MatrixXd xa(region.m(), active.size());
  for (std::size_t s = 0; s < active.size(); ++s) xa.col(static_cast<int>(s)) = region.X.col(active[s]);
  const Eigen::VectorXd coef = xa.colPivHouseholderQr().solve(region.y);
  for (std::size_t s = 0; s < active.size(); ++s) beta(active[s]) = coef(static_cast<int>(s));
  return beta;
}

NbMle nb_mle(const NbRegionData& region, const Eigen::ArrayXi& gamma, double h) {
  NbMle out;
  out.beta = Eigen::VectorXd::Zero(region.p());
  for (int j = 0; j < gamma.size(); ++j) {
    if (gamma(j)) out.active.push_back(j);
  }
  const int k = static_cast<int>(out.active.size());
  const int m = region.m();
  Eigen::MatrixXd xa(m, k);
  for (int s = 0; s < k; ++s) xa.col(s) = region.X.col(out.active[static_cast<std::size_t>(s)]);

  auto loglik = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd psi = xa * b;
    double ll = 0.0;
    for (int r = 0; r < m; ++r) {
      ll += region.y(r) * psi(r) - (region.y(r) + h) * log1pexp(psi(r));
    }
    return ll;
  };

  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  if (k == 0) {
    out.loglik = loglik(b);
    out.ok = true;
    return out;
  }
  double ll = loglik(b);
  for (int iter = 0; iter < 60; ++iter) {
    const Eigen::VectorXd psi = xa * b;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
    for (int r = 0; r < m; ++r) {
      const double s = sigmoid(psi(r));
      grad += (region.y(r) - (region.y(r) + h) * s) * xa.row(r).transpose();
      info += (region.y(r) + h) * s * (1.0 - s) * xa.row(r).transpose() * xa.row(r);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    Eigen::VectorXd step = ldlt.solve(grad);
    // halve until improvement; the log-likelihood is concave
    double scale = 1.0;
    Eigen::VectorXd b_new = b + step;
    double ll_new = loglik(b_new);
    int halvings = 0;
    while (!(ll_new >= ll) && halvings < 30) {
      scale *= 0.5;
      b_new = b + scale * step;
      ll_new = loglik(b_new);
      ++halvings;
    }
    const double delta = ll_new - ll;
    b = b_new;
    ll = ll_new;
    if (b.array().abs().maxCoeff() > 40.0) break;  // drifting to a boundary MLE
    if (delta < 1e-10 && iter > 0) break;
  }
  if (!b.allFinite()) return out;

  out.loglik = ll;
  out.ok = true;
  // observed information at the estimate, for Wald intervals
  const Eigen::VectorXd psi = xa * b;
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
  for (int r = 0; r < m; ++r) {
    const double s = sigmoid(psi(r));
    info += (region.y(r) + h) * s * (1.0 - s) * xa.row(r).transpose() * xa.row(r);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (lu.isInvertible()) {
    out.active_cov = lu.inverse();
  }
  for (int s = 0; s < k; ++s) out.beta(out.active[static_cast<std::size_t>(s)]) = b(s);
  return out;
}

Eigen::ArrayXi baseline_aic_nb(const NbRegionData& region, const Eigen::ArrayXi& forced, double h) {
  if (forced.size() != region.p()) throw std::invalid_argument("baseline_aic_nb: forced mask length");
  const std::vector<int> unforced = unforced_indices(forced);
  if (unforced.size() > 20) throw std::invalid_argument("baseline_aic_nb: more than 20 unforced columns");

  double best_aic = std::numeric_limits<double>::infinity();
  Eigen::ArrayXi best_gamma = forced;
  for (std::uint32_t mask : ordered_subsets(static_cast<int>(unforced.size()))) {
    const Eigen::ArrayXi gamma = gamma_from_mask(forced, unforced, mask);
    const NbMle fit = nb_mle(region, gamma, h);
    if (!fit.ok) continue;
    const int k = static_cast<int>(fit.active.size());
    const double aic = -2.0 * fit.loglik + 2.0 * k;
    if (aic < best_aic) {
      best_aic = aic;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

AicUnseen aic_unseen_estimate(const NbRegionData& region, const CrcDesign& design, double h) {
  const Eigen::ArrayXi gamma = baseline_aic_nb(region, design.forced, h);
  const NbMle fit = nb_mle(region, gamma, h);
  AicUnseen out;
  int intercept_col = -1;
  for (std::size_t c = 0; c < design.column_members.size(); ++c) {
    if (design.column_members[c].empty()) intercept_col = static_cast<int>(c);
  }
  const double psi0 = intercept_col >= 0 ? fit.beta(intercept_col) : 0.0;
  out.point = h * std::exp(psi0);
  // Wald interval on the log scale via the intercept's sampling variance
  double var = std::numeric_limits<double>::infinity();
  if (fit.ok && fit.active_cov.size() > 0 && intercept_col >= 0) {
    for (std::size_t s = 0; s < fit.active.size(); ++s) {
      if (fit.active[s] == intercept_col) {
        var = fit.active_cov(static_cast<int>(s), static_cast<int>(s));
        break;
      }
    }
  }
  if (!std::isfinite(var) || var <= 0.0) {
    out.lo95 = 0.0;
    out.hi95 = std::numeric_limits<double>::infinity();
    out.infinite = true;
    return out;
  }
  const double se = std::sqrt(var);
  out.lo95 = h * std::exp(psi0 - 1.959963984540054 * se);
  out.hi95 = h * std::exp(psi0 + 1.959963984540054 * se);
  if (!std::isfinite(out.hi95)) out.infinite = true;
  return out;
}

double evaluate_beta_mse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("evaluate_beta_mse: shape mismatch");
  }
  return (estimate - truth).array().square().mean();
}

Eigen::MatrixXd posterior_mean_beta(const PosteriorChain& chain) {
  Eigen::MatrixXd est(chain.n_regions, chain.p);
  for (int i = 0; i < chain.n_regions; ++i) {
    for (int j = 0; j < chain.p; ++j) est(i, j) = chain.beta_mean(i, j);
  }
  return est;
}

GaussianReplication run_gaussian_replication(std::uint64_t seed, long iterations, double rho) {
  const GaussianSim sim = simulate_gaussian_grid(seed);
  Hyper hyper;
  GaussianConfig config;
  RunSettings run;
  run.iterations = iterations;
  run.seed = seed;

  SsipConfig ssip;
  ssip.rho = rho;
  const PosteriorChain ssip_chain = fit_gaussian_ssip(sim.regions, sim.graph, hyper, ssip, config, run);
  const PosteriorChain indep_chain = baseline_independent(sim.regions, sim.graph, hyper, config, run);

  GaussianReplication rep;
  rep.mse_ssip = evaluate_beta_mse(posterior_mean_beta(ssip_chain), sim.truth.beta_true);
  rep.mse_indep = evaluate_beta_mse(posterior_mean_beta(indep_chain), sim.truth.beta_true);

  Eigen::MatrixXd aic_beta(9, 3);
  const Eigen::ArrayXi forced = forced_columns(config, 3);
  for (int i = 0; i < 9; ++i) {
    const auto& region = sim.regions[static_cast<std::size_t>(i)];
    const Eigen::ArrayXi gamma = baseline_aic(region, forced);
    aic_beta.row(i) = ls_refit(region, gamma).transpose();
  }
  rep.mse_aic = evaluate_beta_mse(aic_beta, sim.truth.beta_true);
  return rep;
}

CrcReplication run_crc_replication(std::uint64_t seed, double c, long iterations, int max_order,
                                   double rho) {
  const CrcSim sim = simulate_crc(seed, c);
  const CrcDesign design = build_design(4, max_order);
  const std::vector<NbRegionData> regions = crc_region_data(sim.table, design);

  Hyper hyper;
  SsipConfig ssip;
  ssip.rho = rho;
  NbConfig nb;
  nb.car_intercept = true;
  RunSettings run;
  run.iterations = iterations;
  run.seed = seed;

  const PosteriorChain chain = fit_nb_ssip(regions, sim.graph, hyper, ssip, nb, run);

  CrcReplication rep;
  const int n = sim.graph.n_regions();
  std::vector<UnseenEstimate> ests;
  std::vector<double> truth;
  for (int i = 0; i < n; ++i) {
    CrcCellRow row;
    row.region = i;
    row.truth = sim.truth.unseen_true(i);
    row.ssip = estimate_unseen(chain, design, i, 0);
    row.ssip.sparse = sim.table.stratum_total(i, 0) == 0;
    row.sparse = row.ssip.sparse;
    row.aic = aic_unseen_estimate(regions[static_cast<std::size_t>(i)], design, nb.h);
    rep.cells.push_back(row);
    ests.push_back(row.ssip);
    truth.push_back(row.truth);
    if (!std::isfinite(row.ssip.hi95)) ++rep.ssip_infinite_intervals;
    if (row.aic.infinite) ++rep.aic_infinite_intervals;
  }
  rep.ssip_eval = evaluate_crc(ests, truth);

  double sq = 0.0;
  long covered = 0;
  bool finite_rmse = true;
  for (const auto& row : rep.cells) {
    if (!std::isfinite(row.aic.point)) finite_rmse = false;
    sq += (row.aic.point - row.truth) * (row.aic.point - row.truth);
    if (row.truth >= row.aic.lo95 && row.truth <= row.aic.hi95) ++covered;
  }
  rep.aic_rmse = finite_rmse ? std::sqrt(sq / static_cast<double>(rep.cells.size()))
                             : std::numeric_limits<double>::infinity();
  rep.aic_coverage = static_cast<double>(covered) / static_cast<double>(rep.cells.size());
  return rep;
}

}  // namespace ssip
