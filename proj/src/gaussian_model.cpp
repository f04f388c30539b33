#include "ssip/gaussian_model.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ssip/math_util.hpp"
#include "ssip/truncated_normal.hpp"

namespace ssip {

namespace {

void check_regions(const std::vector<RegionData>& regions, const AdjacencyGraph& graph) {
  if (static_cast<int>(regions.size()) != graph.n_regions()) {
    throw std::invalid_argument("fit: number of regions must match the graph");
  }
  if (regions.empty()) throw std::invalid_argument("fit: no regions");
  const int p = regions.front().p();
  if (p < 1) throw std::invalid_argument("fit: need at least one column");
  for (const auto& r : regions) {
    if (r.p() != p) throw std::invalid_argument("fit: all regions must share the column count");
    if (r.m() < 1) throw std::invalid_argument("fit: every region needs at least one observation");
    if (r.X.rows() != r.y.size()) throw std::invalid_argument("fit: X/y row mismatch");
  }
}

std::vector<WorkingRegion> make_working(const std::vector<RegionData>& regions,
                                        const Eigen::VectorXd& sigma2) {
  std::vector<WorkingRegion> work(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    work[i].X = regions[i].X;
    work[i].y = regions[i].y;
    work[i].row_var = Eigen::VectorXd::Constant(regions[i].m(), sigma2(static_cast<int>(i)));
  }
  return work;
}

}  // namespace

Eigen::ArrayXi forced_columns(const GaussianConfig& config, int p) {
  if (config.forced_cols.size() > 0) {
    if (config.forced_cols.size() != p) {
      throw std::invalid_argument("forced_cols mask must have length p");
    }
    return config.forced_cols;
  }
  Eigen::ArrayXi mask = Eigen::ArrayXi::Zero(p);
  if (config.force_intercept) mask(0) = 1;
  return mask;
}

double log_marginal_likelihood(const RegionData& region, const Eigen::ArrayXi& gamma_row,
                               const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2, double sigma2_i) {
  if (sigma2_i <= 0.0) throw std::invalid_argument("log_marginal_likelihood: sigma2 must be positive");
  WorkingRegion w;
  w.X = region.X;
  w.y = region.y;
  w.row_var = Eigen::VectorXd::Constant(region.m(), sigma2_i);
  return log_marginal_gaussian(w, gamma_row, mu, tau2);
}

void update_beta(GaussianState& state, const std::vector<RegionData>& regions, bool prior_only, Rng& rng) {
  const int n = state.field.n_regions();
  for (int i = 0; i < n; ++i) {
    WorkingRegion w;
    if (!prior_only) {
      w.X = regions[static_cast<std::size_t>(i)].X;
      w.y = regions[static_cast<std::size_t>(i)].y;
      w.row_var = Eigen::VectorXd::Constant(w.m(), state.sigma2(i));
    }
    state.beta.row(i) =
        draw_beta_row(w, state.field.gamma.row(i), state.mu, state.tau2, prior_only, rng).transpose();
  }
}

void update_sigma2(GaussianState& state, const std::vector<RegionData>& regions, const Hyper& hyper,
                   bool pool_sigma2, bool prior_only, Rng& rng) {
  const int n = state.field.n_regions();
  if (prior_only) {
    for (int i = 0; i < n; ++i) state.sigma2(i) = 1.0 / rng.gamma_rv(hyper.a_sigma, hyper.b_sigma);
    if (pool_sigma2) state.sigma2.setConstant(state.sigma2(0));
    return;
  }
  if (pool_sigma2) {
    double m_total = 0.0, rss_total = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& r = regions[static_cast<std::size_t>(i)];
      const Eigen::VectorXd resid = r.y - r.X * state.beta.row(i).transpose();
      m_total += r.m();
      rss_total += resid.squaredNorm();
    }
    const double prec = rng.gamma_rv(hyper.a_sigma + 0.5 * m_total, hyper.b_sigma + 0.5 * rss_total);
    state.sigma2.setConstant(1.0 / prec);
    return;
  }
  for (int i = 0; i < n; ++i) {
    const auto& r = regions[static_cast<std::size_t>(i)];
    const Eigen::VectorXd resid = r.y - r.X * state.beta.row(i).transpose();
    const double prec =
        rng.gamma_rv(hyper.a_sigma + 0.5 * r.m(), hyper.b_sigma + 0.5 * resid.squaredNorm());
    state.sigma2(i) = 1.0 / prec;
  }
}

GaussianState init_gaussian_state(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                  const Hyper& hyper, const SsipConfig& ssip, const GaussianConfig& config,
                                  Rng& rng) {
  const int n = graph.n_regions();
  const int p = regions.empty() ? 0 : regions.front().p();
  GaussianState state;
  state.rho = ssip.rho;
  state.field = LatentField::zeros(n, p);
  const Eigen::ArrayXi cols = forced_columns(config, p);
  for (int j = 0; j < p; ++j) {
    state.field.forced.col(j).setConstant(cols(j));
  }
  // start from the independence prior: Z_ij ~ N(0, 1/n_i) thresholded
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(graph.degree(i)));
      double zdraw = sd * rng.normal();
      if (state.field.forced(i, j)) zdraw = rtnorm_sign(0.0, sd, true, rng);
      state.field.z(i, j) = zdraw;
      state.field.gamma(i, j) = zdraw > 0.0 ? 1 : 0;
    }
  }
  state.mu = Eigen::VectorXd::Constant(p, hyper.mu0);
  state.tau2 = Eigen::VectorXd::Ones(p);
  state.sigma2 = Eigen::VectorXd::Ones(n);
  state.beta = Eigen::MatrixXd::Zero(n, p);
  for (int i = 0; i < n; ++i) {
    WorkingRegion w;
    state.beta.row(i) =
        draw_beta_row(w, state.field.gamma.row(i), state.mu, state.tau2, /*prior_only=*/true, rng)
            .transpose();
  }
  return state;
}

void gaussian_sweep(GaussianState& state, const std::vector<RegionData>& regions,
                    const AdjacencyGraph& graph, const Hyper& hyper, const SsipConfig& ssip,
                    const GaussianConfig& config, bool prior_only, Rng& rng) {
  std::vector<WorkingRegion> regions_work;
  if (!prior_only) {
    regions_work = make_working(regions, state.sigma2);
  }
  update_gamma_z(state.field, graph, regions_work, state.mu, state.tau2, state.rho, prior_only, rng);
  update_beta(state, regions, prior_only, rng);
  update_sigma2(state, regions, hyper, config.pool_sigma2, prior_only, rng);
  update_mu_tau2(state.beta, state.field.gamma, hyper, state.mu, state.tau2, rng);
  if (ssip.rho_update == RhoUpdate::kMetropolis) {
    state.rho = update_rho_mh(state.field, graph, ssip, state.rho, rng);
  }
}

PosteriorChain fit_gaussian_ssip(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                 const Hyper& hyper, const SsipConfig& ssip, const GaussianConfig& config,
                                 const RunSettings& run) {
  hyper.validate();
  ssip.validate();
  run.validate();
  check_regions(regions, graph);
  const int n = graph.n_regions();
  const int p = regions.front().p();

  PosteriorChain out;
  out.engine = PosteriorChain::Engine::kGaussian;
  out.n_regions = n;
  out.p = p;
  out.hyper = hyper;
  out.ssip = ssip;
  out.run = run;

  const auto t0 = std::chrono::steady_clock::now();
  for (int chain = 0; chain < run.chains; ++chain) {
    Rng rng = Rng::for_stream(run.seed, static_cast<std::uint64_t>(chain));
    GaussianState state = init_gaussian_state(regions, graph, hyper, ssip, config, rng);

    ChainDraws draws;
    draws.n = n;
    draws.p = p;
    draws.T = 1;
    draws.reserve(run.draws_per_chain());

    const long burn = run.effective_burn_in();
    for (long it = 0; it < run.iterations; ++it) {
      try {
        gaussian_sweep(state, regions, graph, hyper, ssip, config, run.prior_only, rng);
      } catch (const std::exception& e) {
        throw std::runtime_error("gaussian sweep failed at iteration " + std::to_string(it) + ": " +
                                 e.what());
      }
      if (it >= burn && (it - burn) % run.thin == 0) {
        draws.beta.insert(draws.beta.end(), state.beta.data(), state.beta.data() + n * p);
        draws.z.insert(draws.z.end(), state.field.z.data(), state.field.z.data() + n * p);
        for (int j = 0; j < p; ++j) {
          for (int i = 0; i < n; ++i) {
            draws.gamma.push_back(static_cast<std::uint8_t>(state.field.gamma(i, j)));
          }
        }
        draws.scale.insert(draws.scale.end(), state.sigma2.data(), state.sigma2.data() + n);
        draws.mu.insert(draws.mu.end(), state.mu.data(), state.mu.data() + p);
        draws.tau2.insert(draws.tau2.end(), state.tau2.data(), state.tau2.data() + p);
        draws.rho.push_back(state.rho);
        ++draws.n_draws;
      }
    }
    out.chains.push_back(std::move(draws));
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.seconds_per_sweep = std::chrono::duration<double>(t1 - t0).count() /
                          static_cast<double>(run.iterations * run.chains);
  return out;
}

}  // namespace ssip
