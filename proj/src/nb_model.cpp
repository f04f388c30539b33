#include "ssip/nb_model.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ssip/gaussian_model.hpp"
#include "ssip/math_util.hpp"
#include "ssip/truncated_normal.hpp"

namespace ssip {

namespace {

Eigen::ArrayXi nb_forced_columns(const NbConfig& config, int p) {
  if (config.forced_cols.size() > 0) {
    if (config.forced_cols.size() != p) throw std::invalid_argument("forced_cols mask must have length p");
    return config.forced_cols;
  }
  Eigen::ArrayXi mask = Eigen::ArrayXi::Zero(p);
  if (config.force_intercept) mask(0) = 1;
  return mask;
}

// Column that is identically one in every region, if any; the IAR
// recentering absorbs the deducted mean there.
int find_intercept_column(const std::vector<NbRegionData>& regions) {
  if (regions.empty()) return -1;
  const int p = regions.front().p();
  for (int j = 0; j < p; ++j) {
    bool all_ones = true;
    for (const auto& r : regions) {
      if ((r.X.col(j).array() != 1.0).any()) {
        all_ones = false;
        break;
      }
    }
    if (all_ones) return j;
  }
  return -1;
}

int row_time(const NbRegionData& region, int r) {
  return region.time_idx.size() > 0 ? region.time_idx(r) : 0;
}

void check_nb_regions(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph) {
  if (static_cast<int>(regions.size()) != graph.n_regions()) {
    throw std::invalid_argument("fit: number of regions must match the graph");
  }
  if (regions.empty()) throw std::invalid_argument("fit: no regions");
  const int p = regions.front().p();
  for (const auto& r : regions) {
    if (r.p() != p) throw std::invalid_argument("fit: all regions must share the column count");
    if (r.m() < 1) throw std::invalid_argument("fit: every region needs at least one observation");
    if (r.X.rows() != r.y.size()) throw std::invalid_argument("fit: X/y row mismatch");
    if ((r.y.array() < 0.0).any()) throw std::invalid_argument("fit: counts must be nonnegative");
    if (r.time_idx.size() > 0 && r.time_idx.size() != r.y.size()) {
      throw std::invalid_argument("fit: time index length mismatch");
    }
  }
}

}  // namespace

void NbConfig::validate() const {
  if (h <= 0.0) throw std::invalid_argument("NbConfig: h must be positive");
  if (ar_coef <= -1.0 || ar_coef >= 1.0) throw std::invalid_argument("NbConfig: ar_coef must be in (-1,1)");
  if (ar_coef_update && ar_step <= 0.0) throw std::invalid_argument("NbConfig: ar_step must be positive");
  if (a_alpha <= 0.0 || b_alpha <= 0.0 || a_innov <= 0.0 || b_innov <= 0.0) {
    throw std::invalid_argument("NbConfig: prior constants must be positive");
  }
  if (psi_bound <= 0.0) throw std::invalid_argument("NbConfig: psi_bound must be positive");
}

int nb_time_dim(const std::vector<NbRegionData>& regions) {
  int max_t = 0;
  for (const auto& r : regions) {
    for (int k = 0; k < r.time_idx.size(); ++k) max_t = std::max(max_t, r.time_idx(k));
  }
  return max_t + 1;
}

Eigen::VectorXd compute_pseudo_data(const Eigen::VectorXd& y, const Eigen::VectorXd& omega, double h) {
  if (y.size() != omega.size()) throw std::invalid_argument("compute_pseudo_data: length mismatch");
  if ((omega.array() <= 0.0).any()) throw std::invalid_argument("compute_pseudo_data: omega must be positive");
  return (y.array() - h) / (2.0 * omega.array());
}

Eigen::VectorXd nb_linear_predictor(const NbState& state, const NbRegionData& region, int i) {
  Eigen::VectorXd psi = region.X * state.beta.row(i).transpose();
  psi.array() += state.alpha(i) + state.global_level;
  if (state.zeta.size() > 1) {
    for (int r = 0; r < region.m(); ++r) psi(r) += state.zeta(row_time(region, r));
  }
  return psi;
}

void update_omega(NbState& state, const std::vector<NbRegionData>& regions, const NbConfig& config,
                  Rng& rng) {
  const int n = static_cast<int>(regions.size());
  for (int i = 0; i < n; ++i) {
    const auto& region = regions[static_cast<std::size_t>(i)];
    const Eigen::VectorXd psi = nb_linear_predictor(state, region, i);
    for (int r = 0; r < region.m(); ++r) {
      if (std::fabs(psi(r)) > config.psi_bound) {
        throw std::runtime_error("linear predictor " + std::to_string(psi(r)) + " out of [-" +
                                 std::to_string(config.psi_bound) + "," + std::to_string(config.psi_bound) +
                                 "] in region " + std::to_string(i) + " row " + std::to_string(r));
      }
      state.omega[static_cast<std::size_t>(i)](r) = sample_pg(region.y(r) + config.h, psi(r), rng, config.pg);
    }
    state.pseudo[static_cast<std::size_t>(i)] =
        compute_pseudo_data(region.y, state.omega[static_cast<std::size_t>(i)], config.h);
  }
}

void update_alpha_given_likelihood(Eigen::VectorXd& alpha, const AdjacencyGraph& graph, double tau_alpha,
                                   const Eigen::VectorXd& lik_prec, const Eigen::VectorXd& lik_mean_prec,
                                   Rng& rng) {
  const int n = graph.n_regions();
  for (int i = 0; i < n; ++i) {
    const double n_i = static_cast<double>(graph.degree(i));
    double nb_sum = 0.0;
    for (int k : graph.neighbors(i)) nb_sum += alpha(k);
    const double prec = lik_prec(i) + tau_alpha * n_i;
    const double mean = (lik_mean_prec(i) + tau_alpha * nb_sum) / prec;
    alpha(i) = mean + rng.normal() / std::sqrt(prec);
  }
}

void update_alpha_car(NbState& state, const AdjacencyGraph& graph, const std::vector<NbRegionData>& regions,
                      const NbConfig& config, int intercept_col, Rng& rng) {
  const int n = graph.n_regions();
  Eigen::VectorXd lik_prec = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lik_mean_prec = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto& region = regions[static_cast<std::size_t>(i)];
    const Eigen::VectorXd xb = region.X * state.beta.row(i).transpose();
    const auto& om = state.omega[static_cast<std::size_t>(i)];
    const auto& ps = state.pseudo[static_cast<std::size_t>(i)];
    for (int r = 0; r < region.m(); ++r) {
      double resid = ps(r) - xb(r) - state.global_level;
      if (state.zeta.size() > 1) resid -= state.zeta(row_time(region, r));
      lik_prec(i) += om(r);
      lik_mean_prec(i) += om(r) * resid;
    }
  }
  update_alpha_given_likelihood(state.alpha, graph, state.tau_alpha, lik_prec, lik_mean_prec, rng);

  // sum-to-zero recentering; the level moves into the intercept column
  // (confounded on purpose) or a dedicated global level
  const double bar = state.alpha.mean();
  state.alpha.array() -= bar;
  if (intercept_col >= 0) {
    state.beta.col(intercept_col).array() += bar;
  } else {
    state.global_level += bar;
  }

  state.tau_alpha = draw_tau_alpha(state.alpha, graph, config.a_alpha, config.b_alpha, rng);
}

double draw_tau_alpha(const Eigen::VectorXd& alpha, const AdjacencyGraph& graph, double a, double b,
                      Rng& rng) {
  const int n = graph.n_regions();
  // IAR pairwise-difference quadratic form over the edge set
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k : graph.neighbors(i)) {
      if (k > i) {
        const double d = alpha(i) - alpha(k);
        ss += d * d;
      }
    }
  }
  const double rank = static_cast<double>(n - graph.n_components());
  return rng.gamma_rv(a + 0.5 * rank, b + 0.5 * ss);
}

Eigen::VectorXd sample_zeta_given_likelihood(int T, double ar_coef, double innov_var,
                                             const Eigen::VectorXd& lik_prec,
                                             const Eigen::VectorXd& lik_mean_prec, Rng& rng) {
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(T);
  if (T <= 1) return zeta;  // zeta(0) = 0 is the whole story
  const int k = T - 1;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  const double ip = 1.0 / innov_var;
  for (int t = 0; t < k; ++t) {
    q(t, t) = ip * (1.0 + (t + 1 < k ? ar_coef * ar_coef : 0.0)) + lik_prec(t + 1);
    if (t + 1 < k) {
      q(t, t + 1) = -ar_coef * ip;
      q(t + 1, t) = -ar_coef * ip;
    }
  }
  Eigen::VectorXd rhs(k);
  for (int t = 0; t < k; ++t) rhs(t) = lik_mean_prec(t + 1);
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw std::runtime_error("sample_zeta: Cholesky failed");
  const Eigen::VectorXd mean = llt.solve(rhs);
  Eigen::VectorXd eps(k);
  for (int t = 0; t < k; ++t) eps(t) = rng.normal();
  const Eigen::VectorXd draw = mean + llt.matrixU().solve(eps);
  zeta.tail(k) = draw;
  return zeta;
}

void update_temporal_ar1(NbState& state, const std::vector<NbRegionData>& regions, const NbConfig& config,
                         Rng& rng) {
  const int T = static_cast<int>(state.zeta.size());
  if (T <= 1) {
    if (T == 1) state.zeta(0) = 0.0;
    return;
  }
  Eigen::VectorXd lik_prec = Eigen::VectorXd::Zero(T);
  Eigen::VectorXd lik_mean_prec = Eigen::VectorXd::Zero(T);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& region = regions[i];
    const Eigen::VectorXd xb = region.X * state.beta.row(static_cast<int>(i)).transpose();
    for (int r = 0; r < region.m(); ++r) {
      const int t = row_time(region, r);
      const double resid = state.pseudo[i](r) - xb(r) - state.alpha(static_cast<int>(i)) - state.global_level;
      lik_prec(t) += state.omega[i](r);
      lik_mean_prec(t) += state.omega[i](r) * resid;
    }
  }
  state.zeta = sample_zeta_given_likelihood(T, state.ar_coef, state.ar_innov_var, lik_prec, lik_mean_prec, rng);

  // innovation variance | zeta, ar_coef
  double ss = 0.0;
  for (int t = 1; t < T; ++t) {
    const double e = state.zeta(t) - state.ar_coef * state.zeta(t - 1);
    ss += e * e;
  }
  state.ar_innov_var = rng.inv_gamma_rv(config.a_innov + 0.5 * (T - 1), config.b_innov + 0.5 * ss);

  if (config.ar_coef_update) {
    const double lim = 1.0 - 1e-6;
    double prop = state.ar_coef + config.ar_step * rng.normal();
    while (prop < -lim || prop > lim) {
      if (prop < -lim) prop = -2.0 * lim - prop;
      if (prop > lim) prop = 2.0 * lim - prop;
    }
    auto ar_loglik = [&](double phi) {
      double s = 0.0;
      for (int t = 1; t < T; ++t) {
        const double e = state.zeta(t) - phi * state.zeta(t - 1);
        s += e * e;
      }
      return -0.5 * s / state.ar_innov_var;
    };
    if (std::log(rng.u01p()) < ar_loglik(prop) - ar_loglik(state.ar_coef)) state.ar_coef = prop;
  }
}

NbState init_nb_state(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                      const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config, Rng& rng) {
  const int n = graph.n_regions();
  const int p = regions.front().p();
  const int T = nb_time_dim(regions);

  NbState state;
  state.rho = ssip.rho;
  state.ar_coef = config.ar_coef;
  state.field = LatentField::zeros(n, p);
  const Eigen::ArrayXi cols = nb_forced_columns(config, p);
  for (int j = 0; j < p; ++j) state.field.forced.col(j).setConstant(cols(j));
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
  state.beta = Eigen::MatrixXd::Zero(n, p);
  WorkingRegion empty;
  for (int i = 0; i < n; ++i) {
    state.beta.row(i) =
        draw_beta_row(empty, state.field.gamma.row(i), state.mu, state.tau2, /*prior_only=*/true, rng)
            .transpose();
  }
  state.alpha = Eigen::VectorXd::Zero(n);
  state.zeta = Eigen::VectorXd::Zero(config.temporal ? T : 1);
  state.omega.resize(regions.size());
  state.pseudo.resize(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    state.omega[i] = Eigen::VectorXd::Ones(regions[i].m());
    for (int r = 0; r < regions[i].m(); ++r) {
      state.omega[i](r) = sample_pg(regions[i].y(r) + config.h, 0.0, rng, config.pg);
    }
    state.pseudo[i] = compute_pseudo_data(regions[i].y, state.omega[i], config.h);
  }
  return state;
}

void nb_sweep(NbState& state, const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
              const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config, Rng& rng) {
  const int n = static_cast<int>(regions.size());
  const int intercept_col = config.car_intercept ? find_intercept_column(regions) : -1;

  update_omega(state, regions, config, rng);

  // heteroskedastic Gaussian view of the augmented model
  std::vector<WorkingRegion> work(regions.size());
  for (int i = 0; i < n; ++i) {
    const auto& region = regions[static_cast<std::size_t>(i)];
    work[static_cast<std::size_t>(i)].X = region.X;
    Eigen::VectorXd y = state.pseudo[static_cast<std::size_t>(i)];
    y.array() -= state.alpha(i) + state.global_level;
    if (state.zeta.size() > 1) {
      for (int r = 0; r < region.m(); ++r) y(r) -= state.zeta(row_time(region, r));
    }
    work[static_cast<std::size_t>(i)].y = y;
    work[static_cast<std::size_t>(i)].row_var = state.omega[static_cast<std::size_t>(i)].array().inverse();
  }

  update_gamma_z(state.field, graph, work, state.mu, state.tau2, state.rho, /*prior_only=*/false, rng);
  for (int i = 0; i < n; ++i) {
    state.beta.row(i) = draw_beta_row(work[static_cast<std::size_t>(i)], state.field.gamma.row(i), state.mu,
                                      state.tau2, /*prior_only=*/false, rng)
                            .transpose();
  }
  if (config.car_intercept) {
    update_alpha_car(state, graph, regions, config, intercept_col, rng);
  }
  if (config.temporal) {
    update_temporal_ar1(state, regions, config, rng);
  }
  update_mu_tau2(state.beta, state.field.gamma, hyper, state.mu, state.tau2, rng);
  if (ssip.rho_update == RhoUpdate::kMetropolis) {
    state.rho = update_rho_mh(state.field, graph, ssip, state.rho, rng);
  }
}

PosteriorChain fit_nb_ssip(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                           const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config,
                           const RunSettings& run) {
  hyper.validate();
  ssip.validate();
  config.validate();
  run.validate();
  check_nb_regions(regions, graph);
  const int n = graph.n_regions();
  const int p = regions.front().p();
  const int T = config.temporal ? nb_time_dim(regions) : 1;

  PosteriorChain out;
  out.engine = PosteriorChain::Engine::kNegBinomial;
  out.n_regions = n;
  out.p = p;
  out.T = T;
  out.h = config.h;
  out.car_intercept = config.car_intercept;
  out.temporal = config.temporal;
  out.hyper = hyper;
  out.ssip = ssip;
  out.run = run;

  const auto t0 = std::chrono::steady_clock::now();
  for (int chain = 0; chain < run.chains; ++chain) {
    Rng rng = Rng::for_stream(run.seed, static_cast<std::uint64_t>(chain));
    NbState state = init_nb_state(regions, graph, hyper, ssip, config, rng);

    ChainDraws draws;
    draws.n = n;
    draws.p = p;
    draws.T = T;
    draws.reserve(run.draws_per_chain());

    const long burn = run.effective_burn_in();
    for (long it = 0; it < run.iterations; ++it) {
      try {
        nb_sweep(state, regions, graph, hyper, ssip, config, rng);
      } catch (const std::exception& e) {
        throw std::runtime_error("count-model sweep failed at iteration " + std::to_string(it) + ": " +
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
        for (int i = 0; i < n; ++i) draws.scale.push_back(state.omega[static_cast<std::size_t>(i)].mean());
        draws.mu.insert(draws.mu.end(), state.mu.data(), state.mu.data() + p);
        draws.tau2.insert(draws.tau2.end(), state.tau2.data(), state.tau2.data() + p);
        draws.rho.push_back(state.rho);
        if (config.car_intercept) {
          draws.alpha.insert(draws.alpha.end(), state.alpha.data(), state.alpha.data() + n);
        }
        if (config.temporal) {
          draws.zeta.insert(draws.zeta.end(), state.zeta.data(), state.zeta.data() + T);
        }
        draws.global_level.push_back(state.global_level);
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
