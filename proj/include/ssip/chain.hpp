#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssip/latent_field.hpp"
#include "ssip/regression.hpp"

namespace ssip {

struct RunSettings {
  long iterations = 10000;
  long burn_in = -1;  // -1: iterations / 10
  long thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  bool prior_only = false;

  long effective_burn_in() const { return burn_in >= 0 ? burn_in : iterations / 10; }
  long draws_per_chain() const { return (iterations - effective_burn_in() + thin - 1) / thin; }
  void validate() const;
};

/// Thinned post-burn-in draws of one chain, stored flat (draw-major,
/// column-major within each n x p block to match Eigen's layout).
struct ChainDraws {
  int n = 0, p = 0, T = 0;
  long n_draws = 0;

  std::vector<double> beta;          // n_draws * n * p
  std::vector<double> z;             // n_draws * n * p
  std::vector<std::uint8_t> gamma;   // n_draws * n * p
  std::vector<double> scale;         // n_draws * n: sigma^2_i (gaussian) or mean omega (count)
  std::vector<double> mu;            // n_draws * p
  std::vector<double> tau2;          // n_draws * p
  std::vector<double> rho;           // n_draws
  std::vector<double> alpha;         // n_draws * n when CAR intercepts on, else empty
  std::vector<double> zeta;          // n_draws * T when temporal on, else empty
  std::vector<double> global_level;  // n_draws (count engine)

  void reserve(long expected_draws);
  double beta_at(long d, int i, int j) const { return beta[idx(d, i, j)]; }
  double z_at(long d, int i, int j) const { return z[idx(d, i, j)]; }
  int gamma_at(long d, int i, int j) const { return gamma[idx(d, i, j)]; }

  std::size_t idx(long d, int i, int j) const {
    return (static_cast<std::size_t>(d) * p + j) * n + i;
  }
};

/// Stored posterior draws plus enough metadata to re-run the fit exactly.
struct PosteriorChain {
  enum class Engine { kGaussian, kNegBinomial };

  Engine engine = Engine::kGaussian;
  int n_regions = 0;
  int p = 0;
  int T = 1;
  double h = 1.0;  // count-engine dispersion
  bool car_intercept = false;
  bool temporal = false;

  Hyper hyper;
  SsipConfig ssip;
  RunSettings run;
  std::string config_digest;
  double seconds_per_sweep = 0.0;

  std::vector<ChainDraws> chains;

  long total_draws() const;

  // pooled summary extractors
  double inclusion_prob(int i, int j) const;
  double beta_mean(int i, int j) const;
  double beta_quantile_value(int i, int j, double q) const;
  std::vector<double> collect_beta(int i, int j) const;
  std::vector<double> collect_z(int i, int j) const;
  std::vector<double> collect_scale(int i) const;
  std::vector<double> collect_mu(int j) const;
  std::vector<double> collect_tau2(int j) const;
  std::vector<double> collect_rho() const;
  std::vector<double> collect_alpha(int i) const;
  std::vector<double> collect_zeta(int t) const;

  /// Linear predictor of the all-zero design cell for one (region, time):
  /// beta_i0 (intercept column) + alpha_i + zeta_t + global level, per draw.
  /// intercept_col < 0 means the design has no intercept column.
  std::vector<double> collect_zero_cell_psi(int region, int time_idx, int intercept_col) const;
};

}  // namespace ssip
