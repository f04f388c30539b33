#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssip/adjacency.hpp"
#include "ssip/chain.hpp"
#include "ssip/latent_field.hpp"
#include "ssip/polya_gamma.hpp"
#include "ssip/regression.hpp"
#include "ssip/rng.hpp"

namespace ssip {

/// One region's count data. time_idx holds contiguous 0-based time labels
/// per row (empty means a single time slice).
struct NbRegionData {
  Eigen::MatrixXd X;      // m_i x p
  Eigen::VectorXd y;      // nonnegative counts
  Eigen::ArrayXi time_idx;  // per-row time, empty or length m_i

  int m() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

struct NbConfig {
  double h = 1.0;                // NB dispersion, fixed and user-supplied
  bool car_intercept = false;    // IAR-smoothed regional intercepts alpha_i
  bool temporal = false;         // AR(1) shift zeta_t
  double ar_coef = 0.9;          // AR(1) coefficient, fixed unless ar_coef_update
  bool ar_coef_update = false;
  double ar_step = 0.1;          // MH step for the optional ar_coef move
  double a_alpha = 2.0, b_alpha = 1.0;  // Gamma prior on the IAR precision tau_alpha
  double a_innov = 2.0, b_innov = 1.0;  // IG prior on the AR innovation variance
  double psi_bound = 30.0;       // abort when any linear predictor leaves [-bound, bound]
  bool force_intercept = true;
  Eigen::ArrayXi forced_cols;    // optional explicit 0/1 mask; overrides force_intercept
  PgConfig pg;

  void validate() const;
};

struct NbState {
  Eigen::MatrixXd beta;                 // n x p
  LatentField field;
  Eigen::VectorXd mu;                   // slab means
  Eigen::VectorXd tau2;                 // slab variances
  std::vector<Eigen::VectorXd> omega;   // per-region PG latents, one per row
  std::vector<Eigen::VectorXd> pseudo;  // per-region pseudo-data (y - h) / (2 omega)
  Eigen::VectorXd alpha;                // regional CAR intercepts
  double tau_alpha = 1.0;
  Eigen::VectorXd zeta;                 // temporal shift, zeta(0) pinned to 0
  double ar_innov_var = 1.0;
  double ar_coef = 0.9;
  double global_level = 0.0;            // absorbs the IAR mean when no intercept column exists
  double rho = 0.9;
};

/// (y - h) / (2 omega), the conditionally Gaussian pseudo-response of the
/// Polya-Gamma augmentation.
Eigen::VectorXd compute_pseudo_data(const Eigen::VectorXd& y, const Eigen::VectorXd& omega, double h);

/// Linear predictors for one region under the current state.
Eigen::VectorXd nb_linear_predictor(const NbState& state, const NbRegionData& region, int i);

/// omega_r ~ PG(y_r + h, psi_r) for every observation row.
void update_omega(NbState& state, const std::vector<NbRegionData>& regions, const NbConfig& config,
                  Rng& rng);

/// alpha draws from the normal full conditionals combining Gaussian
/// pseudo-data likelihood with the IAR neighborhood prior; likelihood
/// terms passed as per-region precisions and precision-weighted means so
/// a zero-information limit is directly expressible.
void update_alpha_given_likelihood(Eigen::VectorXd& alpha, const AdjacencyGraph& graph, double tau_alpha,
                                   const Eigen::VectorXd& lik_prec, const Eigen::VectorXd& lik_mean_prec,
                                   Rng& rng);

/// Full alpha step: conditional draws, sum-to-zero recentering with the
/// mean absorbed into the intercept column (or the global level), and the
/// Gamma update of tau_alpha from the IAR pairwise-difference form.
void update_alpha_car(NbState& state, const AdjacencyGraph& graph, const std::vector<NbRegionData>& regions,
                      const NbConfig& config, int intercept_col, Rng& rng);

/// Gamma(a + rank/2, b + pairwise-difference form / 2) draw of the IAR
/// precision; rank = n_regions - components.
double draw_tau_alpha(const Eigen::VectorXd& alpha, const AdjacencyGraph& graph, double a, double b,
                      Rng& rng);

/// Joint draw of zeta given per-time likelihood precisions / weighted
/// means, with zeta(0) = 0 for identifiability.
Eigen::VectorXd sample_zeta_given_likelihood(int T, double ar_coef, double innov_var,
                                             const Eigen::VectorXd& lik_prec,
                                             const Eigen::VectorXd& lik_mean_prec, Rng& rng);

/// Full temporal step: joint zeta draw, IG update of the innovation
/// variance, optional reflected-MH move for the AR coefficient.
void update_temporal_ar1(NbState& state, const std::vector<NbRegionData>& regions, const NbConfig& config,
                         Rng& rng);

NbState init_nb_state(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                      const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config, Rng& rng);

/// One full sweep: omega -> pseudo-data -> collapsed (gamma, Z) on the
/// heteroskedastic Gaussian view -> beta -> alpha -> zeta -> slab hyper ->
/// optional rho.
void nb_sweep(NbState& state, const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
              const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config, Rng& rng);

PosteriorChain fit_nb_ssip(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                           const Hyper& hyper, const SsipConfig& ssip, const NbConfig& config,
                           const RunSettings& run);

/// Number of time slices implied by the data (1 when no time indices).
int nb_time_dim(const std::vector<NbRegionData>& regions);

}  // namespace ssip
