#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssip/adjacency.hpp"
#include "ssip/chain.hpp"
#include "ssip/latent_field.hpp"
#include "ssip/regression.hpp"
#include "ssip/rng.hpp"

namespace ssip {

/// One region's regression data: m_i observations on a shared set of p
/// columns.
struct RegionData {
  Eigen::MatrixXd X;  // m_i x p
  Eigen::VectorXd y;  // length m_i

  int m() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

struct GaussianConfig {
  bool force_intercept = true;   // pin column 0 into every region's model
  bool pool_sigma2 = false;      // share one error variance across regions
  Eigen::ArrayXi forced_cols;    // optional explicit 0/1 mask of length p; overrides force_intercept
};

struct GaussianState {
  Eigen::MatrixXd beta;    // n x p, zero where gamma is zero
  Eigen::VectorXd sigma2;  // per-region error variance
  Eigen::VectorXd mu;      // slab means
  Eigen::VectorXd tau2;    // slab variances
  LatentField field;
  double rho = 0.9;
};

/// Column-forcing mask implied by the config (length p).
Eigen::ArrayXi forced_columns(const GaussianConfig& config, int p);

/// Marginal likelihood of one region with beta integrated out under
/// homoskedastic noise sigma2_i; log scale.
double log_marginal_likelihood(const RegionData& region, const Eigen::ArrayXi& gamma_row,
                               const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2, double sigma2_i);

void update_beta(GaussianState& state, const std::vector<RegionData>& regions, bool prior_only, Rng& rng);
void update_sigma2(GaussianState& state, const std::vector<RegionData>& regions, const Hyper& hyper,
                   bool pool_sigma2, bool prior_only, Rng& rng);

GaussianState init_gaussian_state(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                  const Hyper& hyper, const SsipConfig& ssip, const GaussianConfig& config,
                                  Rng& rng);

/// One full Gibbs sweep: (gamma, Z) -> beta -> sigma^2 -> (mu, tau^2) ->
/// optional rho move.
void gaussian_sweep(GaussianState& state, const std::vector<RegionData>& regions,
                    const AdjacencyGraph& graph, const Hyper& hyper, const SsipConfig& ssip,
                    const GaussianConfig& config, bool prior_only, Rng& rng);

/// Run the full sampler and record thinned post-burn-in draws.
/// Deterministic given run.seed; with run.prior_only the data are ignored
/// and the chain targets the prior.
PosteriorChain fit_gaussian_ssip(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                 const Hyper& hyper, const SsipConfig& ssip, const GaussianConfig& config,
                                 const RunSettings& run);

}  // namespace ssip
