#pragma once

#include <Eigen/Dense>

#include "ssip/adjacency.hpp"
#include "ssip/rng.hpp"

namespace ssip {

/// Latent Gaussian field Z (n_regions x p) with paired inclusion
/// indicators gamma = 1[Z > 0]. Entries flagged in `forced` are pinned to
/// gamma = 1 and keep Z on the positive half line. One field is owned by
/// exactly one chain.
struct LatentField {
  Eigen::MatrixXd z;        // n_regions x p
  Eigen::ArrayXXi gamma;    // 0/1
  Eigen::ArrayXXi forced;   // 0/1, forced-inclusion mask

  int n_regions() const { return static_cast<int>(z.rows()); }
  int n_covariates() const { return static_cast<int>(z.cols()); }

  static LatentField zeros(int n_regions, int p);

  /// sign consistency: gamma == 1[z > 0] everywhere, forced entries positive
  bool consistent() const;
};

enum class RhoUpdate { kOff, kMetropolis };

/// Spatial-smoothing settings shared by the samplers.
struct SsipConfig {
  double rho = 0.9;
  RhoUpdate rho_update = RhoUpdate::kOff;
  double rho_step = 0.05;                   // random-walk sd for the MH move
  static constexpr double kRhoEps = 1e-6;   // upper buffer keeping D - rho W invertible

  void validate() const;
};

/// Conditional prior inclusion probability
/// w_ij = Phi(rho * n_i^{-1/2} * sum_{k ~ i} Z_kj), strictly inside (0, 1).
double conditional_inclusion_prob(const LatentField& field, const AdjacencyGraph& graph, int i, int j,
                                  double rho);

/// Draw Z_ij from N(rho * mean of neighbor Z, 1/n_i) truncated to the half
/// line selected by gamma_ij, write it into the field, and return it.
double sample_z_given_gamma(LatentField& field, const AdjacencyGraph& graph, int i, int j, double rho,
                            Rng& rng);

/// Joint prior draw of the whole field: p independent CAR-Gaussian columns
/// (requires rho < 1 for a proper joint), gamma by thresholding, forced
/// entries resampled from the positive half of their full conditional.
LatentField sample_prior_field(const AdjacencyGraph& graph, double rho, int p, Rng& rng,
                               const Eigen::ArrayXXi* forced = nullptr);

/// Joint log density (up to a constant) of all field columns under the CAR
/// Gaussian with precision D - rho W, including the log-determinant term.
double car_field_logdensity(const LatentField& field, const AdjacencyGraph& graph, double rho);

/// One reflected random-walk Metropolis-Hastings move for rho on
/// [0, 1 - eps] under a uniform prior; returns the (possibly unchanged)
/// new value.
double update_rho_mh(const LatentField& field, const AdjacencyGraph& graph, const SsipConfig& config,
                     double rho_current, Rng& rng);

}  // namespace ssip
