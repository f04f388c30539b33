#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "ssip/adjacency.hpp"
#include "ssip/chain.hpp"
#include "ssip/crc.hpp"
#include "ssip/gaussian_model.hpp"
#include "ssip/nb_model.hpp"

namespace ssip {

/// Truth record for the 3x3-grid Gaussian study: per-covariate inclusion
/// gradients via sorted Beta draws, slab coefficients N(5, 0.25) and
/// N(3, 1), iid U(0,1) covariates, unit noise.
struct GaussianSimTruth {
  Eigen::ArrayXXi gamma_true;  // 9 x 2 (the two selectable covariates)
  Eigen::MatrixXd beta_true;   // 9 x 3 (intercept + 2 covariates)
  Eigen::MatrixXd xi;          // 9 x 2 sorted Beta(2,2) inclusion probabilities
  std::uint64_t seed = 0;
};

struct GaussianSim {
  std::vector<RegionData> regions;
  AdjacencyGraph graph;
  GaussianSimTruth truth;
};

GaussianSim simulate_gaussian_grid(std::uint64_t seed, int obs_per_region = 4, double noise_var = 1.0);

/// Truth record for the point-process capture study.
struct CrcSimTruth {
  std::vector<std::pair<double, double>> locations;
  std::vector<std::uint32_t> capture_patterns;  // 4-bit, 0 = unseen
  std::vector<int> cells;                       // grid cell per point
  Eigen::VectorXd unseen_true;                  // per-cell all-zero-pattern counts
  double intensity_scale = 0.0;
  std::uint64_t seed = 0;
};

struct CrcSim {
  CaptureTable table;
  AdjacencyGraph graph;
  CrcSimTruth truth;
};

// spatial intensity and list-capture probability surfaces of the study
double crc_intensity(double x, double y, double c);
double crc_prob_l1(double x, double y);
double crc_prob_l2(double x, double y, bool on_l1);
double crc_prob_l3(double x, double y, bool on_l1);
double crc_prob_l4(double x, double y);

CrcSim simulate_crc(std::uint64_t seed, double c = 2000.0, int grid_side = 5);

/// The no-spatial-sharing comparator: the identical engine run at rho = 0.
PosteriorChain baseline_independent(const std::vector<RegionData>& regions, const AdjacencyGraph& graph,
                                    const Hyper& hyper, const GaussianConfig& config,
                                    const RunSettings& run);
PosteriorChain baseline_independent_nb(const std::vector<NbRegionData>& regions, const AdjacencyGraph& graph,
                                       const Hyper& hyper, const NbConfig& config, const RunSettings& run);

/// Exhaustive-search AIC selection over the unforced columns of one
/// region (least squares). Ties break toward fewer columns, then
/// lexicographically. Rank-deficient subsets are skipped; if everything
/// fails the forced-only model is returned.
Eigen::ArrayXi baseline_aic(const RegionData& region, const Eigen::ArrayXi& forced);

/// Least-squares refit on the selected columns; zeros elsewhere.
Eigen::VectorXd ls_refit(const RegionData& region, const Eigen::ArrayXi& gamma);

/// NB maximum likelihood (fixed h) by Newton iteration; returns the
/// coefficient vector on the active columns embedded in length p.
struct NbMle {
  Eigen::VectorXd beta;       // length p, zeros off the active set
  double loglik = 0.0;
  bool ok = false;
  Eigen::MatrixXd active_cov;  // inverse observed information on the active set
  std::vector<int> active;
};
NbMle nb_mle(const NbRegionData& region, const Eigen::ArrayXi& gamma, double h);

/// Exhaustive AIC over unforced columns for the count model.
Eigen::ArrayXi baseline_aic_nb(const NbRegionData& region, const Eigen::ArrayXi& forced, double h);

/// AIC-selected plug-in estimate of the all-zeros cell with a Wald
/// interval on the log scale; the interval is [0, inf) when the
/// information matrix is singular at the chosen model.
struct AicUnseen {
  double point = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
  bool infinite = false;
};
AicUnseen aic_unseen_estimate(const NbRegionData& region, const CrcDesign& design, double h);

/// Mean squared error of a coefficient-estimate matrix against the truth.
double evaluate_beta_mse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

/// Posterior-mean coefficient matrix (model-averaged, zeros included).
Eigen::MatrixXd posterior_mean_beta(const PosteriorChain& chain);

/// One full Table-1-style replication at the given seed: SSIP at rho,
/// the rho = 0 baseline, and exhaustive AIC, all on the same simulated
/// data; returns the three coefficient MSEs.
struct GaussianReplication {
  double mse_ssip = 0.0;
  double mse_indep = 0.0;
  double mse_aic = 0.0;
};
GaussianReplication run_gaussian_replication(std::uint64_t seed, long iterations, double rho = 0.9);

/// One full Table-2-style replication: the capture simulation, the
/// count-engine fit with CAR intercepts, per-cell predictive intervals,
/// and the AIC comparator. Cell-level rows are kept for reporting.
struct CrcCellRow {
  int region = 0;
  double truth = 0.0;
  UnseenEstimate ssip;
  AicUnseen aic;
  bool sparse = false;
};
struct CrcReplication {
  std::vector<CrcCellRow> cells;
  CrcEval ssip_eval;
  double aic_rmse = std::numeric_limits<double>::quiet_NaN();
  double aic_coverage = 0.0;
  int aic_infinite_intervals = 0;
  int ssip_infinite_intervals = 0;
};
CrcReplication run_crc_replication(std::uint64_t seed, double c, long iterations, int max_order = 2,
                                   double rho = 0.9);

}  // namespace ssip
