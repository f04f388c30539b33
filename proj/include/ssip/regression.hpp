#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssip/adjacency.hpp"
#include "ssip/latent_field.hpp"
#include "ssip/rng.hpp"

namespace ssip {

/// Fixed prior constants shared by the regression engines.
struct Hyper {
  double mu0 = 0.0;
  double s0 = 100.0;     // prior variance of the slab means mu_j
  double a_tau = 2.0;    // IG shape for the slab variances tau^2_j
  double b_tau = 1.0;    // IG scale
  double a_sigma = 2.0;  // Gamma shape for the error precisions 1/sigma^2_i
  double b_sigma = 1.0;  // Gamma rate

  void validate() const;
};

/// Per-region Gaussian view the collapsed updates operate on. The Gaussian
/// engine uses y = Y_i with constant row variance sigma^2_i; the count
/// engine uses Polya-Gamma pseudo-data with row variances 1/omega. Both
/// engines run byte-identical selection code on this view.
struct WorkingRegion {
  Eigen::MatrixXd X;        // m x p design
  Eigen::VectorXd y;        // working response, offsets already removed
  Eigen::VectorXd row_var;  // per-row variance, length m

  int m() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

/// Log marginal likelihood of one region with the active coefficients
/// integrated out:
///   log N(y ; X_A mu_A, diag(row_var) + X_A T_A X_A^T),
/// where A = {j : gamma_row(j) = 1}. Evaluated through the matrix
/// inversion lemma in O(m q^2). Throws on non-finite output.
double log_marginal_gaussian(const WorkingRegion& region, const Eigen::ArrayXi& gamma_row,
                             const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2);

/// One full (gamma, Z) sweep in row-major region/covariate order. For each
/// unforced entry, gamma_ij is drawn from the collapsed Bernoulli whose
/// odds combine the spatial prior weight w_ij with the marginal-likelihood
/// ratio (log-space arithmetic), then Z_ij is refreshed from its truncated
/// normal full conditional. Forced entries skip the Bernoulli and refresh
/// Z from the positive half. With prior_only set, the likelihood terms are
/// constant and the sweep targets the SSIP prior itself.
void update_gamma_z(LatentField& field, const AdjacencyGraph& graph,
                    const std::vector<WorkingRegion>& regions, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& tau2, double rho, bool prior_only, Rng& rng);

/// Joint draw of one region's coefficient row given gamma: the active
/// subvector from N(M^{-1} m, M^{-1}) with M = X_A^T V^{-1} X_A + T_A^{-1}
/// and m = X_A^T V^{-1} y + T_A^{-1} mu_A; inactive entries exactly zero.
/// With prior_only set the draw reduces to the slab prior N(mu_A, T_A).
Eigen::VectorXd draw_beta_row(const WorkingRegion& region, const Eigen::ArrayXi& gamma_row,
                              const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2, bool prior_only,
                              Rng& rng);

/// Conjugate update of the slab means and variances. For each covariate j
/// with active set A_j = {i : gamma_ij = 1}: a normal draw for mu_j and an
/// inverse-gamma draw for tau^2_j; both fall back to their priors when A_j
/// is empty.
void update_mu_tau2(const Eigen::MatrixXd& beta, const Eigen::ArrayXXi& gamma, const Hyper& hyper,
                    Eigen::VectorXd& mu, Eigen::VectorXd& tau2, Rng& rng);

}  // namespace ssip
