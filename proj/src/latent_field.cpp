#include "ssip/latent_field.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "ssip/math_util.hpp"
#include "ssip/truncated_normal.hpp"

namespace ssip {

LatentField LatentField::zeros(int n_regions, int p) {
  LatentField f;
  f.z = Eigen::MatrixXd::Zero(n_regions, p);
  f.gamma = Eigen::ArrayXXi::Zero(n_regions, p);
  f.forced = Eigen::ArrayXXi::Zero(n_regions, p);
  return f;
}

bool LatentField::consistent() const {
  for (int j = 0; j < n_covariates(); ++j) {
    for (int i = 0; i < n_regions(); ++i) {
      const bool pos = z(i, j) > 0.0;
      if (gamma(i, j) != (pos ? 1 : 0)) return false;
      if (forced(i, j) && !pos) return false;
    }
  }
  return true;
}

void SsipConfig::validate() const {
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("SsipConfig: rho must be in [0,1]");
  if (rho_update == RhoUpdate::kMetropolis) {
    if (rho_step <= 0.0) throw std::invalid_argument("SsipConfig: rho_step must be positive");
    if (rho >= 1.0) throw std::invalid_argument("SsipConfig: rho must be < 1 when estimated");
  }
}

namespace {

std::span<const double> column_span(const LatentField& field, int j) {
  return {field.z.col(j).data(), static_cast<std::size_t>(field.n_regions())};
}

}  // namespace

double conditional_inclusion_prob(const LatentField& field, const AdjacencyGraph& graph, int i, int j,
                                  double rho) {
  const double s = neighbor_sum(column_span(field, j), graph, i);
  const double n_i = static_cast<double>(graph.degree(i));
  return norm_cdf(rho * s / std::sqrt(n_i));
}

double sample_z_given_gamma(LatentField& field, const AdjacencyGraph& graph, int i, int j, double rho,
                            Rng& rng) {
  const double s = neighbor_sum(column_span(field, j), graph, i);
  const double n_i = static_cast<double>(graph.degree(i));
  const double mean = rho * s / n_i;
  const double sd = 1.0 / std::sqrt(n_i);
  const double draw = rtnorm_sign(mean, sd, field.gamma(i, j) == 1, rng);
  field.z(i, j) = draw;
  return draw;
}

LatentField sample_prior_field(const AdjacencyGraph& graph, double rho, int p, Rng& rng,
                               const Eigen::ArrayXXi* forced) {
  if (rho >= 1.0) throw std::invalid_argument("sample_prior_field: joint prior requires rho < 1");
  if (rho < 0.0) throw std::invalid_argument("sample_prior_field: rho must be nonnegative");
  if (p < 1) throw std::invalid_argument("sample_prior_field: p must be positive");
  const int n = graph.n_regions();

  LatentField field = LatentField::zeros(n, p);
  if (forced) {
    if (forced->rows() != n || forced->cols() != p) {
      throw std::invalid_argument("sample_prior_field: forced mask shape mismatch");
    }
    field.forced = *forced;
  }

  const Eigen::SparseMatrix<double> q = car_precision(graph, rho);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(q);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("sample_prior_field: CAR precision factorization failed");
  }
  // P Q P^T = L L^T, so x = P^T L^{-T} eps has covariance Q^{-1}
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) eps(i) = rng.normal();
    Eigen::VectorXd x = llt.matrixU().solve(eps);
    field.z.col(j) = llt.permutationPinv() * x;
  }
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      field.gamma(i, j) = field.z(i, j) > 0.0 ? 1 : 0;
    }
  }
  // forced entries: pin gamma and refresh Z from the positive half of the
  // full conditional given the rest of the joint draw
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      if (field.forced(i, j)) {
        field.gamma(i, j) = 1;
        sample_z_given_gamma(field, graph, i, j, rho, rng);
      }
    }
  }
  return field;
}

double car_field_logdensity(const LatentField& field, const AdjacencyGraph& graph, double rho) {
  const int n = field.n_regions();
  const int p = field.n_covariates();
  const Eigen::SparseMatrix<double> q = car_precision(graph, rho);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(q);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("car_field_logdensity: factorization failed (rho too close to 1?)");
  }
  double logdet = 0.0;
  const Eigen::VectorXd diag = ldlt.vectorD();
  for (int i = 0; i < n; ++i) logdet += std::log(diag(i));
  double quad = 0.0;
  for (int j = 0; j < p; ++j) {
    quad += field.z.col(j).dot(q * field.z.col(j));
  }
  return 0.5 * p * logdet - 0.5 * quad;
}

double update_rho_mh(const LatentField& field, const AdjacencyGraph& graph, const SsipConfig& config,
                     double rho_current, Rng& rng) {
  config.validate();
  if (config.rho_update != RhoUpdate::kMetropolis) {
    throw std::logic_error("update_rho_mh: metropolis update not enabled");
  }
  const double hi = 1.0 - SsipConfig::kRhoEps;
  double prop = rho_current + config.rho_step * rng.normal();
  // reflect into [0, hi]
  while (prop < 0.0 || prop > hi) {
    if (prop < 0.0) prop = -prop;
    if (prop > hi) prop = 2.0 * hi - prop;
  }
  const double log_acc = car_field_logdensity(field, graph, prop) -
                         car_field_logdensity(field, graph, rho_current);
  if (std::log(rng.u01p()) < log_acc) return prop;
  return rho_current;
}

}  // namespace ssip
