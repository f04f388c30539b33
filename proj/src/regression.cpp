#include "ssip/regression.hpp"

#include <cmath>
#include <stdexcept>

#include "ssip/math_util.hpp"
#include "ssip/truncated_normal.hpp"

namespace ssip {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::vector<int> active_indices(const Eigen::ArrayXi& gamma_row) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(gamma_row.size()));
  for (int j = 0; j < gamma_row.size(); ++j) {
    if (gamma_row(j) != 0) idx.push_back(j);
  }
  return idx;
}

}  // namespace

void Hyper::validate() const {
  if (s0 <= 0.0 || a_tau <= 0.0 || b_tau <= 0.0 || a_sigma <= 0.0 || b_sigma <= 0.0) {
    throw std::invalid_argument("Hyper: s0, a_tau, b_tau, a_sigma, b_sigma must all be positive");
  }
}

double log_marginal_gaussian(const WorkingRegion& region, const Eigen::ArrayXi& gamma_row,
                             const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2) {
  const int m = region.m();
  if (m < 1) throw std::invalid_argument("log_marginal_gaussian: region has no observations");
  const std::vector<int> active = active_indices(gamma_row);
  const int q = static_cast<int>(active.size());

  const Eigen::ArrayXd inv_v = region.row_var.array().inverse();

  Eigen::VectorXd r = region.y;
  Eigen::MatrixXd xa(m, q);
  for (int k = 0; k < q; ++k) xa.col(k) = region.X.col(active[k]);
  if (q > 0) {
    Eigen::VectorXd mu_a(q);
    for (int k = 0; k < q; ++k) mu_a(k) = mu(active[k]);
    r -= xa * mu_a;
  }

  double logdet = region.row_var.array().log().sum();
  double quad = (r.array().square() * inv_v).sum();

  if (q > 0) {
    // B = T_A^{-1} + X_A^T V^{-1} X_A
    const Eigen::MatrixXd xv = inv_v.matrix().asDiagonal() * xa;
    Eigen::MatrixXd b = xa.transpose() * xv;
    for (int k = 0; k < q; ++k) {
      b(k, k) += 1.0 / tau2(active[k]);
      logdet += std::log(tau2(active[k]));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("log_marginal_gaussian: inner Cholesky failed");
    }
    const Eigen::MatrixXd& l = llt.matrixL();
    for (int k = 0; k < q; ++k) logdet += 2.0 * std::log(l(k, k));
    const Eigen::VectorXd u = xv.transpose() * r;
    quad -= u.dot(llt.solve(u));
  }

  const double out = -0.5 * (m * kLog2Pi + logdet + quad);
  if (!std::isfinite(out)) throw std::runtime_error("log_marginal_gaussian: non-finite value");
  return out;
}

void update_gamma_z(LatentField& field, const AdjacencyGraph& graph,
                    const std::vector<WorkingRegion>& regions, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& tau2, double rho, bool prior_only, Rng& rng) {
  const int n = field.n_regions();
  const int p = field.n_covariates();
  if (!prior_only && static_cast<int>(regions.size()) != n) {
    throw std::invalid_argument("update_gamma_z: regions/field size mismatch");
  }
  Eigen::ArrayXi gamma_row(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      if (field.forced(i, j)) {
        field.gamma(i, j) = 1;
        sample_z_given_gamma(field, graph, i, j, rho, rng);
        continue;
      }
      const double s = neighbor_sum({field.z.col(j).data(), static_cast<std::size_t>(n)}, graph, i);
      const double arg = rho * s / std::sqrt(static_cast<double>(graph.degree(i)));
      double logit = norm_logcdf(arg) - norm_logcdf(-arg);
      if (!prior_only) {
        gamma_row = field.gamma.row(i);
        gamma_row(j) = 1;
        const double lm1 = log_marginal_gaussian(regions[static_cast<std::size_t>(i)], gamma_row, mu, tau2);
        gamma_row(j) = 0;
        const double lm0 = log_marginal_gaussian(regions[static_cast<std::size_t>(i)], gamma_row, mu, tau2);
        logit += lm1 - lm0;
      }
      field.gamma(i, j) = rng.bernoulli(sigmoid(logit)) ? 1 : 0;
      sample_z_given_gamma(field, graph, i, j, rho, rng);
    }
  }
}

Eigen::VectorXd draw_beta_row(const WorkingRegion& region, const Eigen::ArrayXi& gamma_row,
                              const Eigen::VectorXd& mu, const Eigen::VectorXd& tau2, bool prior_only,
                              Rng& rng) {
  const int p = static_cast<int>(gamma_row.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const std::vector<int> active = active_indices(gamma_row);
  const int q = static_cast<int>(active.size());
  if (q == 0) return beta;

  if (prior_only) {
    for (int k : active) beta(k) = mu(k) + std::sqrt(tau2(k)) * rng.normal();
    return beta;
  }

  const int m = region.m();
  Eigen::MatrixXd xa(m, q);
  Eigen::VectorXd mu_a(q);
  for (int k = 0; k < q; ++k) {
    xa.col(k) = region.X.col(active[k]);
    mu_a(k) = mu(active[k]);
  }
  const Eigen::ArrayXd inv_v = region.row_var.array().inverse();
  const Eigen::MatrixXd xv = inv_v.matrix().asDiagonal() * xa;
  Eigen::MatrixXd big_m = xa.transpose() * xv;
  Eigen::VectorXd little_m = xv.transpose() * region.y;
  for (int k = 0; k < q; ++k) {
    big_m(k, k) += 1.0 / tau2(active[k]);
    little_m(k) += mu_a(k) / tau2(active[k]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(big_m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("draw_beta_row: Cholesky of the precision failed (mis-specified inputs?)");
  }
  const Eigen::VectorXd mean = llt.solve(little_m);
  Eigen::VectorXd eps(q);
  for (int k = 0; k < q; ++k) eps(k) = rng.normal();
  // M = L L^T; mean + L^{-T} eps has covariance M^{-1}
  const Eigen::VectorXd draw = mean + llt.matrixU().solve(eps);
  for (int k = 0; k < q; ++k) beta(active[k]) = draw(k);
  return beta;
}

void update_mu_tau2(const Eigen::MatrixXd& beta, const Eigen::ArrayXXi& gamma, const Hyper& hyper,
                    Eigen::VectorXd& mu, Eigen::VectorXd& tau2, Rng& rng) {
  const int n = static_cast<int>(beta.rows());
  const int p = static_cast<int>(beta.cols());
  for (int j = 0; j < p; ++j) {
    int count = 0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (gamma(i, j)) {
        ++count;
        sum += beta(i, j);
      }
    }
    // mu_j | beta, tau^2
    const double prec = 1.0 / hyper.s0 + count / tau2(j);
    const double mean = (hyper.mu0 / hyper.s0 + sum / tau2(j)) / prec;
    mu(j) = mean + rng.normal() / std::sqrt(prec);
    // tau^2_j | beta, mu
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      if (gamma(i, j)) {
        const double d = beta(i, j) - mu(j);
        ss += d * d;
      }
    }
    tau2(j) = rng.inv_gamma_rv(hyper.a_tau + 0.5 * count, hyper.b_tau + 0.5 * ss);
  }
}

}  // namespace ssip
