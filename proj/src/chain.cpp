#include "ssip/chain.hpp"

#include <stdexcept>

#include "ssip/math_util.hpp"

namespace ssip {

void RunSettings::validate() const {
  if (iterations < 1) throw std::invalid_argument("RunSettings: iterations must be positive");
  if (effective_burn_in() < 0 || effective_burn_in() >= iterations) {
    throw std::invalid_argument("RunSettings: need iterations > burn_in >= 0");
  }
  if (thin < 1) throw std::invalid_argument("RunSettings: thin must be >= 1");
  if (chains < 1) throw std::invalid_argument("RunSettings: chains must be >= 1");
}

void ChainDraws::reserve(long expected_draws) {
  const std::size_t block = static_cast<std::size_t>(n) * p;
  beta.reserve(expected_draws * block);
  z.reserve(expected_draws * block);
  gamma.reserve(expected_draws * block);
  scale.reserve(expected_draws * n);
  mu.reserve(expected_draws * p);
  tau2.reserve(expected_draws * p);
  rho.reserve(expected_draws);
}

long PosteriorChain::total_draws() const {
  long t = 0;
  for (const auto& c : chains) t += c.n_draws;
  return t;
}

double PosteriorChain::inclusion_prob(int i, int j) const {
  long num = 0, den = 0;
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) num += c.gamma_at(d, i, j);
    den += c.n_draws;
  }
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::vector<double> PosteriorChain::collect_beta(int i, int j) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.beta_at(d, i, j));
  }
  return out;
}

std::vector<double> PosteriorChain::collect_z(int i, int j) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.z_at(d, i, j));
  }
  return out;
}

double PosteriorChain::beta_mean(int i, int j) const {
  const auto xs = collect_beta(i, j);
  return mean(xs);
}

double PosteriorChain::beta_quantile_value(int i, int j, double q) const {
  return quantile(collect_beta(i, j), q);
}

std::vector<double> PosteriorChain::collect_scale(int i) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.scale[static_cast<std::size_t>(d) * n_regions + i]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_mu(int j) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.mu[static_cast<std::size_t>(d) * p + j]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_tau2(int j) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.tau2[static_cast<std::size_t>(d) * p + j]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_rho() const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.rho[static_cast<std::size_t>(d)]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_alpha(int i) const {
  std::vector<double> out;
  for (const auto& c : chains) {
    if (c.alpha.empty()) continue;
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.alpha[static_cast<std::size_t>(d) * n_regions + i]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_zeta(int t) const {
  std::vector<double> out;
  for (const auto& c : chains) {
    if (c.zeta.empty()) continue;
    for (long d = 0; d < c.n_draws; ++d) out.push_back(c.zeta[static_cast<std::size_t>(d) * T + t]);
  }
  return out;
}

std::vector<double> PosteriorChain::collect_zero_cell_psi(int region, int time_idx, int intercept_col) const {
  if (region < 0 || region >= n_regions) throw std::out_of_range("collect_zero_cell_psi: region");
  if (time_idx < 0 || time_idx >= T) throw std::out_of_range("collect_zero_cell_psi: time index");
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) {
    for (long d = 0; d < c.n_draws; ++d) {
      double psi = 0.0;
      if (intercept_col >= 0) psi += c.beta_at(d, region, intercept_col);
      if (!c.alpha.empty()) psi += c.alpha[static_cast<std::size_t>(d) * n_regions + region];
      if (!c.zeta.empty()) psi += c.zeta[static_cast<std::size_t>(d) * T + time_idx];
      if (!c.global_level.empty()) psi += c.global_level[static_cast<std::size_t>(d)];
      out.push_back(psi);
    }
  }
  return out;
}

}  // namespace ssip
