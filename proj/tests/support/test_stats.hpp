#pragma once

// Statistical helpers shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace test_stats {

// Kolmogorov asymptotic tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// one-sample KS test p-value against a continuous CDF
inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  const double sn = std::sqrt(n);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

// two-sample KS test p-value
inline double ks2_pvalue(std::vector<double> xs, std::vector<double> ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n1 = xs.size(), n2 = ys.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n1 && j < n2) {
    const double x = std::min(xs[i], ys[j]);
    while (i < n1 && xs[i] <= x) ++i;
    while (j < n2 && ys[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double ne = std::sqrt(static_cast<double>(n1) * n2 / static_cast<double>(n1 + n2));
  return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sd_of(std::span<const double> xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double se_iid(std::span<const double> xs) {
  return sd_of(xs) / std::sqrt(static_cast<double>(xs.size()));
}

// batch-means standard error for an autocorrelated chain
inline double se_batch(std::span<const double> xs, int n_batches = 50) {
  const std::size_t len = xs.size() / static_cast<std::size_t>(n_batches);
  std::vector<double> bm;
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += xs[b * len + k];
    bm.push_back(s / static_cast<double>(len));
  }
  return sd_of(bm) / std::sqrt(static_cast<double>(n_batches));
}

// |mean(a) - mean(b)| <= z * sqrt(se_a^2 + se_b^2), chain vs iid samples
inline bool means_agree(std::span<const double> chain, std::span<const double> iid, double z = 3.0) {
  const double se = std::sqrt(se_batch(chain) * se_batch(chain) + se_iid(iid) * se_iid(iid));
  return std::fabs(mean_of(chain) - mean_of(iid)) <= z * se;
}

inline std::vector<double> squares(std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] * xs[i];
  return out;
}

}  // namespace test_stats
