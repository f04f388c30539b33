#include "ssip/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ssip {

namespace {

// splitmix64, used to scramble (seed, stream) pairs into well separated
// mt19937_64 seeds.
std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  gen_.seed(splitmix64(s));
}

Rng Rng::for_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream + 0x632be59bd9b4e019ULL;
  return Rng(a ^ splitmix64(t));
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::u01() {
  // 53-bit mantissa, in [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::u01p() {
  // (0, 1): offset by half an ulp of the 53-bit grid
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * u01() - 1.0;
    v = 2.0 * u01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::exponential() { return -std::log(u01p()); }

double Rng::gamma_rv(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0) throw std::invalid_argument("gamma_rv: shape and rate must be positive");
  if (shape < 1.0) {
    // Boost shape via Gamma(a+1) * U^{1/a}
    const double g = gamma_rv(shape + 1.0, 1.0);
    return g * std::pow(u01p(), 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = u01p();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::inv_gamma_rv(double shape, double scale) {
  return scale > 0.0 ? 1.0 / gamma_rv(shape, scale) : throw std::invalid_argument("inv_gamma_rv: scale must be positive");
}

double Rng::beta_rv(double a, double b) {
  const double x = gamma_rv(a, 1.0);
  const double y = gamma_rv(b, 1.0);
  return x / (x + y);
}

double Rng::chisq(double df) { return gamma_rv(0.5 * df, 0.5); }

long Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Knuth multiplication
    const double limit = std::exp(-mean);
    double prod = u01p();
    long k = 0;
    while (prod > limit) {
      prod *= u01p();
      ++k;
    }
    return k;
  }
  // Hoermann (1993) PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  while (true) {
    const double u = u01() - 0.5;
    const double v = u01p();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <= kf * log_mean - mean - std::lgamma(kf + 1.0)) {
      return static_cast<long>(kf);
    }
  }
}

long Rng::neg_binomial(double h, double p) {
  if (h <= 0.0) throw std::invalid_argument("neg_binomial: h must be positive");
  if (p <= 0.0) return 0;
  if (p >= 1.0) throw std::invalid_argument("neg_binomial: p must be < 1");
  // gamma-Poisson mixture: lambda ~ Gamma(h, (1-p)/p), Y | lambda ~ Pois(lambda)
  const double lambda = gamma_rv(h, (1.0 - p) / p);
  return poisson(lambda);
}

bool Rng::bernoulli(double p) { return u01() < p; }

}  // namespace ssip
