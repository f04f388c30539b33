#include "ssip/polya_gamma.hpp"

#include <cmath>
#include <stdexcept>

#include "ssip/math_util.hpp"

namespace ssip {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kPiSq = kPi * kPi;
constexpr double kTrunc = 0.6366197723675814;  // 2 / pi, the series crossover point

// Piecewise coefficients a_n(x) of the alternating series for the J*(1, .)
// density (Polson, Scott & Windle 2013, eqs. 12-13).
double a_coef(int n, double x) {
  const double np5 = n + 0.5;
  if (x <= kTrunc) {
    return std::exp(std::log(kPi) + std::log(np5) + 1.5 * (std::log(2.0 / kPi) - std::log(x))
                    - 2.0 * np5 * np5 / x);
  }
  return kPi * np5 * std::exp(-0.5 * np5 * np5 * kPiSq * x);
}

// Probability of proposing from the truncated-exponential (right) piece.
double mass_texpon(double z) {
  const double fz = 0.125 * kPiSq + 0.5 * z * z;
  const double b = std::sqrt(1.0 / kTrunc) * (kTrunc * z - 1.0);
  const double a = -std::sqrt(1.0 / kTrunc) * (kTrunc * z + 1.0);

  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + norm_logcdf(b);
  const double xa = x0 + z + norm_logcdf(a);
  const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);  // qdivp may be inf; then the mass is 0
}

// Inverse-Gaussian(mu, lambda=1) restricted to (0, kTrunc); Windle (2013)
// Algorithms 3-4.
double rtigauss(double z, Rng& rng) {
  z = std::fabs(z);
  const double t = kTrunc;
  double x = t + 1.0;
  if (1.0 / t > z) {  // mu = 1/z > t: sample via chi-square-like rejection
    double alpha = 0.0;
    while (rng.u01() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * t;
      x = t / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.u01() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

// Exact PG(1, c) draw: sample J*(1, |c|/2) by alternating-series rejection
// and scale by 1/4.
double sample_pg1(double c, Rng& rng) {
  const double z = 0.5 * std::fabs(c);
  const double fz = 0.125 * kPiSq + 0.5 * z * z;
  const double p_right = mass_texpon(z);
  while (true) {
    double x;
    if (rng.u01() < p_right) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = rtigauss(z, rng);
    }
    double s = a_coef(0, x);
    const double y = rng.u01() * s;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        s -= a_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += a_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

// PG(b, c) for fractional b in (0, 1) via the weighted sum-of-gammas
// representation, truncated at n_terms.
double sample_pg_gamma_series(double b, double c, int n_terms, Rng& rng) {
  const double c_term = c * c / (4.0 * kPiSq);
  double s = 0.0;
  for (int k = 1; k <= n_terms; ++k) {
    const double d = (k - 0.5) * (k - 0.5) + c_term;
    s += rng.gamma_rv(b, 1.0) / d;
  }
  return s / (2.0 * kPiSq);
}

}  // namespace

double pg_mean(double b, double c) {
  if (b <= 0.0) throw std::invalid_argument("pg_mean: b must be positive");
  const double ac = std::fabs(c);
  if (ac < 1e-8) return 0.25 * b;
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_var(double b, double c) {
  if (b <= 0.0) throw std::invalid_argument("pg_var: b must be positive");
  const double ac = std::fabs(c);
  if (ac < 1e-2) {
    // series of (sinh c - c) sech^2(c/2) / (4 c^3) about 0
    return b * (1.0 / 24.0 - ac * ac / 120.0);
  }
  const double sech_half = 1.0 / std::cosh(0.5 * ac);
  return b * (std::sinh(ac) - ac) * sech_half * sech_half / (4.0 * ac * ac * ac);
}

double sample_pg(double b, double c, Rng& rng, const PgConfig& config) {
  if (b <= 0.0) throw std::invalid_argument("sample_pg: b must be positive");
  if (b > config.normal_approx_threshold) {
    const double m = pg_mean(b, c);
    const double s = std::sqrt(pg_var(b, c));
    double x = m + s * rng.normal();
    while (x <= 0.0) x = m + s * rng.normal();  // PG support is positive
    return x;
  }
  double total = 0.0;
  const int whole = static_cast<int>(std::floor(b));
  for (int i = 0; i < whole; ++i) total += sample_pg1(c, rng);
  const double frac = b - whole;
  if (frac > 0.0) total += sample_pg_gamma_series(frac, c, config.gamma_series_terms, rng);
  return total;
}

}  // namespace ssip
