#pragma once

#include "ssip/rng.hpp"

namespace ssip {

/// Tuning constants for the PG(b, c) sampler. Exposed so sensitivity tests
/// can vary the crossover and series truncation.
struct PgConfig {
  double normal_approx_threshold = 170.0;  // above this b, moment-matched Gaussian
  int gamma_series_terms = 200;            // truncation of the sum-of-gammas for fractional b
};

/// E[PG(b, c)] = (b / 2c) tanh(c / 2), with the c -> 0 limit b / 4.
double pg_mean(double b, double c);

/// Var[PG(b, c)] = b (sinh(c) - c) sech^2(c/2) / (4 c^3), limit b / 24.
double pg_var(double b, double c);

/// Draw from the Polya-Gamma distribution PG(b, c), b > 0.
/// Exact alternating-series rejection (Devroye-style; Polson, Scott &
/// Windle 2013) for each unit of b, a truncated sum-of-gammas for the
/// fractional remainder, and a moment-matched Gaussian for large b.
double sample_pg(double b, double c, Rng& rng, const PgConfig& config = {});

}  // namespace ssip
