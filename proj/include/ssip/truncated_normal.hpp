#pragma once

#include "ssip/rng.hpp"

namespace ssip {

/// Standard normal draw conditioned on X > a. Inverse-CDF in the body of
/// the distribution; Robert (1995) exponential rejection once a is more
/// than 5 sd into the upper tail, where the inverse CDF loses precision.
double rtnorm_lower(double a, Rng& rng);

/// Standard normal draw conditioned on X < b.
double rtnorm_upper(double b, Rng& rng);

/// N(mean, sd^2) draw truncated to the positive half line (0, inf) when
/// positive is true, to (-inf, 0] otherwise.
double rtnorm_sign(double mean, double sd, bool positive, Rng& rng);

/// CDF of the standard normal truncated to [a, inf), evaluated at x.
double truncnorm_lower_cdf(double a, double x);

/// CDF of the standard normal truncated to (-inf, b], evaluated at x.
double truncnorm_upper_cdf(double b, double x);

}  // namespace ssip
