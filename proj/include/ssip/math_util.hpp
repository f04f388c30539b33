#pragma once

#include <span>
#include <vector>

namespace ssip {

// standard normal cdf / log cdf / quantile, stable in both tails
double norm_cdf(double x);
double norm_logcdf(double x);
double norm_quantile(double p);

// log(1 + e^x) without overflow
double log1pexp(double x);

// inverse-logit with the usual two-branch guard
double sigmoid(double x);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // denominator n - 1
double sd(std::span<const double> xs);

// type-7 sample quantile (linear interpolation), q in [0, 1]
double quantile(std::vector<double> xs, double q);

// Pearson correlation; NaN when either side has zero variance
double pearson(std::span<const double> x, std::span<const double> y);

double logsumexp(std::span<const double> xs);

// regularized incomplete beta I_x(a, b); wraps boost
double inc_beta(double a, double b, double x);

// CDF of NB(h, p) (number of successes before h failures, success prob p)
double nb_cdf(double y, double h, double p);

}  // namespace ssip
