#pragma once

#include <cstdint>
#include <random>

namespace ssip {

// Random draws used by the samplers. All distributions are implemented on
// top of a single mt19937_64 stream so that a given seed reproduces the
// same chain on any platform (the std:: distribution objects do not make
// that guarantee).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream, e.g. one per chain or per replicate.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  double u01();   // uniform on [0, 1)
  double u01p();  // uniform on (0, 1)

  double normal();               // standard normal, Marsaglia polar
  double exponential();          // rate 1
  double gamma_rv(double shape, double rate);
  double inv_gamma_rv(double shape, double scale);
  double beta_rv(double a, double b);
  double chisq(double df);
  long poisson(double mean);
  long neg_binomial(double h, double p);  // number of successes before h failures
  bool bernoulli(double p);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ssip
