#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace phprior {

struct Seed {
  std::uint64_t value = 0;
};

// Bumped whenever any draw sequence produced by Rng changes.
inline constexpr int kRngVersion = 1;

// Derives an independent stream seed (splitmix64 of seed and stream index).
Seed derive_seed(Seed base, std::uint64_t stream);

// Seeded generator: mt19937_64 engine with Boost.Random distributions, whose
// algorithms are fixed (unlike the std:: distributions). Not thread-safe; use
// one instance per thread, seeded through derive_seed.
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double normal(double mean = 0.0, double sd = 1.0);
  double exponential(double rate = 1.0);
  // Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate = 1.0);
  // ln of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma_variate(double shape);
  double beta(double a, double b);
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t n, double p);
  // Zero entries of alpha yield exact zeros (structural zeros).
  std::vector<double> dirichlet(std::span<const double> alpha);
  std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace phprior
