#include "phprior/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "phprior/errors.hpp"

namespace phprior {

Seed derive_seed(Seed base, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return {mix(mix(base.value) ^ mix(stream + 0x632be59bd9b4e019ULL))};
}

Rng::Rng(Seed seed) : engine_(seed.value) {}

double Rng::uniform() {
  // 53 random bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd) {
  if (!(sd >= 0.0)) throw DomainError("normal: sd must be non-negative");
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(engine_);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential: rate must be positive");
  return -std::log(uniform_open()) / rate;
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be positive");
  if (shape >= 1.0) {
    boost::random::gamma_distribution<double> dist(shape, 1.0);
    return std::log(dist(engine_));
  }
  // G(shape) = G(shape + 1) * U^(1 / shape)
  boost::random::gamma_distribution<double> dist(shape + 1.0, 1.0);
  const double g = dist(engine_);
  return std::log(g) + std::log(uniform_open()) / shape;
}

double Rng::gamma(double shape, double rate) {
  if (!(rate > 0.0)) throw DomainError("gamma: rate must be positive");
  return std::exp(log_gamma_variate(shape)) / rate;
}

double Rng::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta: parameters must be positive");
  const double la = log_gamma_variate(a);
  const double lb = log_gamma_variate(b);
  const double m = std::max(la, lb);
  const double ea = std::exp(la - m), eb = std::exp(lb - m);
  return ea / (ea + eb);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson: mean must be finite and non-negative");
  if (mean == 0.0) return 0;
  // boost's poisson uses an int result type; large means are split.
  constexpr double kChunk = 1e9;
  std::int64_t total = 0;
  while (mean > kChunk) {
    boost::random::poisson_distribution<std::int64_t, double> dist(kChunk);
    total += dist(engine_);
    mean -= kChunk;
  }
  boost::random::poisson_distribution<std::int64_t, double> dist(mean);
  return total + dist(engine_);
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
  if (n < 0) throw DomainError("binomial: negative n");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial: p outside [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  boost::random::binomial_distribution<std::int64_t, double> dist(n, p);
  return dist(engine_);
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  if (alpha.empty()) throw DomainError("dirichlet: empty parameter vector");
  std::vector<double> logs(alpha.size(), -std::numeric_limits<double>::infinity());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] < 0.0 || !std::isfinite(alpha[k])) throw DomainError("dirichlet: negative parameter");
    if (alpha[k] == 0.0) continue;
    logs[k] = log_gamma_variate(alpha[k]);
    max_log = std::max(max_log, logs[k]);
  }
  if (max_log == -std::numeric_limits<double>::infinity()) {
    throw DomainError("dirichlet: all parameters are zero");
  }
  std::vector<double> out(alpha.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] == 0.0) continue;
    out[k] = std::exp(logs[k] - max_log);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<std::int64_t> Rng::multinomial(std::int64_t n, std::span<const double> probs) {
  if (n < 0) throw DomainError("multinomial: negative n");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("multinomial: negative probability");
    total += p;
  }
  if (probs.empty() || !(total > 0.0)) throw DomainError("multinomial: probabilities must sum to a positive value");
  // Sequential conditional binomials.
  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t remaining = n;
  double mass_left = total;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double p = mass_left > 0.0 ? std::clamp(probs[k] / mass_left, 0.0, 1.0) : 0.0;
    counts[k] = binomial(remaining, p);
    remaining -= counts[k];
    mass_left -= probs[k];
  }
  if (remaining > 0) {
    // Remainder goes to the last category with positive mass.
    std::size_t last = probs.size() - 1;
    while (last > 0 && probs[last] == 0.0) --last;
    counts[last] += remaining;
  }
  return counts;
}

}  // namespace phprior
