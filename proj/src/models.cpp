#include "phprior/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "phprior/errors.hpp"
#include "phprior/special.hpp"

namespace phprior {

namespace {

// Guards the factor lists built from raw counts.
constexpr std::int64_t kMaxFactors = 200000;

const Scalar kOne = Scalar::integer(1);
const Scalar kZero = Scalar::integer(0);

void check_counts(const std::vector<std::int64_t>& counts, std::int64_t min_value, const char* who) {
  std::int64_t total = 0;
  for (auto n : counts) {
    if (n < min_value) {
      throw DomainError(std::string(who) + ": counts must be >= " + std::to_string(min_value));
    }
    total += n;
    if (total > kMaxFactors) throw SizeBudgetExceeded(std::string(who) + ": total count too large for a factored form");
  }
}

std::int64_t sum(const std::vector<std::int64_t>& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); }

}  // namespace

double rational_moment(const RationalDensity& f, int k, const ExpansionOptions& opts) {
  if (k < 0) throw DomainError("rational_moment: k must be non-negative");
  if (k == 0) return 1.0;
  RationalDensity tilted = f;
  tilted.multiply_power(k);
  if (tilted.denominator_degree() - tilted.numerator_degree() < 2) {
    throw MomentDoesNotExist("moment of order " + std::to_string(k) + " does not exist (degree gap " +
                             std::to_string(f.denominator_degree() - f.numerator_degree()) + ")");
  }
  return std::exp(tilted.expand(opts).log_norm_const - f.expand(opts).log_norm_const);
}

// ---------------------------------------------------------------------------
// negative binomial

RationalDensity nb_posterior_rational(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior, int tilt) {
  prior.validate();
  check_counts(counts, 0, "nb_marginal_posterior");
  const auto& p = prior.prior;
  const auto K = static_cast<std::int64_t>(counts.size());
  const std::int64_t N = sum(counts);
  RationalDensity r;
  // the Beta link's [c alpha + a]^b cancels the prior's denominator
  r.multiply_rising(kOne, kZero, p.m);
  for (auto n : counts) r.multiply_rising(kOne, kZero, static_cast<int>(n));
  r.multiply_power(p.d + tilt);
  r.divide_rising(p.c + Scalar::integer(K), p.a, static_cast<int>(N + p.b));
  return r;
}

ResidueExpansion nb_marginal_posterior(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior,
                                       const ExpansionOptions& opts) {
  return nb_posterior_rational(counts, prior).expand(opts);
}

double nb_posterior_mean_alpha(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior) {
  return rational_moment(nb_posterior_rational(counts, prior), 1);
}

BetaParams nb_pi_conditional(double alpha, const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior) {
  if (!(alpha > 0.0)) throw DomainError("nb_pi_conditional: alpha must be positive");
  check_counts(counts, 0, "nb_pi_conditional");
  const auto& p = prior.prior;
  const double K = static_cast<double>(counts.size());
  return {(p.c.value + K) * alpha + p.a.value, static_cast<double>(sum(counts)) + p.b};
}

std::int64_t nb_draw(double alpha, double pi, Rng& rng) {
  if (!(alpha > 0.0)) throw DomainError("nb_draw: alpha must be positive");
  if (!(pi > 0.0 && pi <= 1.0)) throw DomainError("nb_draw: pi must lie in (0, 1]");
  if (pi == 1.0) return 0;
  const double lambda = rng.gamma(alpha, pi / (1.0 - pi));
  return rng.poisson(lambda);
}

std::vector<std::int64_t> nb_sample(double alpha, double pi, std::size_t n, Seed seed) {
  Rng rng(seed);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = nb_draw(alpha, pi, rng);
  return out;
}

NBGenerated nb_generate(const NBCoupledPrior& prior, std::size_t n_draws, Seed seed, std::size_t max_bin) {
  prior.validate();
  const Pochhammer dist(prior.prior);
  const auto& p = prior.prior;
  // alpha by inverse-CDF on its own stream, pi and n on a second one
  const auto alphas = dist.sample(n_draws, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  NBGenerated out;
  out.counts.reserve(n_draws);
  out.histogram.assign(max_bin + 1, 0);
  std::size_t zeros = 0;
  for (double alpha : alphas) {
    // alpha can underflow to 0 for priors with mass piling at the origin
    const double a = std::max(alpha, std::numeric_limits<double>::min());
    const double pi = rng.beta(p.c.value * a + p.a.value, static_cast<double>(p.b));
    const auto n = nb_draw(a, std::max(pi, std::numeric_limits<double>::min()), rng);
    out.counts.push_back(n);
    if (n == 0) ++zeros;
    if (static_cast<std::size_t>(n) <= max_bin) {
      ++out.histogram[static_cast<std::size_t>(n)];
    } else {
      ++out.overflow;
    }
  }
  out.zero_fraction = n_draws ? static_cast<double>(zeros) / static_cast<double>(n_draws) : 0.0;
  std::map<std::int64_t, std::size_t> freq;
  for (auto n : out.counts) {
    if (n > 0) ++freq[n];
  }
  std::size_t best = 0;
  for (const auto& [v, f] : freq) {
    if (f > best) {
      best = f;
      out.nonzero_mode = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// negative multinomial

double nm_marginal_log_likelihood(double alpha, std::int64_t N, int K) {
  if (!(alpha > 0.0)) throw DomainError("nm_marginal_log_likelihood: alpha must be positive");
  if (N < 0 || K < 0) throw DomainError("nm_marginal_log_likelihood: N and K must be non-negative");
  return std::log(alpha) - log_rising(alpha + static_cast<double>(N), K + 1);
}

RationalDensity nm_posterior_rational(std::int64_t N, int K, const PochhammerParams& prior, int tilt) {
  prior.validate();
  if (N < 0 || K < 0) throw DomainError("nm_posterior: N and K must be non-negative");
  if (N > kMaxFactors) throw SizeBudgetExceeded("nm_posterior: N too large for a factored form");
  RationalDensity r = ph_rational(prior);
  r.multiply_power(1 + tilt);
  r.divide_rising(kOne, Scalar::integer(N), K + 1);
  return r;
}

ResidueExpansion nm_posterior(std::int64_t N, int K, const PochhammerParams& prior, const ExpansionOptions& opts) {
  return nm_posterior_rational(N, K, prior).expand(opts);
}

// ---------------------------------------------------------------------------
// generalized Dirichlet-multinomial

std::vector<double> gdm_stick_to_probs(const std::vector<double>& Z) {
  for (double z : Z) {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("gdm_stick_to_probs: sticks must lie in (0, 1)");
  }
  std::vector<double> pi;
  pi.reserve(Z.size() + 1);
  double rest = 1.0;
  for (double z : Z) {
    pi.push_back(z * rest);
    rest *= 1.0 - z;
  }
  pi.push_back(rest);
  return pi;
}

std::vector<double> gdm_probs_to_stick(const std::vector<double>& pi) {
  if (pi.size() < 2) throw DomainError("gdm_probs_to_stick: need at least two categories");
  double total = 0.0;
  for (double p : pi) {
    if (!(p > 0.0)) throw DomainError("gdm_probs_to_stick: probabilities must be positive");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-10) throw DomainError("gdm_probs_to_stick: probabilities must sum to 1");
  std::vector<double> Z;
  Z.reserve(pi.size() - 1);
  // remaining mass summed from the right, which keeps relative accuracy when
  // the leading sticks are close to 1
  std::vector<double> tail(pi.size() + 1, 0.0);
  for (std::size_t j = pi.size(); j-- > 0;) tail[j] = tail[j + 1] + pi[j];
  for (std::size_t j = 0; j + 1 < pi.size(); ++j) Z.push_back(pi[j] / tail[j]);
  return Z;
}

std::vector<double> gdm_sample_probs(const std::vector<double>& alpha, const std::vector<double>& beta, Rng& rng) {
  if (alpha.size() != beta.size() || alpha.empty()) {
    throw ShapeMismatch("gdm_sample_probs: need K - 1 >= 1 matching alpha and beta shapes");
  }
  std::vector<double> pi;
  double rest = 1.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double z = rng.beta(alpha[k], beta[k]);
    pi.push_back(z * rest);
    rest *= 1.0 - z;
  }
  pi.push_back(rest);
  return pi;
}

bool gdm_reduces_to_dirichlet(const std::vector<double>& alpha, const std::vector<double>& beta) {
  if (alpha.size() != beta.size()) return false;
  for (std::size_t k = 1; k < alpha.size(); ++k) {
    const double want = alpha[k] + beta[k];
    if (std::fabs(beta[k - 1] - want) > 1e-12 * want) return false;
  }
  return true;
}

std::optional<std::vector<double>> gdm_dirichlet_parameters(const std::vector<double>& alpha,
                                                            const std::vector<double>& beta) {
  if (alpha.empty() || !gdm_reduces_to_dirichlet(alpha, beta)) return std::nullopt;
  std::vector<double> out = alpha;
  out.push_back(beta.back());
  return out;
}

std::string ShapeSpec::label() const {
  if (fixed) {
    std::ostringstream os;
    os << *fixed;
    return os.str();
  }
  return prior.to_string();
}

Curve gdm_z_density(const ShapeSpec& alpha, const ShapeSpec& beta, std::size_t n_draws, std::size_t bins, Seed seed) {
  if (bins == 0 || n_draws == 0) throw DomainError("gdm_z_density: need bins >= 1 and n_draws >= 1");
  for (const auto* s : {&alpha, &beta}) {
    if (s->fixed && !(*s->fixed > 0.0)) throw DomainError("gdm_z_density: fixed shapes must be positive");
    if (!s->fixed) s->prior.validate();
  }
  std::vector<double> av, bv;
  if (!alpha.fixed) av = ph_sample(alpha.prior, n_draws, derive_seed(seed, 0));
  if (!beta.fixed) bv = ph_sample(beta.prior, n_draws, derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));
  std::vector<double> hist(bins, 0.0);
  constexpr double kTiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < n_draws; ++i) {
    const double a = alpha.fixed ? *alpha.fixed : std::max(av[i], kTiny);
    const double b = beta.fixed ? *beta.fixed : std::max(bv[i], kTiny);
    const double z = rng.beta(a, b);
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(z * static_cast<double>(bins)));
    hist[bin] += 1.0;
  }
  Curve c;
  c.name = "Z ~ Beta(alpha = " + alpha.label() + ", beta = " + beta.label() + ")";
  c.headers = {"density"};
  c.columns.assign(1, {});
  const double width = 1.0 / static_cast<double>(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    c.x.push_back((static_cast<double>(j) + 0.5) * width);
    c.columns[0].push_back(hist[j] / (static_cast<double>(n_draws) * width));
  }
  return c;
}

std::vector<Curve> gdm_halfhorseshoe_density_curves(std::size_t n_draws, std::size_t bins, Seed seed) {
  const auto hh = ShapeSpec::random(kDefaultPrior);
  std::vector<Curve> out;
  std::uint64_t stream = 0;
  for (double b : {0.5, 1.0, 2.0, 5.0}) {
    out.push_back(gdm_z_density(hh, ShapeSpec::constant(b), n_draws, bins, derive_seed(seed, stream++)));
  }
  out.push_back(gdm_z_density(hh, hh, n_draws, bins, derive_seed(seed, stream++)));
  return out;
}

// ---------------------------------------------------------------------------
// Ewens sampling formula

AllelicPartition AllelicPartition::from_pairs(const std::vector<std::pair<std::int64_t, std::int64_t>>& j_mj) {
  AllelicPartition p;
  for (const auto& [j, mj] : j_mj) {
    if (j < 1) throw DomainError("AllelicPartition: multiplicity index j must be >= 1");
    if (mj < 0) throw DomainError("AllelicPartition: m_j must be non-negative");
    if (j > kMaxFactors) throw SizeBudgetExceeded("AllelicPartition: j too large");
    if (static_cast<std::int64_t>(p.m.size()) < j) p.m.resize(static_cast<std::size_t>(j), 0);
    p.m[static_cast<std::size_t>(j - 1)] += mj;
  }
  p.validate();
  return p;
}

std::int64_t AllelicPartition::n() const {
  std::int64_t n = 0;
  for (std::size_t j = 0; j < m.size(); ++j) n += static_cast<std::int64_t>(j + 1) * m[j];
  return n;
}

std::int64_t AllelicPartition::alleles() const { return sum(m); }

void AllelicPartition::validate() const {
  for (auto v : m) {
    if (v < 0) throw DomainError("AllelicPartition: m_j must be non-negative");
  }
  if (n() == 0) throw DomainError("AllelicPartition: empty partition (n = 0)");
  if (n() > kMaxFactors) throw SizeBudgetExceeded("AllelicPartition: n too large");
}

double esf_log_prob(const AllelicPartition& partition, double alpha) {
  partition.validate();
  if (!(alpha > 0.0)) throw DomainError("esf_log_prob: alpha must be positive");
  const std::int64_t n = partition.n();
  double s = log_factorial(n) - log_rising(alpha, n);
  const double la = std::log(alpha);
  for (std::size_t j = 0; j < partition.m.size(); ++j) {
    const auto mj = partition.m[j];
    if (mj == 0) continue;
    s += static_cast<double>(mj) * (la - std::log(static_cast<double>(j + 1))) - log_factorial(mj);
  }
  return s;
}

std::vector<AllelicPartition> enumerate_partitions(int n) {
  if (n < 1 || n > 40) throw DomainError("enumerate_partitions: need 1 <= n <= 40");
  std::vector<AllelicPartition> out;
  std::vector<std::int64_t> m(static_cast<std::size_t>(n), 0);
  // parts chosen in non-increasing order: largest allowed part `max_part`
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.push_back({m});
      return;
    }
    for (int j = std::min(remaining, max_part); j >= 1; --j) {
      ++m[static_cast<std::size_t>(j - 1)];
      self(self, remaining - j, j);
      --m[static_cast<std::size_t>(j - 1)];
    }
  };
  rec(rec, n, n);
  return out;
}

RationalDensity esf_posterior_rational(const AllelicPartition& partition, const PochhammerParams& prior, int tilt) {
  partition.validate();
  prior.validate();
  RationalDensity r = ph_rational(prior);
  r.multiply_power(static_cast<int>(partition.alleles()) + tilt);
  r.divide_rising(kOne, kZero, static_cast<int>(partition.n()));
  return r;
}

ResidueExpansion esf_posterior(const AllelicPartition& partition, const PochhammerParams& prior,
                               const ExpansionOptions& opts) {
  return esf_posterior_rational(partition, prior).expand(opts);
}

double esf_posterior_mean(const AllelicPartition& partition, const PochhammerParams& prior) {
  return rational_moment(esf_posterior_rational(partition, prior), 1);
}

// ---------------------------------------------------------------------------
// Yule-Simon

double yule_simon_log_pmf(std::int64_t n, double alpha) {
  if (n < 1) throw DomainError("yule_simon_log_pmf: n must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("yule_simon_log_pmf: alpha must be positive");
  // alpha B(n, alpha + 1) = alpha (n - 1)! / [alpha + 1]^n
  return std::log(alpha) + log_factorial(n - 1) - log_rising(alpha + 1.0, n);
}

RationalDensity yule_simon_posterior_rational(const std::vector<std::int64_t>& counts, const PochhammerParams& prior,
                                              int tilt) {
  prior.validate();
  check_counts(counts, 1, "yule_simon_posterior");
  RationalDensity r = ph_rational(prior);
  r.multiply_power(static_cast<int>(counts.size()) + tilt);
  for (auto n : counts) r.divide_rising(kOne, kOne, static_cast<int>(n));
  return r;
}

ResidueExpansion yule_simon_posterior(const std::vector<std::int64_t>& counts, const PochhammerParams& prior,
                                      const ExpansionOptions& opts) {
  return yule_simon_posterior_rational(counts, prior).expand(opts);
}

}  // namespace phprior
