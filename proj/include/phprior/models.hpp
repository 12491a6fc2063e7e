#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "phprior/pochhammer.hpp"
#include "phprior/residue.hpp"
#include "phprior/rng.hpp"

namespace phprior {

// E(x^k) under an unnormalized rational density, as the ratio of the
// normalizers of x^k f and f. MomentDoesNotExist when x^k f is not integrable.
double rational_moment(const RationalDensity& f, int k, const ExpansionOptions& opts = {});

// ---------------------------------------------------------------------------
// Negative binomial with the coupled Beta link.
//
// Convention: NB(alpha, pi) has pmf [alpha]^n / n! * pi^alpha (1 - pi)^n, so
// pi is the success probability and the mean is alpha (1 - pi) / pi. Many
// libraries use 1 - pi instead.

// alpha ~ PH(m, a, b, c, d) and pi | alpha ~ Beta(c alpha + a, b).
struct NBCoupledPrior {
  PochhammerParams prior = kDefaultPrior;
  void validate() const { prior.validate(); }
};

// x^d [alpha]^m prod_k [alpha]^{n_k} / [(c + K) alpha + a]^{N + b}, optionally
// tilted by alpha^tilt.
RationalDensity nb_posterior_rational(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior,
                                      int tilt = 0);
ResidueExpansion nb_marginal_posterior(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior,
                                       const ExpansionOptions& opts = {});
double nb_posterior_mean_alpha(const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior);

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
  double mean() const { return alpha / (alpha + beta); }
};
// pi | alpha, n ~ Beta((c + K) alpha + a, N + b). Empty counts give the prior link.
BetaParams nb_pi_conditional(double alpha, const std::vector<std::int64_t>& counts, const NBCoupledPrior& prior);

// Gamma-Poisson draws from NB(alpha, pi) in the convention above.
std::int64_t nb_draw(double alpha, double pi, Rng& rng);
std::vector<std::int64_t> nb_sample(double alpha, double pi, std::size_t n, Seed seed);

struct NBGenerated {
  std::vector<std::int64_t> counts;
  double zero_fraction = 0.0;
  // Most frequent positive count (0 if every draw is zero).
  std::int64_t nonzero_mode = 0;
  // histogram[v] = number of draws equal to v, v < histogram.size(); larger
  // values are folded into `overflow`.
  std::vector<std::size_t> histogram;
  std::size_t overflow = 0;
};
// alpha ~ PH prior, pi | alpha ~ Beta link, n ~ NB(alpha, pi), one count per draw.
NBGenerated nb_generate(const NBCoupledPrior& prior, std::size_t n_draws, Seed seed, std::size_t max_bin = 50);

// ---------------------------------------------------------------------------
// Negative multinomial: p(n | alpha) proportional to alpha / [alpha + N]^{K + 1}.

double nm_marginal_log_likelihood(double alpha, std::int64_t N, int K);
RationalDensity nm_posterior_rational(std::int64_t N, int K, const PochhammerParams& prior, int tilt = 0);
ResidueExpansion nm_posterior(std::int64_t N, int K, const PochhammerParams& prior, const ExpansionOptions& opts = {});

// ---------------------------------------------------------------------------
// Generalized Dirichlet-multinomial, stick-breaking form with K - 1 free
// sticks: pi_1 = Z_1, pi_j = Z_j prod_{k<j} (1 - Z_k), pi_K = prod_{k<K} (1 - Z_k).

std::vector<double> gdm_stick_to_probs(const std::vector<double>& Z);
std::vector<double> gdm_probs_to_stick(const std::vector<double>& pi);

// Draws pi with Z_k ~ Beta(alpha_k, beta_k), k = 1..K-1.
std::vector<double> gdm_sample_probs(const std::vector<double>& alpha, const std::vector<double>& beta, Rng& rng);
// beta_{k-1} = alpha_k + beta_k for 2 <= k <= K - 1 (relative 1e-12): pi is
// then Dirichlet(alpha_1, ..., alpha_{K-1}, beta_{K-1}).
bool gdm_reduces_to_dirichlet(const std::vector<double>& alpha, const std::vector<double>& beta);
std::optional<std::vector<double>> gdm_dirichlet_parameters(const std::vector<double>& alpha,
                                                            const std::vector<double>& beta);

// A Beta shape that is either fixed or drawn from a PH prior.
struct ShapeSpec {
  std::optional<double> fixed;
  PochhammerParams prior = kDefaultPrior;

  static ShapeSpec constant(double v) { return {v, kDefaultPrior}; }
  static ShapeSpec random(const PochhammerParams& p) { return {std::nullopt, p}; }
  std::string label() const;
};

// Histogram density of Z ~ Beta(alpha, beta) marginally over the random
// shapes: `bins` equal bins on [0, 1], column "density" (integrates to 1).
Curve gdm_z_density(const ShapeSpec& alpha, const ShapeSpec& beta, std::size_t n_draws, std::size_t bins, Seed seed);
// alpha half-horseshoe; beta fixed at 0.5, 1, 2, 5 or half-horseshoe.
std::vector<Curve> gdm_halfhorseshoe_density_curves(std::size_t n_draws = 1000000, std::size_t bins = 100,
                                                    Seed seed = Seed{1});

// ---------------------------------------------------------------------------
// Ewens sampling formula.

// m[j - 1] = number of alleles seen exactly j times; n = sum_j j m_j.
struct AllelicPartition {
  std::vector<std::int64_t> m;

  static AllelicPartition from_pairs(const std::vector<std::pair<std::int64_t, std::int64_t>>& j_mj);
  std::int64_t n() const;
  std::int64_t alleles() const;  // sum_j m_j
  // Throws DomainError on negative entries or an empty partition.
  void validate() const;
};

double esf_log_prob(const AllelicPartition& partition, double alpha);
// All partitions of n (recursive generation; n <= 40).
std::vector<AllelicPartition> enumerate_partitions(int n);

// alpha^{sum m_j} x^d [alpha]^{m'} / ([alpha]^n [c alpha + a]^b), where m' is
// the prior's m; reduces to alpha^{sum m_j} / ([alpha + m']^{n - m'} [c alpha + a]^b) when m' < n.
RationalDensity esf_posterior_rational(const AllelicPartition& partition, const PochhammerParams& prior, int tilt = 0);
ResidueExpansion esf_posterior(const AllelicPartition& partition, const PochhammerParams& prior,
                               const ExpansionOptions& opts = {});
double esf_posterior_mean(const AllelicPartition& partition, const PochhammerParams& prior);

// ---------------------------------------------------------------------------
// Yule-Simon: p(n | alpha) = alpha B(n, alpha + 1), n >= 1.

double yule_simon_log_pmf(std::int64_t n, double alpha);
// alpha^K x^d [alpha]^m / ([c alpha + a]^b prod_k [alpha + 1]^{n_k}). Repeated
// counts give poles of order > 2, normalized by quadrature (numeric_fallback).
RationalDensity yule_simon_posterior_rational(const std::vector<std::int64_t>& counts, const PochhammerParams& prior,
                                              int tilt = 0);
ResidueExpansion yule_simon_posterior(const std::vector<std::int64_t>& counts, const PochhammerParams& prior,
                                      const ExpansionOptions& opts = {});

}  // namespace phprior
