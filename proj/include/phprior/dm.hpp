#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "phprior/closed_form.hpp"
#include "phprior/pochhammer.hpp"
#include "phprior/quadrature.hpp"
#include "phprior/residue.hpp"
#include "phprior/rng.hpp"

namespace phprior {

// S x K matrix of category counts, one row per document.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<std::vector<std::int64_t>> counts);
  static Corpus single(std::vector<std::int64_t> counts) { return Corpus({std::move(counts)}); }

  int K() const { return static_cast<int>(counts_.front().size()); }
  int S() const { return static_cast<int>(counts_.size()); }
  std::int64_t count(int s, int k) const { return counts_[s][k]; }
  const std::vector<std::int64_t>& row(int s) const { return counts_[s]; }
  const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }
  const std::vector<std::int64_t>& row_totals() const { return row_totals_; }
  std::vector<std::int64_t> column_totals() const;

 private:
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::int64_t> row_totals_;
};

// sum_s [ -ln [A]^{N_s} + sum_k ln [alpha_k]^{n_sk} ], multinomial coefficients
// dropped.
double marginal_log_likelihood(const Corpus& corpus, const std::vector<double>& alpha);

// Single-document posterior of a shared alpha:
//   [alpha]^m prod_k [alpha]^{n_k} / ([K alpha]^N [c alpha + a]^b).
struct HomogeneousPosterior {
  ResidueExpansion expansion;
  double log_C_n = 0.0;  // ln of the integral of the unnormalized posterior
  PochhammerParams params;
  Corpus counts;
  bool double_root = false;

  double log_density(double alpha) const;
  double density(double alpha) const { return std::exp(log_density(alpha)); }
  // Tabulated posterior CDF, for exact i.i.d. draws of alpha.
  TabulatedCdf alpha_table() const;
};

// The unnormalized posterior above, optionally tilted by alpha^tilt.
RationalDensity homog_rational(const std::vector<std::int64_t>& n, const PochhammerParams& prior, int tilt = 0);

// Requires S = 1 and d = 0. Throws PoleCollision when a likelihood pole
// (i - 1)/K coincides with a prior pole (a + j - 1)/c after cancellation.
HomogeneousPosterior homog_posterior(const Corpus& corpus, const PochhammerParams& prior,
                                     const ExpansionOptions& opts = {});
// The colliding form a = 0, c = K: poles (i - 1)/K of order 2 for i <= min(N, b).
HomogeneousPosterior homog_posterior_double_root(const Corpus& corpus, const PochhammerParams& prior,
                                                 const ExpansionOptions& opts = {});

// Explicit single-root coefficients: gamma[i - 1] against (K alpha + i - 1),
// i = 1..N, and beta[j - 1] against (c alpha + a + j - 1), j = 1..b; log_norm
// is ln C_n. The prior m acts as an extra count n_0.
ClosedForm homog_closed_form(const std::vector<std::int64_t>& n, const PochhammerParams& prior,
                             Precision precision = Precision::double_precision());

// Coefficients of a double-root posterior against (K alpha + i - 1) and its
// square, i = 1..max(N, b); zero where there is no pole. gamma[0] = beta[0] = 0.
struct DoubleRootCoefficients {
  std::vector<double> gamma;
  std::vector<double> beta;
};
DoubleRootCoefficients double_root_coefficients(const HomogeneousPosterior& post);

// E(pi_k | n) = C_{n + e_k} / C_n.
double homog_posterior_mean_pi(const HomogeneousPosterior& post, int k);
// E(alpha | n); MomentDoesNotExist unless b >= m + 3.
double homog_posterior_mean_alpha(const HomogeneousPosterior& post);

// Unnormalized log density of alpha_k given the other coordinates:
//   -ln [alpha + A]^N + ln [alpha]^{n_k} + ln [alpha]^m - ln [c alpha + a]^b.
double heter_conditional_log_density(double alpha_k, std::int64_t n_k, std::int64_t N, double A_minus_k,
                                     const PochhammerParams& prior);
// Residue form of the same conditional. SizeBudgetExceeded when N + b > max_size.
ResidueExpansion heter_conditional_expansion(std::int64_t n_k, std::int64_t N, double A_minus_k,
                                             const PochhammerParams& prior, const ExpansionOptions& opts = {},
                                             std::size_t max_size = 400);
// Explicit coefficients: gamma[j - 1] against (alpha + A + j - 1), j = 1..N,
// beta[j - 1] against (c alpha + a + j - 1), j = 1..b.
ClosedForm heter_conditional_closed_form(std::int64_t n_k, std::int64_t N, double A_minus_k,
                                         const PochhammerParams& prior,
                                         Precision precision = Precision::double_precision());
// E(pi_k | A_{-k}, n) as the normalizer ratio C_{n_k + 1, N + 1} / C_{n_k, N}.
// Quadrature when the residue form is too large or its poles collide.
double heter_conditional_mean_pi(std::int64_t n_k, std::int64_t N, double A_minus_k, const PochhammerParams& prior);

struct MwgOptions {
  std::size_t iterations = 10000;
  std::size_t burn_in = 2000;
  double stepsize = 0.5;
  // Per-coordinate stepsize tuning during burn-in towards 30-45% acceptance.
  bool adapt = true;
  Seed seed{};
  // One alpha shared by all categories.
  bool homogeneous = false;
};

struct PosteriorChain {
  std::vector<std::vector<double>> draws;  // retained draws, one alpha vector per row
  std::vector<std::size_t> accepted;       // per coordinate, after burn-in
  std::vector<std::size_t> proposed;
  Seed seed{};
  double stepsize = 0.5;               // initial
  std::vector<double> final_stepsizes;  // after tuning
  std::size_t burn_in = 0;
  bool homogeneous = false;

  std::vector<double> acceptance_rates() const;
};

// Metropolis-within-Gibbs on log alpha_k with standard MH acceptance and the
// log-normal proposal's Jacobian term.
PosteriorChain mwg_sample(const Corpus& corpus, const PochhammerParams& prior, const MwgOptions& opts);
PosteriorChain mwg_sample(const Corpus& corpus, const PochhammerParams& prior, std::size_t T, double sigma,
                          std::size_t burn_in, Seed seed);

struct Summary {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

enum class PiIntervals {
  PlugIn,     // quantiles of (n_sk + alpha_k) / (N_s + A) over draws
  Dirichlet,  // quantiles of pi_s ~ Dirichlet(n_s + alpha) drawn per retained alpha
};

struct ChainSummary {
  std::vector<Summary> alpha;          // per category
  std::vector<std::vector<Summary>> pi;  // S x K
  std::vector<double> acceptance;
};

// Means of pi are always the plug-in average (the Dirichlet mean). At most
// max_draws evenly spaced draws feed the quantiles.
ChainSummary chain_summaries(const PosteriorChain& chain, const Corpus& corpus, PiIntervals intervals = PiIntervals::PlugIn,
                             Seed seed = {}, std::size_t max_draws = 4000);

// Equal-tailed empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double>& values, double p);

}  // namespace phprior
