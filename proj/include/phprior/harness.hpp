#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phprior/dm.hpp"
#include "phprior/pochhammer.hpp"
#include "phprior/rng.hpp"

namespace phprior {

// ---------------------------------------------------------------------------
// Simulated scenarios

enum class Scenario {
  SingleDoc = 1,                // S = 1, N fixed
  MultiDoc = 2,                 // S documents, N_s ~ U{N_min..N_max}
  MultiDocStructuralZeros = 3,  // as MultiDoc with q% of alpha_k = k/K set to 0
};

struct ScenarioConfig {
  Scenario scenario = Scenario::SingleDoc;
  // Scenario 1: 1 pi uniform, 2 pi_k proportional to k, 3 alpha_k = 1/K, 4 alpha_k = k/K.
  // Scenario 2: 1 alpha_k = 1/K, 2 alpha_k = k/K.
  // Scenario 3: 1, 2, 3 zero q = 10, 30, 50 percent (unless q is given).
  int setting = 1;
  int K = 100;
  int S = 1;
  std::int64_t N = 50;
  std::int64_t N_min = 50;
  std::int64_t N_max = 150;
  std::optional<int> q;
  std::size_t replicates = 20;
  Seed seed{20240601};

  // Default simulation sizes for each scenario and setting.
  static ScenarioConfig standard(Scenario scenario, int setting);
  void validate() const;
  // "S2-1" etc.
  std::string label() const;
  // Percentage of zeroed alpha_k (scenario 3 only).
  int zero_percent() const;
};

struct Dataset {
  Corpus corpus;
  std::vector<std::vector<double>> pi;  // true S x K probabilities
  std::optional<std::vector<double>> alpha;
  std::vector<int> zeroed;  // 0-based categories forced to zero (scenario 3)
};

// Deterministic in (config.seed, scenario, setting, replicate).
Dataset gen_scenario(const ScenarioConfig& config, std::size_t replicate);

// ---------------------------------------------------------------------------
// Methods

enum class MethodKind { FixedAlphaDM, PHHomogeneous, PHHeterogeneous };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::PHHeterogeneous;
  // FixedAlphaDM: alpha, or 1/K when alpha_inverse_K.
  double alpha = 1.0;
  bool alpha_inverse_K = false;
  PochhammerParams prior = kDefaultPrior;

  // ph1h..ph4h, ph1d..ph4d (a = c = 1 with (m, b) = (0, 2), (0, 5), (1, 3),
  // (1, 5)), dm1, dm_half, dm_invK.
  static MethodSpec named(const std::string& name);
  static std::vector<std::string> known_names();
  double fixed_alpha(int K) const { return alpha_inverse_K ? 1.0 / K : alpha; }
};

struct McmcBudget {
  std::size_t iterations = 10000;
  std::size_t burn_in = 2000;
  double stepsize = 0.5;
  bool adapt = true;
  void validate() const;
};

// Posterior of the Dirichlet parameters behind a method. For FixedAlphaDM
// `draws` holds the single fixed vector and `fixed` is set.
struct AlphaPosterior {
  std::vector<std::vector<double>> draws;
  bool fixed = false;
  bool exact = false;  // i.i.d. draws from the exact posterior (single-document PH-h)
  double acceptance = 0.0;
};

// PH-h on one document draws alpha i.i.d. from the exact posterior (falling
// back to MCMC on pole collisions); otherwise Metropolis-within-Gibbs. The
// number of retained draws is iterations - burn_in in every case.
AlphaPosterior fit_alpha(const MethodSpec& method, const Corpus& corpus, const McmcBudget& budget, Seed seed);

// E(pi_sk | n): the average of (n_sk + alpha_k)/(N_s + A) over draws.
std::vector<std::vector<double>> pi_posterior_mean(const AlphaPosterior& post, const Corpus& corpus);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
// Equal-tailed intervals for pi_sk. Fixed alpha: exact Beta(n_sk + alpha,
// N_s + K alpha - n_sk - alpha) quantiles. Otherwise pi_s ~ Dirichlet(n_s +
// alpha) once per draw, with inverse-ECDF quantiles; stores every draw, so
// meant for small problems.
std::vector<std::vector<Interval>> pi_intervals(const AlphaPosterior& post, const Corpus& corpus, Seed seed,
                                                double level = 0.95);
// Fraction of (s, k) whose truth lies in the interval above, without storing
// the draws. Same random stream as pi_intervals, so both agree exactly.
double pi_coverage(const AlphaPosterior& post, const Corpus& corpus, const std::vector<std::vector<double>>& truth,
                   Seed seed, double level = 0.95);

// mean |est - truth| over all (s, k) cells (not scaled by 100).
double abs_metric(const std::vector<std::vector<double>>& estimate, const std::vector<std::vector<double>>& truth);
double cov_metric(const std::vector<std::vector<Interval>>& intervals, const std::vector<std::vector<double>>& truth);

// ---------------------------------------------------------------------------
// Benchmark

struct CellResult {
  std::size_t replicate = 0;
  double abs = 0.0;  // x 100
  double cov = 0.0;
  double seconds = 0.0;
  double acceptance = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
};

CellResult run_cell(const MethodSpec& method, const ScenarioConfig& config, std::size_t replicate,
                    const McmcBudget& budget);

struct BenchmarkRow {
  std::string method;
  std::string setting;  // ScenarioConfig::label()
  std::size_t replicates = 0;
  std::size_t failures = 0;
  // Over successful replicates: mean, standard deviation and standard error.
  double abs_mean = 0.0, abs_sd = 0.0, abs_se = 0.0;
  double cov_mean = 0.0, cov_sd = 0.0, cov_se = 0.0;
  double seconds = 0.0;  // total wall-clock of the row's cells
  std::vector<CellResult> cells;
};

struct BenchmarkConfig {
  std::vector<ScenarioConfig> settings;
  std::vector<MethodSpec> methods;
  McmcBudget budget;
  unsigned threads = 0;  // 0: hardware concurrency
  void validate() const;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  // methods x settings, setting-major
  double seconds = 0.0;
};

// Cells run in parallel; results do not depend on the thread count.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// Stable 64-bit FNV-1a, used to derive per-method streams.
std::uint64_t stable_hash(const std::string& s);

}  // namespace phprior
