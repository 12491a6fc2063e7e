#include "phprior/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "phprior/errors.hpp"

namespace phprior {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_shape(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                 const char* who) {
  if (x.size() != y.size()) throw ShapeMismatch(std::string(who) + ": document counts differ");
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s].size() != y[s].size()) throw ShapeMismatch(std::string(who) + ": category counts differ");
  }
}

// Inverse-ECDF order statistics for an equal-tailed interval over n draws:
// lo is the ceil(n p)-th smallest, hi the ceil(n (1 - p))-th smallest.
std::pair<std::size_t, std::size_t> interval_ranks(std::size_t n, double level) {
  const double p = (1.0 - level) / 2.0;
  auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * q - 1e-9));
    return std::clamp<std::size_t>(r, 1, n);
  };
  return {rank(p), rank(1.0 - p)};
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
}

Interval beta_interval(double a, double b, double level) {
  const double p = (1.0 - level) / 2.0;
  if (b <= 0.0) return {1.0, 1.0};  // single category
  return {boost::math::ibeta_inv(a, b, p), boost::math::ibeta_inv(a, b, 1.0 - p)};
}

// Calls f(s, pi_s) for each draw and document, pi_s ~ Dirichlet(n_s + alpha).
template <typename F>
void for_each_dirichlet_draw(const AlphaPosterior& post, const Corpus& corpus, Seed seed, F&& f) {
  Rng rng(seed);
  const int K = corpus.K();
  std::vector<double> shape(K);
  for (const auto& alpha : post.draws) {
    for (int s = 0; s < corpus.S(); ++s) {
      for (int k = 0; k < K; ++k) shape[k] = static_cast<double>(corpus.count(s, k)) + alpha[k];
      f(s, rng.dirichlet(shape));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// scenarios

ScenarioConfig ScenarioConfig::standard(Scenario scenario, int setting) {
  ScenarioConfig c;
  c.scenario = scenario;
  c.setting = setting;
  c.K = 100;
  if (scenario == Scenario::SingleDoc) {
    c.S = 1;
    c.N = 50;
  } else {
    c.S = 50;
  }
  c.validate();
  return c;
}

void ScenarioConfig::validate() const {
  if (K < 1) throw DomainError("scenario: K must be positive");
  if (S < 1) throw DomainError("scenario: S must be positive");
  switch (scenario) {
    case Scenario::SingleDoc:
      if (setting < 1 || setting > 4) throw DomainError("scenario 1: setting must be 1..4");
      if (S != 1) throw DomainError("scenario 1 has a single document");
      if (N < 1) throw DomainError("scenario 1: N must be positive");
      break;
    case Scenario::MultiDoc:
      if (setting < 1 || setting > 2) throw DomainError("scenario 2: setting must be 1 or 2");
      break;
    case Scenario::MultiDocStructuralZeros:
      if (!q && (setting < 1 || setting > 3)) throw DomainError("scenario 3: setting must be 1..3 (or give q)");
      if (q && (*q < 0 || *q >= 100)) throw DomainError("scenario 3: q must lie in [0, 100)");
      break;
    default:
      throw DomainError("unknown scenario");
  }
  if (scenario != Scenario::SingleDoc && (N_min < 1 || N_max < N_min)) {
    throw DomainError("scenario: need 1 <= N_min <= N_max");
  }
}

std::string ScenarioConfig::label() const {
  std::string s = "S" + std::to_string(static_cast<int>(scenario)) + "-" + std::to_string(setting);
  if (scenario == Scenario::MultiDocStructuralZeros && q) s += "-q" + std::to_string(*q);
  return s;
}

int ScenarioConfig::zero_percent() const {
  if (scenario != Scenario::MultiDocStructuralZeros) return 0;
  if (q) return *q;
  static constexpr int kQ[] = {10, 30, 50};
  return kQ[setting - 1];
}

Dataset gen_scenario(const ScenarioConfig& config, std::size_t replicate) {
  config.validate();
  const std::uint64_t stream = static_cast<std::uint64_t>(config.scenario) * 1000 + config.setting * 10 +
                               static_cast<std::uint64_t>(config.zero_percent()) * 100000;
  Rng rng(derive_seed(derive_seed(config.seed, stream), replicate));
  const int K = config.K;
  Dataset d;

  std::vector<double> alpha;
  std::vector<double> fixed_pi;
  if (config.scenario == Scenario::SingleDoc) {
    if (config.setting == 1) fixed_pi.assign(K, 1.0 / K);
    if (config.setting == 2) {
      const double total = K * (K + 1) / 2.0;
      for (int k = 1; k <= K; ++k) fixed_pi.push_back(k / total);
    }
    if (config.setting == 3) alpha.assign(K, 1.0 / K);
    if (config.setting == 4) {
      for (int k = 1; k <= K; ++k) alpha.push_back(static_cast<double>(k) / K);
    }
  } else if (config.scenario == Scenario::MultiDoc && config.setting == 1) {
    alpha.assign(K, 1.0 / K);
  } else {
    for (int k = 1; k <= K; ++k) alpha.push_back(static_cast<double>(k) / K);
  }
  if (config.scenario == Scenario::MultiDocStructuralZeros) {
    const int zeros = static_cast<int>(std::ceil(config.zero_percent() * K / 100.0 - 1e-9));
    std::vector<int> idx(K);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates on the first `zeros` slots
    for (int i = 0; i < zeros; ++i) {
      const auto j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(K - i));
      std::swap(idx[i], idx[j]);
    }
    d.zeroed.assign(idx.begin(), idx.begin() + zeros);
    std::sort(d.zeroed.begin(), d.zeroed.end());
    for (int k : d.zeroed) alpha[k] = 0.0;
  }

  std::vector<std::vector<std::int64_t>> counts;
  for (int s = 0; s < config.S; ++s) {
    const std::int64_t N =
        config.scenario == Scenario::SingleDoc
            ? config.N
            : config.N_min + static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(config.N_max - config.N_min + 1));
    std::vector<double> pi = fixed_pi.empty() ? rng.dirichlet(alpha) : fixed_pi;
    counts.push_back(rng.multinomial(N, pi));
    d.pi.push_back(std::move(pi));
  }
  d.corpus = Corpus(std::move(counts));
  if (!alpha.empty()) d.alpha = alpha;
  return d;
}

// ---------------------------------------------------------------------------
// methods

MethodSpec MethodSpec::named(const std::string& name) {
  MethodSpec m;
  m.name = name;
  if (name == "dm1" || name == "dm_half" || name == "dm_invK") {
    m.kind = MethodKind::FixedAlphaDM;
    m.alpha = name == "dm1" ? 1.0 : 0.5;
    m.alpha_inverse_K = name == "dm_invK";
    return m;
  }
  static const std::map<char, std::pair<int, int>> kConfigs = {{'1', {0, 2}}, {'2', {0, 5}}, {'3', {1, 3}}, {'4', {1, 5}}};
  if (name.size() == 4 && name.rfind("ph", 0) == 0 && kConfigs.count(name[2]) && (name[3] == 'h' || name[3] == 'd')) {
    const auto [mm, bb] = kConfigs.at(name[2]);
    m.prior = PochhammerParams{mm, Scalar::integer(1), bb, Scalar::integer(1), 0};
    m.kind = name[3] == 'h' ? MethodKind::PHHomogeneous : MethodKind::PHHeterogeneous;
    return m;
  }
  throw DomainError("unknown method '" + name + "' (known: ph1h..ph4h, ph1d..ph4d, dm1, dm_half, dm_invK)");
}

std::vector<std::string> MethodSpec::known_names() {
  return {"dm1", "dm_half", "dm_invK", "ph1h", "ph2h", "ph3h", "ph4h", "ph1d", "ph2d", "ph3d", "ph4d"};
}

void McmcBudget::validate() const {
  if (iterations < 1) throw DomainError("mcmc: iterations must be positive");
  if (burn_in >= iterations) throw DomainError("mcmc: burn_in must be below iterations");
  if (!(stepsize > 0.0)) throw DomainError("mcmc: stepsize must be positive");
}

AlphaPosterior fit_alpha(const MethodSpec& method, const Corpus& corpus, const McmcBudget& budget, Seed seed) {
  budget.validate();
  const int K = corpus.K();
  AlphaPosterior out;
  if (method.kind == MethodKind::FixedAlphaDM) {
    const double a = method.fixed_alpha(K);
    if (!(a > 0.0)) throw DomainError("fixed-alpha DM needs alpha > 0");
    out.fixed = true;
    out.exact = true;
    out.acceptance = 1.0;
    out.draws.assign(1, std::vector<double>(K, a));
    return out;
  }
  const std::size_t retained = budget.iterations - budget.burn_in;
  const bool homogeneous = method.kind == MethodKind::PHHomogeneous;
  if (homogeneous && corpus.S() == 1 && method.prior.d == 0) {
    try {
      const auto post = homog_posterior(corpus, method.prior);
      const auto table = post.alpha_table();
      Rng rng(seed);
      out.exact = true;
      out.acceptance = 1.0;
      out.draws.reserve(retained);
      for (std::size_t t = 0; t < retained; ++t) out.draws.emplace_back(K, table.quantile(rng.uniform_open()));
      return out;
    } catch (const PoleCollision&) {
      // fall through to MCMC, which does not care about pole structure
    }
  }
  MwgOptions opts;
  opts.iterations = budget.iterations;
  opts.burn_in = budget.burn_in;
  opts.stepsize = budget.stepsize;
  opts.adapt = budget.adapt;
  opts.seed = seed;
  opts.homogeneous = homogeneous;
  auto chain = mwg_sample(corpus, method.prior, opts);
  const auto rates = chain.acceptance_rates();
  out.acceptance = rates.empty() ? 0.0 : std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
  out.draws = std::move(chain.draws);
  return out;
}

std::vector<std::vector<double>> pi_posterior_mean(const AlphaPosterior& post, const Corpus& corpus) {
  const int K = corpus.K(), S = corpus.S();
  if (post.draws.empty()) throw DomainError("pi_posterior_mean: no draws");
  std::vector<std::vector<double>> mean(S, std::vector<double>(K, 0.0));
  for (const auto& alpha : post.draws) {
    if (static_cast<int>(alpha.size()) != K) throw ShapeMismatch("pi_posterior_mean: draw length differs from K");
    const double A = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      const double denom = static_cast<double>(corpus.row_totals()[s]) + A;
      for (int k = 0; k < K; ++k) mean[s][k] += (static_cast<double>(corpus.count(s, k)) + alpha[k]) / denom;
    }
  }
  const double T = static_cast<double>(post.draws.size());
  for (auto& row : mean) {
    for (double& v : row) v /= T;
  }
  return mean;
}

std::vector<std::vector<Interval>> pi_intervals(const AlphaPosterior& post, const Corpus& corpus, Seed seed,
                                                double level) {
  check_level(level);
  const int K = corpus.K(), S = corpus.S();
  std::vector<std::vector<Interval>> out(S, std::vector<Interval>(K));
  if (post.fixed) {
    const auto& alpha = post.draws.front();
    const double A = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k < K; ++k) {
        const double a = static_cast<double>(corpus.count(s, k)) + alpha[k];
        out[s][k] = beta_interval(a, static_cast<double>(corpus.row_totals()[s]) + A - a, level);
      }
    }
    return out;
  }
  std::vector<std::vector<std::vector<double>>> values(S, std::vector<std::vector<double>>(K));
  for_each_dirichlet_draw(post, corpus, seed, [&](int s, const std::vector<double>& pi) {
    for (int k = 0; k < K; ++k) values[s][k].push_back(pi[k]);
  });
  const auto [r_lo, r_hi] = interval_ranks(post.draws.size(), level);
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k) {
      auto& v = values[s][k];
      std::sort(v.begin(), v.end());
      out[s][k] = {v[r_lo - 1], v[r_hi - 1]};
    }
  }
  return out;
}

double pi_coverage(const AlphaPosterior& post, const Corpus& corpus, const std::vector<std::vector<double>>& truth,
                   Seed seed, double level) {
  check_level(level);
  const int K = corpus.K(), S = corpus.S();
  if (static_cast<int>(truth.size()) != S) throw ShapeMismatch("pi_coverage: truth has the wrong number of documents");
  for (const auto& row : truth) {
    if (static_cast<int>(row.size()) != K) throw ShapeMismatch("pi_coverage: truth has the wrong number of categories");
  }
  if (post.fixed) return cov_metric(pi_intervals(post, corpus, seed, level), truth);
  // truth >= lo  <=>  #(draws <= truth) >= r_lo
  // truth <= hi  <=>  #(draws < truth) < r_hi
  std::vector<std::vector<std::uint32_t>> le(S, std::vector<std::uint32_t>(K, 0));
  std::vector<std::vector<std::uint32_t>> lt(S, std::vector<std::uint32_t>(K, 0));
  for_each_dirichlet_draw(post, corpus, seed, [&](int s, const std::vector<double>& pi) {
    for (int k = 0; k < K; ++k) {
      le[s][k] += pi[k] <= truth[s][k];
      lt[s][k] += pi[k] < truth[s][k];
    }
  });
  const auto [r_lo, r_hi] = interval_ranks(post.draws.size(), level);
  std::size_t covered = 0;
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k) covered += le[s][k] >= r_lo && lt[s][k] < r_hi;
  }
  return static_cast<double>(covered) / (static_cast<double>(S) * K);
}

double abs_metric(const std::vector<std::vector<double>>& estimate, const std::vector<std::vector<double>>& truth) {
  check_shape(estimate, truth, "abs_metric");
  double total = 0.0;
  std::size_t cells = 0;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    for (std::size_t k = 0; k < truth[s].size(); ++k) {
      total += std::fabs(estimate[s][k] - truth[s][k]);
      ++cells;
    }
  }
  if (cells == 0) throw ShapeMismatch("abs_metric: empty input");
  return total / static_cast<double>(cells);
}

double cov_metric(const std::vector<std::vector<Interval>>& intervals, const std::vector<std::vector<double>>& truth) {
  if (intervals.size() != truth.size()) throw ShapeMismatch("cov_metric: document counts differ");
  std::size_t covered = 0, cells = 0;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (intervals[s].size() != truth[s].size()) throw ShapeMismatch("cov_metric: category counts differ");
    for (std::size_t k = 0; k < truth[s].size(); ++k) {
      covered += intervals[s][k].lo <= truth[s][k] && truth[s][k] <= intervals[s][k].hi;
      ++cells;
    }
  }
  if (cells == 0) throw ShapeMismatch("cov_metric: empty input");
  return static_cast<double>(covered) / static_cast<double>(cells);
}

// ---------------------------------------------------------------------------
// benchmark

std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CellResult run_cell(const MethodSpec& method, const ScenarioConfig& config, std::size_t replicate,
                    const McmcBudget& budget) {
  CellResult r;
  r.replicate = replicate;
  const auto t0 = std::chrono::steady_clock::now();
  const Seed seed = derive_seed(derive_seed(config.seed, stable_hash(config.label() + "/" + method.name)), replicate);
  r.seed = seed.value;
  try {
    const Dataset data = gen_scenario(config, replicate);
    const auto post = fit_alpha(method, data.corpus, budget, derive_seed(seed, 0));
    r.abs = 100.0 * abs_metric(pi_posterior_mean(post, data.corpus), data.pi);
    r.cov = pi_coverage(post, data.corpus, data.pi, derive_seed(seed, 1));
    r.acceptance = post.acceptance;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

void BenchmarkConfig::validate() const {
  if (settings.empty()) throw DomainError("benchmark: no settings");
  if (methods.empty()) throw DomainError("benchmark: no methods");
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (m.name.empty()) throw DomainError("benchmark: method without a name");
    if (!names.insert(m.name).second) throw DomainError("benchmark: duplicate method name '" + m.name + "'");
    if (m.kind != MethodKind::FixedAlphaDM) m.prior.validate();
  }
  std::set<std::string> labels;
  for (const auto& s : settings) {
    s.validate();
    if (s.replicates < 1) throw DomainError("benchmark: replicates must be positive");
    if (!labels.insert(s.label()).second) throw DomainError("benchmark: duplicate setting " + s.label());
  }
  budget.validate();
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  struct Job {
    std::size_t row, setting, method, replicate;
  };
  std::vector<Job> jobs;
  BenchmarkReport report;
  for (std::size_t si = 0; si < config.settings.size(); ++si) {
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      BenchmarkRow row;
      row.method = config.methods[mi].name;
      row.setting = config.settings[si].label();
      row.replicates = config.settings[si].replicates;
      row.cells.resize(row.replicates);
      for (std::size_t r = 0; r < row.replicates; ++r) jobs.push_back({report.rows.size(), si, mi, r});
      report.rows.push_back(std::move(row));
    }
  }
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const auto& job = jobs[j];
      report.rows[job.row].cells[job.replicate] =
          run_cell(config.methods[job.method], config.settings[job.setting], job.replicate, config.budget);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& row : report.rows) {
    std::vector<double> abs, cov;
    for (const auto& c : row.cells) {
      row.seconds += c.seconds;
      if (!c.error.empty()) {
        ++row.failures;
        continue;
      }
      abs.push_back(c.abs);
      cov.push_back(c.cov);
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd, double& se) {
      if (v.empty()) {
        mean = sd = se = std::nan("");
        return;
      }
      mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
      se = sd / std::sqrt(static_cast<double>(v.size()));
    };
    stats(abs, row.abs_mean, row.abs_sd, row.abs_se);
    stats(cov, row.cov_mean, row.cov_sd, row.cov_se);
  }
  report.seconds = seconds_since(t0);
  return report;
}

}  // namespace phprior
