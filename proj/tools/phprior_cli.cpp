#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phprior/dm.hpp"
#include "phprior/errors.hpp"
#include "phprior/harness.hpp"
#include "phprior/io.hpp"
#include "phprior/models.hpp"
#include "phprior/pochhammer.hpp"
#include "phprior/tables.hpp"

using namespace phprior;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

struct Common {
  std::string out;
  std::string precision = "double";
  unsigned threads = 0;
};

struct PriorOpts {
  int m = 0;
  std::string a = "1";
  int b = 2;
  std::string c = "1";
  int d = 0;
  std::string prior_json;  // inline JSON or @file
};

struct McmcOpts {
  std::size_t iterations = 10000;
  std::optional<std::size_t> burn_in;
  std::string stepsize = "adapt";
  std::uint64_t seed = kDefaultSeed;
};

// "@path" reads a file, anything else is taken literally.
std::string text_or_file(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return read_text(arg.substr(1));
  return arg;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

void add_prior(CLI::App* cmd, PriorOpts& p) {
  cmd->add_option("--m", p.m, "prior m")->capture_default_str();
  cmd->add_option("--a", p.a, "prior a (number or exact fraction such as 3/2)")->capture_default_str();
  cmd->add_option("--b", p.b, "prior b")->capture_default_str();
  cmd->add_option("--c", p.c, "prior c (number or exact fraction)")->capture_default_str();
  cmd->add_option("--d", p.d, "prior d")->capture_default_str();
  cmd->add_option("--prior", p.prior_json, "prior as JSON {\"m\",\"a\",\"b\",\"c\",\"d\"} or @file; overrides --m..--d");
}

PochhammerParams resolve_prior(const PriorOpts& p) {
  if (!p.prior_json.empty()) return prior_from_json(parse_json(text_or_file(p.prior_json), "--prior"));
  return prior_from_json(json{{"m", p.m}, {"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}});
}

void add_mcmc(CLI::App* cmd, McmcOpts& o) {
  cmd->add_option("--iterations", o.iterations, "MCMC iterations including burn-in")->capture_default_str();
  cmd->add_option("--burn-in", o.burn_in, "burn-in iterations (default iterations/5)");
  cmd->add_option("--stepsize", o.stepsize, "random-walk stepsize on log alpha, or \"adapt\"")->capture_default_str();
  cmd->add_option("--seed", o.seed, "top-level seed")->capture_default_str();
}

McmcBudget resolve_mcmc(const McmcOpts& o) {
  McmcBudget b;
  b.iterations = o.iterations;
  b.burn_in = o.burn_in.value_or(o.iterations / 5);
  if (o.stepsize == "adapt") {
    b.adapt = true;
  } else {
    try {
      std::size_t used = 0;
      b.stepsize = std::stod(o.stepsize, &used);
      if (used != o.stepsize.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ParseError("--stepsize must be a positive number or \"adapt\"");
    }
    b.adapt = false;
  }
  b.validate();
  return b;
}

json mcmc_json(const McmcBudget& b, std::uint64_t seed) {
  return {{"iterations", b.iterations},
          {"burn_in", b.burn_in},
          {"stepsize", b.adapt ? json("adapt") : json(b.stepsize)},
          {"initial_stepsize", b.stepsize},
          {"seed", seed}};
}

ExpansionOptions expansion_options(const Common& c) {
  ExpansionOptions o;
  o.precision = parse_precision(c.precision);
  return o;
}

json base_config(const std::string& command, const Common& c) {
  return {{"command", command}, {"precision", to_string(parse_precision(c.precision))}, {"version", version_string()}};
}

std::string csv_with_echo(CsvTable t, const json& config, const std::vector<std::string>& extra = {}) {
  t.comments = {version_string(), "config " + config.dump()};
  t.comments.insert(t.comments.end(), extra.begin(), extra.end());
  return to_csv(t);
}

std::string json_with_echo(json body, const json& config) {
  body["config"] = config;
  body["version"] = version_string();
  return body.dump(2) + "\n";
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    atomic_write(path, content);
  }
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json summary_json(const Summary& s) { return {{"mean", num(s.mean)}, {"q025", num(s.q025)}, {"q975", num(s.q975)}}; }

// Quantile of a normalized expansion by geometric bisection on its CDF.
double expansion_quantile(const ResidueExpansion& e, double u) {
  double lo = 1e-300, hi = 1.0;
  while (e.cdf(hi) < u && hi < 1e300) hi *= 16.0;
  for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    (e.cdf(mid) < u ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

json expansion_summary(const ResidueExpansion& e, const RationalDensity& tilted_mean_source, const ExpansionOptions& opts) {
  json j;
  j["log_norm"] = e.log_norm_const;
  j["q025"] = expansion_quantile(e, 0.025);
  j["median"] = expansion_quantile(e, 0.5);
  j["q975"] = expansion_quantile(e, 0.975);
  try {
    j["mean"] = rational_moment(tilted_mean_source, 1, opts);
  } catch (const MomentDoesNotExist& ex) {
    j["mean"] = nullptr;
    j["mean_note"] = ex.what();
  }
  return j;
}

std::string safe_name(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  }
  return s;
}

CsvTable histogram_table(const NBGenerated& g) {
  CsvTable t;
  t.header = {"value", "count", "frequency"};
  const double n = static_cast<double>(g.counts.size());
  for (std::size_t v = 0; v < g.histogram.size(); ++v) {
    t.rows.push_back({std::to_string(v), std::to_string(g.histogram[v]), format_double(g.histogram[v] / n)});
  }
  return t;
}

std::vector<std::string> nb_notes(const NBGenerated& g) {
  return {"zero_fraction " + format_double(g.zero_fraction), "nonzero_mode " + std::to_string(g.nonzero_mode),
          "overflow " + std::to_string(g.overflow) + " draws at or above " + std::to_string(g.histogram.size())};
}

// ---------------------------------------------------------------------------
// density

struct DensityOpts {
  PriorOpts prior;
  std::string grid = "log";
  double from = 1e-3;
  double to = 1e3;
  std::size_t points = 400;
  std::string figure;
  std::size_t draws = 0;
  std::uint64_t seed = 1;
};

int cmd_density(const Common& common, const DensityOpts& o) {
  json config = base_config("density", common);
  if (!o.figure.empty()) {
    const fs::path dir = common.out.empty() || common.out == "-" ? fs::path(".") : fs::path(common.out);
    if (!fs::is_directory(dir)) throw IoError("output directory does not exist: " + dir.string());
    config["figure"] = o.figure;
    config["seed"] = o.seed;
    std::vector<std::pair<std::string, std::string>> files;
    if (o.figure == "fig1" || o.figure == "fig2") {
      const auto curves = o.figure == "fig1" ? figure1_curves() : figure2_curves();
      for (const auto& c : curves) {
        std::string name = c.name.rfind(o.figure, 0) == 0 ? c.name : o.figure + "_" + c.name;
        files.emplace_back(safe_name(name) + ".csv", csv_with_echo(curve_table(c, "alpha"), config));
      }
    } else if (o.figure == "fig3") {
      const std::size_t n = o.draws ? o.draws : 100000;
      config["draws"] = n;
      const std::vector<std::pair<int, int>> regimes{{0, 2}, {3, 20}};
      for (const auto& [m, b] : regimes) {
        NBCoupledPrior p;
        p.prior = prior_from_json(json{{"m", m}, {"a", 1}, {"b", b}, {"c", 1}});
        const auto g = nb_generate(p, n, Seed{o.seed});
        json cfg = config;
        cfg["prior"] = to_json(p.prior);
        files.emplace_back("fig3_m" + std::to_string(m) + "_b" + std::to_string(b) + ".csv",
                           csv_with_echo(histogram_table(g), cfg, nb_notes(g)));
      }
    } else if (o.figure == "fig4") {
      const std::size_t n = o.draws ? o.draws : 1000000;
      config["draws"] = n;
      for (const auto& c : gdm_halfhorseshoe_density_curves(n, 100, Seed{o.seed})) {
        files.emplace_back(safe_name("fig4_" + c.name) + ".csv", csv_with_echo(curve_table(c, "z"), config));
      }
    } else {
      throw DomainError("--figure must be fig1, fig2, fig3 or fig4");
    }
    for (const auto& [name, content] : files) {
      atomic_write(dir / name, content);
      std::cerr << "wrote " << (dir / name).string() << "\n";
    }
    return 0;
  }

  const auto prior = resolve_prior(o.prior);
  if (o.points < 2) throw DomainError("--points must be at least 2");
  if (!(o.from < o.to)) throw DomainError("--from must be below --to");
  std::vector<double> grid;
  if (o.grid == "log") {
    if (!(o.from > 0.0)) throw DomainError("a log grid needs --from > 0");
    grid = logspace(std::log10(o.from), std::log10(o.to), o.points);
  } else if (o.grid == "linear") {
    if (o.from < 0.0) throw DomainError("the density lives on alpha >= 0");
    grid = linspace(o.from, o.to, o.points);
  } else {
    throw DomainError("--grid must be log or linear");
  }
  config["prior"] = to_json(prior);
  config["grid"] = {{"kind", o.grid}, {"from", o.from}, {"to", o.to}, {"points", o.points}};
  const Pochhammer ph(prior, expansion_options(common));
  CsvTable t;
  t.header = {"alpha", "density", "cdf"};
  for (double x : grid) t.rows.push_back({format_double(x), format_double(ph.density(x)), format_double(ph.cdf(x))});
  emit(common.out, csv_with_echo(t, config));
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
  std::string counts;
  std::string mode = "homogeneous";
  PriorOpts prior;
  McmcOpts mcmc;
  std::string chain;
  std::string intervals = "plugin";
  std::size_t max_draws = 4000;
};

int cmd_fit(const Common& common, const FitOpts& o) {
  const auto corpus = parse_counts_csv(read_text(o.counts), o.counts);
  const auto prior = resolve_prior(o.prior);
  const auto budget = resolve_mcmc(o.mcmc);
  const auto opts = expansion_options(common);
  if (o.mode != "homogeneous" && o.mode != "heterogeneous") throw DomainError("--mode must be homogeneous or heterogeneous");
  if (o.intervals != "plugin" && o.intervals != "dirichlet") throw DomainError("--intervals must be plugin or dirichlet");

  json config = base_config("fit", common);
  config["counts"] = o.counts;
  config["mode"] = o.mode;
  config["prior"] = to_json(prior);
  config["mcmc"] = mcmc_json(budget, o.mcmc.seed);
  config["intervals"] = o.intervals;
  config["S"] = corpus.S();
  config["K"] = corpus.K();

  json out;
  const Seed seed{o.mcmc.seed};
  CsvTable chain_csv;
  chain_csv.header = {"draw"};
  for (int k = 0; k < corpus.K(); ++k) chain_csv.header.push_back("alpha_" + std::to_string(k + 1));

  if (corpus.K() == 1) {
    // pi_1 = 1 whatever alpha is: the likelihood is flat in alpha
    const Pochhammer ph(prior, opts);
    out["method"] = "prior";
    out["note"] = "K = 1: the likelihood does not depend on alpha, so the posterior equals the prior";
    json a = {{"q025", ph.quantile(0.025)}, {"median", ph.quantile(0.5)}, {"q975", ph.quantile(0.975)}};
    try {
      a["mean"] = ph.moment(1);
    } catch (const MomentDoesNotExist&) {
      a["mean"] = nullptr;
    }
    out["alpha"] = a;
    out["pi_mean"] = json::array();
    for (int s = 0; s < corpus.S(); ++s) out["pi_mean"].push_back(json::array({1.0}));
    if (!o.chain.empty()) {
      const auto draws = ph.sample(budget.iterations - budget.burn_in, seed);
      for (std::size_t t = 0; t < draws.size(); ++t) chain_csv.rows.push_back({std::to_string(t), format_double(draws[t])});
    }
  } else if (o.mode == "homogeneous" && corpus.S() == 1 && prior.d == 0) {
    std::optional<HomogeneousPosterior> post;
    try {
      post = homog_posterior(corpus, prior, opts);
    } catch (const PoleCollision& e) {
      const bool double_root = prior.a.exact && prior.a.exact->num == 0 && prior.c.exact &&
                               prior.c.exact->den == 1 && prior.c.exact->num == corpus.K();
      if (!double_root) {
        std::string what = e.what();
        what = what.substr(0, what.find(';'));
        throw PoleCollision(what + "; perturb a (e.g. --a 1.0001), or use a = 0 with c = K for the double-root form");
      }
      std::cerr << "notice: a = 0 and c = K give double poles; using the double-root posterior\n";
      post = homog_posterior_double_root(corpus, prior, opts);
      out["notice"] = "double-root posterior (a = 0, c = K)";
    }
    const auto table = post->alpha_table();
    out["method"] = "exact";
    out["log_C_n"] = post->log_C_n;
    json a = {{"q025", table.quantile(0.025)}, {"median", table.quantile(0.5)}, {"q975", table.quantile(0.975)}};
    try {
      a["mean"] = homog_posterior_mean_alpha(*post);
    } catch (const MomentDoesNotExist& e) {
      a["mean"] = nullptr;
      a["mean_note"] = e.what();
    }
    out["alpha"] = a;
    json pis = json::array();
    for (int k = 0; k < corpus.K(); ++k) pis.push_back(homog_posterior_mean_pi(*post, k));
    out["pi_mean"] = json::array({pis});
    if (!o.chain.empty()) {
      // exact i.i.d. draws from the tabulated posterior
      Rng rng(seed);
      for (std::size_t t = 0; t < budget.iterations - budget.burn_in; ++t) {
        const double x = table.quantile(rng.uniform_open());
        std::vector<std::string> row{std::to_string(t)};
        for (int k = 0; k < corpus.K(); ++k) row.push_back(format_double(x));
        chain_csv.rows.push_back(std::move(row));
      }
    }
  } else {
    const bool homogeneous = o.mode == "homogeneous";
    if (homogeneous) {
      std::cerr << "notice: the exact homogeneous posterior needs one document and d = 0; running MCMC on a shared alpha\n";
      out["notice"] = "exact form unavailable for this corpus; MCMC on a shared alpha";
    }
    MwgOptions mo;
    mo.iterations = budget.iterations;
    mo.burn_in = budget.burn_in;
    mo.stepsize = budget.stepsize;
    mo.adapt = budget.adapt;
    mo.seed = derive_seed(seed, 0);
    mo.homogeneous = homogeneous;
    const auto chain = mwg_sample(corpus, prior, mo);
    const auto sum = chain_summaries(chain, corpus, o.intervals == "plugin" ? PiIntervals::PlugIn : PiIntervals::Dirichlet,
                                     derive_seed(seed, 1), o.max_draws);
    out["method"] = "mcmc";
    out["draws"] = chain.draws.size();
    out["acceptance"] = sum.acceptance;
    json alpha = json::array();
    for (const auto& s : homogeneous ? std::vector<Summary>{sum.alpha.front()} : sum.alpha) alpha.push_back(summary_json(s));
    out["alpha"] = homogeneous ? alpha.front() : alpha;
    json means = json::array(), intervals = json::array(), totals = json::array();
    for (const auto& doc : sum.pi) {
      json m = json::array(), iv = json::array();
      double total = 0.0;
      for (const auto& s : doc) {
        m.push_back(s.mean);
        iv.push_back(json::array({s.q025, s.q975}));
        total += s.mean;
      }
      means.push_back(m);
      intervals.push_back(iv);
      totals.push_back(total);
    }
    out["pi_mean"] = means;
    out["pi_interval"] = intervals;
    out["pi_mean_totals"] = totals;
    if (!o.chain.empty()) {
      for (std::size_t t = 0; t < chain.draws.size(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (double x : chain.draws[t]) row.push_back(format_double(x));
        chain_csv.rows.push_back(std::move(row));
      }
    }
  }
  if (!o.chain.empty()) atomic_write(o.chain, csv_with_echo(chain_csv, config));
  emit(common.out, json_with_echo(out, config));
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchOpts {
  std::string config;
  std::optional<int> scenario;
  int setting = 1;
  std::string methods;
  std::optional<std::size_t> replicates;
  std::optional<int> K, S, q;
  std::optional<std::int64_t> N;
  McmcOpts mcmc;
  std::string json_out;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_benchmark(const Common& common, const BenchOpts& o) {
  BenchmarkConfig cfg;
  if (!o.config.empty()) {
    if (o.scenario) throw DomainError("give either --config or --scenario, not both");
    cfg = benchmark_config_from_json(parse_json(read_text(o.config), o.config));
    if (o.replicates) {
      for (auto& s : cfg.settings) s.replicates = *o.replicates;
    }
  } else {
    if (!o.scenario) throw DomainError("benchmark needs --config or --scenario");
    if (*o.scenario < 1 || *o.scenario > 3) throw DomainError("--scenario must be 1, 2 or 3");
    auto sc = ScenarioConfig::standard(static_cast<Scenario>(*o.scenario), o.setting);
    if (o.K) sc.K = *o.K;
    if (o.S) sc.S = *o.S;
    if (o.N) sc.N = *o.N;
    if (o.q) sc.q = *o.q;
    if (o.replicates) sc.replicates = *o.replicates;
    sc.seed = Seed{o.mcmc.seed};
    sc.validate();
    cfg.settings.push_back(sc);
    const auto names = split_list(o.methods.empty() ? "dm1,ph1h,ph1d" : o.methods);
    for (const auto& n : names) cfg.methods.push_back(MethodSpec::named(n));
    cfg.budget = resolve_mcmc(o.mcmc);
  }
  if (common.threads > 0) cfg.threads = common.threads;
  cfg.validate();

  json config = base_config("benchmark", common);
  config["benchmark"] = to_json(cfg);
  config["benchmark"].erase("threads");  // results do not depend on it

  const auto report = run_benchmark(cfg);
  std::size_t failures = 0;
  for (const auto& r : report.rows) {
    failures += r.failures;
    std::cerr << r.method << " " << r.setting << ": ABS x100 " << format_double(r.abs_mean) << " (se "
              << format_double(r.abs_se) << "), COV " << format_double(r.cov_mean) << "\n";
  }
  if (!o.json_out.empty()) atomic_write(o.json_out, json_with_echo(to_json(report), config));
  emit(common.out, csv_with_echo(report_table(report), config, {"seconds is wall-clock time and the only non-reproducible column"}));
  if (failures > 0) {
    std::cerr << "error: " << failures << " replicate(s) failed; see the JSON report for messages\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// table

struct TableOpts {
  std::string observations;
  std::string alphabets;
  PriorOpts prior;
  McmcOpts mcmc;
  std::size_t max_draws = 2000;
  std::string generate;
  int positions = 7;
  int levels = 4;
  std::size_t n = 53;
};

int cmd_table(const Common& common, const TableOpts& o) {
  json config = base_config("table", common);
  if (!o.generate.empty()) {
    SyntheticKind kind;
    if (o.generate == "independent") {
      kind = SyntheticKind::Independent;
    } else if (o.generate == "copy") {
      kind = SyntheticKind::Copy;
    } else if (o.generate == "promoter") {
      kind = SyntheticKind::Promoter;
    } else {
      throw DomainError("--generate must be independent, copy or promoter");
    }
    config["generate"] = {{"kind", o.generate}, {"positions", o.positions}, {"levels", o.levels}, {"n", o.n}, {"seed", o.mcmc.seed}};
    emit(common.out, csv_with_echo(synthetic_observations(kind, o.positions, o.levels, o.n, Seed{o.mcmc.seed}), config));
    return 0;
  }
  if (o.observations.empty()) throw DomainError("table needs --observations or --generate");
  const auto prior = resolve_prior(o.prior);
  const auto budget = resolve_mcmc(o.mcmc);
  std::optional<std::vector<std::vector<std::string>>> alphabets;
  if (!o.alphabets.empty()) {
    const auto j = parse_json(read_text(o.alphabets), o.alphabets);
    try {
      alphabets = j.get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception&) {
      throw ParseError(o.alphabets + ": alphabets must be an array of string arrays, one per position");
    }
  }
  const auto obs = observations_from_csv(parse_csv(read_text(o.observations), o.observations), alphabets, o.observations);
  config["observations"] = o.observations;
  config["alphabets"] = obs.alphabets;
  config["prior"] = to_json(prior);
  config["mcmc"] = mcmc_json(budget, o.mcmc.seed);
  config["max_draws"] = o.max_draws;
  config["cells"] = obs.table.cells();

  CsvTable t;
  t.header = {"j", "j_prime", "mean", "q025", "q975"};
  if (obs.table.positions() >= 2) {
    const auto s = table_posterior_cramers_v(obs.table, prior, budget, Seed{o.mcmc.seed}, o.max_draws);
    for (const auto& p : s.pairs) {
      t.rows.push_back({std::to_string(p.j + 1), std::to_string(p.jp + 1), format_double(p.rho.mean),
                        format_double(p.rho.q025), format_double(p.rho.q975)});
    }
  }
  emit(common.out, csv_with_echo(t, config));
  return 0;
}

// ---------------------------------------------------------------------------
// nb-generate, esf, yule

struct NbOpts {
  PriorOpts prior;
  std::size_t draws = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t max_bin = 50;
};

int cmd_nb(const Common& common, const NbOpts& o) {
  NBCoupledPrior p;
  p.prior = resolve_prior(o.prior);
  json config = base_config("nb-generate", common);
  config["prior"] = to_json(p.prior);
  config["draws"] = o.draws;
  config["seed"] = o.seed;
  config["max_bin"] = o.max_bin;
  const auto g = nb_generate(p, o.draws, Seed{o.seed}, o.max_bin);
  emit(common.out, csv_with_echo(histogram_table(g), config, nb_notes(g)));
  return 0;
}

struct EsfOpts {
  std::string partition;
  PriorOpts prior;
};

int cmd_esf(const Common& common, const EsfOpts& o) {
  const auto prior = resolve_prior(o.prior);
  const auto j = parse_json(text_or_file(o.partition), "--partition");
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  try {
    pairs = j.get<std::vector<std::pair<std::int64_t, std::int64_t>>>();
  } catch (const json::exception&) {
    throw ParseError("--partition must be a JSON array of [j, m_j] pairs");
  }
  const auto part = AllelicPartition::from_pairs(pairs);
  part.validate();
  const auto opts = expansion_options(common);
  json config = base_config("esf", common);
  config["partition"] = j;
  config["prior"] = to_json(prior);
  json out = expansion_summary(esf_posterior(part, prior, opts), esf_posterior_rational(part, prior), opts);
  out["n"] = part.n();
  out["alleles"] = part.alleles();
  emit(common.out, json_with_echo({{"alpha", out}}, config));
  return 0;
}

struct YuleOpts {
  std::vector<std::int64_t> counts;
  std::string counts_file;
  PriorOpts prior;
};

int cmd_yule(const Common& common, const YuleOpts& o) {
  const auto prior = resolve_prior(o.prior);
  std::vector<std::int64_t> counts = o.counts;
  if (!o.counts_file.empty()) {
    const auto t = parse_csv(read_text(o.counts_file), o.counts_file);
    if (t.header.size() != 1) throw ParseError(o.counts_file + ": expected a single 'count' column");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      try {
        std::size_t used = 0;
        const auto v = std::stoll(t.rows[r][0], &used);
        if (used != t.rows[r][0].size()) throw std::invalid_argument("");
        counts.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(o.counts_file + ": line " + std::to_string(t.lines[r]) + ": not an integer count");
      }
    }
  }
  if (counts.empty()) throw DomainError("yule needs --counts or --counts-file");
  for (auto n : counts) {
    if (n < 1) throw DomainError("Yule-Simon counts must be at least 1");
  }
  const auto opts = expansion_options(common);
  json config = base_config("yule", common);
  config["counts"] = counts;
  config["prior"] = to_json(prior);
  json out = expansion_summary(yule_simon_posterior(counts, prior, opts), yule_simon_posterior_rational(counts, prior), opts);
  out["K"] = counts.size();
  emit(common.out, json_with_echo({{"alpha", out}}, config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pochhammer prior inference for sparse count models"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Common common;
  app.add_option("--precision", common.precision, "double, extended or extended:<bits>")
      ->envname("PHPRIOR_PRECISION")
      ->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads for the benchmark (0: all cores)")->envname("PHPRIOR_THREADS");

  auto add_out = [&](CLI::App* cmd, const char* help) { cmd->add_option("-o,--out", common.out, help); };

  DensityOpts dens;
  auto* density = app.add_subcommand("density", "prior density and CDF on a grid, or figure data");
  add_prior(density, dens.prior);
  density->add_option("--grid", dens.grid, "log or linear")->capture_default_str();
  density->add_option("--from", dens.from, "first grid point")->capture_default_str();
  density->add_option("--to", dens.to, "last grid point")->capture_default_str();
  density->add_option("--points", dens.points, "grid size")->capture_default_str();
  density->add_option("--figure", dens.figure, "fig1, fig2, fig3 or fig4: write the figure's curve files into --out");
  density->add_option("--draws", dens.draws, "Monte Carlo draws for fig3/fig4");
  density->add_option("--seed", dens.seed, "seed for fig3/fig4")->capture_default_str();
  add_out(density, "output CSV (stdout if omitted), or the directory for --figure");

  FitOpts fit;
  auto* fitc = app.add_subcommand("fit", "posterior of alpha and pi for a counts CSV");
  fitc->add_option("--counts", fit.counts, "CSV with one document per row, one category per column")->required();
  fitc->add_option("--mode", fit.mode, "homogeneous or heterogeneous")->capture_default_str();
  add_prior(fitc, fit.prior);
  add_mcmc(fitc, fit.mcmc);
  fitc->add_option("--chain", fit.chain, "write retained alpha draws to this CSV");
  fitc->add_option("--intervals", fit.intervals, "plugin or dirichlet pi intervals")->capture_default_str();
  fitc->add_option("--max-draws", fit.max_draws, "draws used for interval estimates")->capture_default_str();
  add_out(fitc, "summary JSON (stdout if omitted)");

  BenchOpts bench;
  auto* benchc = app.add_subcommand("benchmark", "simulation benchmark of DM and PH posteriors");
  benchc->add_option("--config", bench.config, "benchmark config JSON");
  benchc->add_option("--scenario", bench.scenario, "1, 2 or 3");
  benchc->add_option("--setting", bench.setting, "setting within the scenario")->capture_default_str();
  benchc->add_option("--methods", bench.methods, "comma-separated method names (dm1, dm_half, dm_invK, ph1h..ph4h, ph1d..ph4d)");
  benchc->add_option("--replicates", bench.replicates, "replicates per setting");
  benchc->add_option("--K", bench.K, "categories");
  benchc->add_option("--S", bench.S, "documents");
  benchc->add_option("--N", bench.N, "counts per document (scenario 1)");
  benchc->add_option("--q", bench.q, "percentage of structural zeros (scenario 3)");
  add_mcmc(benchc, bench.mcmc);
  benchc->add_option("--json", bench.json_out, "also write the JSON report with per-replicate cells");
  add_out(benchc, "report CSV (stdout if omitted)");

  TableOpts tab;
  auto* tablec = app.add_subcommand("table", "posterior Cramer's V between positions of a tuple CSV");
  tablec->add_option("--observations", tab.observations, "CSV with columns pos_1..pos_p");
  tablec->add_option("--alphabets", tab.alphabets, "JSON array of level alphabets, one per position");
  add_prior(tablec, tab.prior);
  add_mcmc(tablec, tab.mcmc);
  tablec->add_option("--max-draws", tab.max_draws, "draws used for the summaries")->capture_default_str();
  tablec->add_option("--generate", tab.generate, "write synthetic observations instead: independent, copy or promoter");
  tablec->add_option("--positions", tab.positions, "positions for --generate")->capture_default_str();
  tablec->add_option("--levels", tab.levels, "levels per position for --generate")->capture_default_str();
  tablec->add_option("--n", tab.n, "observations for --generate")->capture_default_str();
  add_out(tablec, "output CSV (stdout if omitted)");

  NbOpts nb;
  auto* nbc = app.add_subcommand("nb-generate", "counts from the NB model with the coupled PH-Beta prior");
  add_prior(nbc, nb.prior);
  nbc->add_option("--draws", nb.draws, "number of counts")->capture_default_str();
  nbc->add_option("--seed", nb.seed, "seed")->capture_default_str();
  nbc->add_option("--max-bin", nb.max_bin, "largest count with its own histogram row; larger counts are tallied as overflow")->capture_default_str();
  add_out(nbc, "histogram CSV (stdout if omitted)");

  EsfOpts esf;
  auto* esfc = app.add_subcommand("esf", "posterior of the Ewens sampling formula parameter");
  esfc->add_option("--partition", esf.partition, "JSON [[j, m_j], ...] or @file")->required();
  add_prior(esfc, esf.prior);
  add_out(esfc, "summary JSON (stdout if omitted)");

  YuleOpts yule;
  auto* yulec = app.add_subcommand("yule", "posterior of the Yule-Simon parameter");
  yulec->add_option("--counts", yule.counts, "counts (>= 1)")->delimiter(',');
  yulec->add_option("--counts-file", yule.counts_file, "CSV with a single count column");
  add_prior(yulec, yule.prior);
  add_out(yulec, "summary JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*density) return cmd_density(common, dens);
    if (*fitc) return cmd_fit(common, fit);
    if (*benchc) return cmd_benchmark(common, bench);
    if (*tablec) return cmd_table(common, tab);
    if (*nbc) return cmd_nb(common, nb);
    if (*esfc) return cmd_esf(common, esf);
    if (*yulec) return cmd_yule(common, yule);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
