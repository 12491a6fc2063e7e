#include "phprior/dm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "closed_form_impl.hpp"
#include "phprior/errors.hpp"
#include "phprior/special.hpp"

namespace phprior {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_no_double_poles(const RationalDensity& r, const char* what) {
  for (const auto& root : r.reduced_roots()) {
    if (root.multiplicity <= -2) {
      throw PoleCollision(std::string(what) + ": likelihood and prior poles coincide at alpha = " +
                          std::to_string(-root.root.value) +
                          "; perturb a, or use homog_posterior_double_root for a = 0, c = K");
    }
  }
}

std::int64_t total(const std::vector<std::int64_t>& n) {
  std::int64_t s = 0;
  for (auto v : n) s += v;
  return s;
}

// Scale near the bulk of a density on (0, inf): argmax of f(x) x over a log grid.
double bulk_scale(const std::function<double(double)>& log_f) {
  double best = kNegInf, arg = 1.0;
  for (int i = 0; i <= 240; ++i) {
    const double x = std::pow(10.0, -8.0 + i / 15.0);
    const double v = log_f(x) + std::log(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return arg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<std::vector<std::int64_t>> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw DomainError("Corpus: need at least one document");
  const std::size_t K = counts_.front().size();
  if (K == 0) throw DomainError("Corpus: need at least one category");
  for (const auto& row : counts_) {
    if (row.size() != K) throw ShapeMismatch("Corpus: rows have different lengths");
    std::int64_t s = 0;
    for (auto v : row) {
      if (v < 0) throw DomainError("Corpus: negative count");
      s += v;
    }
    row_totals_.push_back(s);
  }
}

std::vector<std::int64_t> Corpus::column_totals() const {
  std::vector<std::int64_t> out(K(), 0);
  for (const auto& row : counts_) {
    for (int k = 0; k < K(); ++k) out[k] += row[k];
  }
  return out;
}

double marginal_log_likelihood(const Corpus& corpus, const std::vector<double>& alpha) {
  if (static_cast<int>(alpha.size()) != corpus.K()) throw ShapeMismatch("marginal_log_likelihood: alpha has wrong length");
  double A = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("marginal_log_likelihood: alpha must be positive");
    A += a;
  }
  double out = 0.0;
  for (int s = 0; s < corpus.S(); ++s) {
    out -= log_rising(A, corpus.row_totals()[s]);
    for (int k = 0; k < corpus.K(); ++k) out += log_rising(alpha[k], corpus.count(s, k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homogeneous posterior

RationalDensity homog_rational(const std::vector<std::int64_t>& n, const PochhammerParams& prior, int tilt) {
  const Scalar zero = Scalar::integer(0), one = Scalar::integer(1);
  RationalDensity r;
  r.multiply_rising(one, zero, prior.m);
  for (auto nk : n) {
    if (nk < 0) throw DomainError("homog_rational: negative count");
    r.multiply_rising(one, zero, static_cast<int>(nk));
  }
  r.divide_rising(Scalar::integer(static_cast<std::int64_t>(n.size())), zero, static_cast<int>(total(n)));
  r.divide_rising(prior.c, prior.a, prior.b);
  r.multiply_power(prior.d + tilt);
  return r;
}

double HomogeneousPosterior::log_density(double alpha) const {
  if (!(alpha >= 0.0) || std::isinf(alpha)) return kNegInf;
  return expansion.source().log_eval(alpha) - log_C_n;
}

TabulatedCdf HomogeneousPosterior::alpha_table() const {
  const ResidueExpansion e = expansion;
  auto log_f = [e](double x) { return e.source().log_eval(x); };
  return TabulatedCdf(log_f, bulk_scale(log_f));
}

HomogeneousPosterior homog_posterior(const Corpus& corpus, const PochhammerParams& prior, const ExpansionOptions& opts) {
  if (corpus.S() != 1) throw DomainError("homog_posterior: closed form needs a single document (use mwg_sample)");
  if (prior.d != 0) throw DomainError("homog_posterior: prior must have d = 0");
  prior.validate();
  const RationalDensity r = homog_rational(corpus.row(0), prior);
  require_no_double_poles(r, "homog_posterior");
  HomogeneousPosterior post;
  post.expansion = r.expand(opts);
  post.log_C_n = post.expansion.log_norm_const;
  post.params = prior;
  post.counts = corpus;
  return post;
}

HomogeneousPosterior homog_posterior_double_root(const Corpus& corpus, const PochhammerParams& prior,
                                                 const ExpansionOptions& opts) {
  if (corpus.S() != 1) throw DomainError("homog_posterior_double_root: needs a single document");
  if (prior.d != 0) throw DomainError("homog_posterior_double_root: prior must have d = 0");
  if (prior.a.value != 0.0 || !same_value(prior.c, Scalar::integer(corpus.K()))) {
    throw DomainError("homog_posterior_double_root: prior must have a = 0 and c = K (got " + prior.to_string() + ")");
  }
  prior.validate();
  HomogeneousPosterior post;
  post.expansion = homog_rational(corpus.row(0), prior).expand(opts);
  post.log_C_n = post.expansion.log_norm_const;
  post.params = prior;
  post.counts = corpus;
  post.double_root = true;
  return post;
}

ClosedForm homog_closed_form(const std::vector<std::int64_t>& n, const PochhammerParams& prior, Precision precision) {
  prior.validate();
  if (prior.d != 0) throw DomainError("homog_closed_form: prior must have d = 0");
  if (n.empty()) throw DomainError("homog_closed_form: need at least one category");
  if (prior.a.value == 0.0) throw PoleCollision("homog_closed_form: a = 0 collides with the pole at 0 (double-root form)");
  const std::int64_t K = static_cast<std::int64_t>(n.size());
  const std::int64_t N = total(n);
  const Scalar Ks = Scalar::integer(K);
  const Scalar one = Scalar::integer(1);
  const PochhammerParams& p = prior;
  // counts including the prior pseudo-count n_0 = m
  std::vector<std::int64_t> all{p.m};
  all.insert(all.end(), n.begin(), n.end());

  auto formula = [&](auto policy) {
    using P = decltype(policy);
    detail::Terms<P> t;
    for (std::int64_t i = 1; i <= N; ++i) {
      typename P::Product g;
      for (auto nk : all) {
        for (std::int64_t s = 1; s <= nk; ++s) g.mul(Scalar::integer(1 + (s - 1) * K - i));
      }
      for (std::int64_t s = 1; s <= N; ++s) {
        if (s != i) g.div(Scalar::integer(s - i));
      }
      for (int tt = 1; tt <= p.b; ++tt) g.div(Ks * p.a + Scalar::integer(K * (tt - 1)) - p.c * Scalar::integer(i - 1));
      const std::int64_t kpow = N + p.m - p.b;
      for (std::int64_t q = 0; q < std::abs(kpow); ++q) {
        if (kpow > 0) {
          g.div(Ks);
        } else {
          g.mul(Ks);
        }
      }
      const auto gamma = g.value();
      t.gamma.push_back(gamma);
      if (i >= 2 && !P::is_zero(gamma)) {
        t.norm_terms.push_back(-gamma / P::make(Ks) * P::log_of(Scalar::integer(i - 1) / Ks));
      }
    }
    for (int j = 1; j <= p.b; ++j) {
      const Scalar J = Scalar::integer(j);
      typename P::Product g;
      for (auto nk : all) {
        for (std::int64_t s = 1; s <= nk; ++s) g.mul(one + Scalar::integer(s - 1) * p.c - p.a - J);
      }
      for (int q = 0; q < p.m; ++q) g.div(p.c);
      for (std::int64_t s = 1; s <= N; ++s) g.div(Ks + Scalar::integer(s - 1) * p.c - Ks * (p.a + J));
      for (int tt = 1; tt <= p.b; ++tt) {
        if (tt != j) g.div(Scalar::integer(tt - j));
      }
      const auto beta = g.value();
      t.beta.push_back(beta);
      if (!P::is_zero(beta)) {
        t.norm_terms.push_back(-beta / P::make(p.c) * P::log_of((p.a + J - one) / p.c));
      }
    }
    return t;
  };
  return detail::run_closed_form(formula, precision, [&] { return homog_rational(n, prior).quadrature_log_norm(); });
}

DoubleRootCoefficients double_root_coefficients(const HomogeneousPosterior& post) {
  const int K = post.counts.K();
  const std::int64_t N = post.counts.row_totals()[0];
  const std::size_t size = static_cast<std::size_t>(std::max<std::int64_t>(N, post.params.b));
  DoubleRootCoefficients out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
  for (const auto& pole : post.expansion.poles) {
    const long i = std::lround(-pole.root.value * K) + 1;
    if (i < 1 || static_cast<std::size_t>(i) > size) continue;
    // coefficients against (K alpha + i - 1) and its square
    const double ratio = K / pole.scale;
    out.gamma[i - 1] = pole.coefficient().to_real() * ratio;
    if (pole.order == 2) out.beta[i - 1] = pole.coefficient2().to_real() * ratio * ratio;
  }
  out.gamma[0] = 0.0;
  out.beta[0] = 0.0;
  return out;
}

double homog_posterior_mean_pi(const HomogeneousPosterior& post, int k) {
  const int K = post.counts.K();
  if (k < 0 || k >= K) throw DomainError("homog_posterior_mean_pi: category index out of range");
  if (post.params.b < post.params.m + 2) throw IntegrabilityError("homog_posterior_mean_pi: prior not integrable");
  if (K == 1) return 1.0;
  auto n = post.counts.row(0);
  n[k] += 1;
  const Corpus bumped = Corpus::single(n);
  const double log_num = post.double_root ? homog_posterior_double_root(bumped, post.params).log_C_n
                                          : homog_posterior(bumped, post.params).log_C_n;
  return std::exp(log_num - post.log_C_n);
}

double homog_posterior_mean_alpha(const HomogeneousPosterior& post) {
  const auto& p = post.params;
  if (p.b < p.m + 3) {
    throw MomentDoesNotExist("homog_posterior_mean_alpha: E(alpha | n) does not exist for b < m + 3 (" + p.to_string() + ")");
  }
  const double log_num = homog_rational(post.counts.row(0), p, 1).expand().log_norm_const;
  return std::exp(log_num - post.log_C_n);
}

// ---------------------------------------------------------------------------
// Heterogeneous Gibbs conditional

namespace {

void check_conditional_args(std::int64_t n_k, std::int64_t N, double A_minus_k) {
  if (!(A_minus_k > 0.0) || !std::isfinite(A_minus_k)) throw DomainError("heterogeneous conditional: A_{-k} must be positive");
  if (n_k < 0 || N < n_k) throw DomainError("heterogeneous conditional: need 0 <= n_k <= N");
}

RationalDensity conditional_rational(std::int64_t n_k, std::int64_t N, double A_minus_k, const PochhammerParams& prior) {
  const Scalar zero = Scalar::integer(0), one = Scalar::integer(1);
  RationalDensity r;
  r.multiply_rising(one, zero, static_cast<int>(n_k));
  r.multiply_rising(one, zero, prior.m);
  r.multiply_power(prior.d);
  r.divide_rising(one, Scalar(A_minus_k), static_cast<int>(N));
  r.divide_rising(prior.c, prior.a, prior.b);
  return r;
}

}  // namespace

double heter_conditional_log_density(double alpha_k, std::int64_t n_k, std::int64_t N, double A_minus_k,
                                     const PochhammerParams& prior) {
  check_conditional_args(n_k, N, A_minus_k);
  if (!(alpha_k >= 0.0) || std::isnan(alpha_k)) throw DomainError("heter_conditional_log_density: alpha_k must be non-negative");
  if (std::isinf(alpha_k)) return kNegInf;
  if (alpha_k == 0.0) {
    if (n_k > 0 || prior.m > 0 || prior.d > 0) return kNegInf;
    return -log_rising(A_minus_k, N) - log_rising(prior.a.value, prior.b);
  }
  return -log_rising(alpha_k + A_minus_k, N) + log_rising(alpha_k, n_k) + log_rising(alpha_k, prior.m) +
         prior.d * std::log(alpha_k) - log_rising(prior.c.value * alpha_k + prior.a.value, prior.b);
}

ResidueExpansion heter_conditional_expansion(std::int64_t n_k, std::int64_t N, double A_minus_k,
                                             const PochhammerParams& prior, const ExpansionOptions& opts,
                                             std::size_t max_size) {
  check_conditional_args(n_k, N, A_minus_k);
  prior.validate();
  if (static_cast<std::size_t>(N + prior.b) > max_size) {
    throw SizeBudgetExceeded("heter_conditional_expansion: N + b = " + std::to_string(N + prior.b) +
                             " exceeds the exact-path budget " + std::to_string(max_size));
  }
  const RationalDensity r = conditional_rational(n_k, N, A_minus_k, prior);
  require_no_double_poles(r, "heter_conditional_expansion");
  return r.expand(opts);
}

ClosedForm heter_conditional_closed_form(std::int64_t n_k, std::int64_t N, double A_minus_k,
                                         const PochhammerParams& prior, Precision precision) {
  check_conditional_args(n_k, N, A_minus_k);
  prior.validate();
  const PochhammerParams& p = prior;
  const Scalar A(A_minus_k);
  const Scalar one = Scalar::integer(1);
  auto formula = [&](auto policy) {
    using P = decltype(policy);
    using Num = typename P::Num;
    detail::Terms<P> t;
    // A is inexact, so every factor that involves it is formed in the policy's
    // own precision; pole tests still go through Scalar first.
    const Num a = P::num(p.a), c = P::num(p.c), An = P::num(A);
    for (std::int64_t j = 1; j <= N; ++j) {
      const Scalar root_s = -(A + Scalar::integer(j - 1));
      for (int s = 1; s <= p.b; ++s) {
        if ((p.c * root_s + p.a + Scalar::integer(s - 1)).value == 0.0) {
          throw PoleCollision("closed form: zero denominator factor");
        }
      }
      const Num root = -(An + Num(j - 1));  // alpha at the pole
      typename P::Product g;
      for (std::int64_t s = 1; s <= n_k; ++s) g.mul(Num(root + Num(s - 1)));
      for (int s = 1; s <= p.m; ++s) g.mul(Num(root + Num(s - 1)));
      for (int s = 0; s < p.d; ++s) g.mul(root);
      for (int s = 1; s <= p.b; ++s) g.div(Num(c * root + a + Num(s - 1)));
      for (std::int64_t s = 1; s <= N; ++s) {
        if (s != j) g.div(Scalar::integer(s - j));
      }
      const auto gamma = g.value();
      t.gamma.push_back(gamma);
      if (!P::is_zero(gamma)) t.norm_terms.push_back(-gamma * P::log_num(Num(-root)));
    }
    for (int j = 1; j <= p.b; ++j) {
      const Scalar J = Scalar::integer(j);
      typename P::Product g;
      for (std::int64_t s = 1; s <= n_k; ++s) g.mul(one + Scalar::integer(s - 1) * p.c - p.a - J);
      for (int s = 1; s <= p.m; ++s) g.mul(one + Scalar::integer(s - 1) * p.c - p.a - J);
      for (int s = 0; s < p.d; ++s) g.mul(one - p.a - J);
      const std::int64_t cpow = N - n_k - p.m - p.d;
      for (std::int64_t q = 0; q < std::abs(cpow); ++q) {
        if (cpow > 0) {
          g.mul(p.c);
        } else {
          g.div(p.c);
        }
      }
      for (std::int64_t s = 1; s <= N; ++s) {
        if ((one + (A + Scalar::integer(s - 1)) * p.c - p.a - J).value == 0.0) {
          throw PoleCollision("closed form: zero denominator factor");
        }
        g.div(Num(Num(1) + (An + Num(s - 1)) * c - a - Num(j)));
      }
      for (int tt = 1; tt <= p.b; ++tt) {
        if (tt != j) g.div(Scalar::integer(tt - j));
      }
      const auto beta = g.value();
      t.beta.push_back(beta);
      if (!P::is_zero(beta)) t.norm_terms.push_back(-beta / P::make(p.c) * P::log_of((p.a + J - one) / p.c));
    }
    return t;
  };
  return detail::run_closed_form(formula, precision, [&] {
    return conditional_rational(n_k, N, A_minus_k, prior).quadrature_log_norm();
  });
}

double heter_conditional_mean_pi(std::int64_t n_k, std::int64_t N, double A_minus_k, const PochhammerParams& prior) {
  check_conditional_args(n_k, N, A_minus_k);
  try {
    const double den = heter_conditional_expansion(n_k, N, A_minus_k, prior).log_norm_const;
    const double num = heter_conditional_expansion(n_k + 1, N + 1, A_minus_k, prior).log_norm_const;
    return std::exp(num - den);
  } catch (const std::exception& e) {
    // A is continuous, so exact pole coincidences are possible here
    if (!dynamic_cast<const SizeBudgetExceeded*>(&e) && !dynamic_cast<const PoleCollision*>(&e)) throw;
    auto log_norm = [&](std::int64_t nk, std::int64_t n) {
      return integrate_halfline_log(
                 [&](double x) { return heter_conditional_log_density(x, nk, n, A_minus_k, prior); }, {1e-11, 20000})
          .log_value;
    };
    return std::exp(log_norm(n_k + 1, N + 1) - log_norm(n_k, N));
  }
}

// ---------------------------------------------------------------------------
// Metropolis-within-Gibbs

std::vector<double> PosteriorChain::acceptance_rates() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    out.push_back(proposed[k] ? static_cast<double>(accepted[k]) / proposed[k] : 0.0);
  }
  return out;
}

namespace {

// -sum_s ln [A]^{N_s}, with documents grouped by N_s.
class TotalTerm {
 public:
  explicit TotalTerm(const std::vector<std::int64_t>& row_totals) {
    std::map<std::int64_t, std::int64_t> groups;
    for (auto n : row_totals) {
      if (n > 0) ++groups[n];
    }
    groups_.assign(groups.begin(), groups.end());
  }
  double operator()(double A) const {
    double v = 0.0;
    for (const auto& [n, mult] : groups_) v -= static_cast<double>(mult) * log_rising(A, n);
    return v;
  }

 private:
  std::vector<std::pair<std::int64_t, std::int64_t>> groups_;
};

}  // namespace

PosteriorChain mwg_sample(const Corpus& corpus, const PochhammerParams& prior, const MwgOptions& opts) {
  prior.validate();
  if (opts.iterations < 1) throw DomainError("mwg_sample: need at least one iteration");
  if (!(opts.stepsize > 0.0)) throw DomainError("mwg_sample: stepsize must be positive");
  if (opts.burn_in > opts.iterations) throw DomainError("mwg_sample: burn_in exceeds iterations");

  const int K = corpus.K();
  const std::size_t coords = opts.homogeneous ? 1 : static_cast<std::size_t>(K);
  // nonzero counts per category
  std::vector<std::vector<std::int64_t>> nonzero(K);
  for (int s = 0; s < corpus.S(); ++s) {
    for (int k = 0; k < K; ++k) {
      if (corpus.count(s, k) > 0) nonzero[k].push_back(corpus.count(s, k));
    }
  }
  const TotalTerm total_term(corpus.row_totals());
  const double a = prior.a.value, c = prior.c.value;
  auto log_prior = [&](double x) {
    return log_rising(x, prior.m) + prior.d * std::log(x) - log_rising(c * x + a, prior.b);
  };
  auto log_counts = [&](int k, double x) {
    double v = 0.0;
    for (auto n : nonzero[k]) v += log_rising(x, n);
    return v;
  };

  Rng rng(opts.seed);
  PosteriorChain chain;
  chain.seed = opts.seed;
  chain.stepsize = opts.stepsize;
  chain.burn_in = opts.burn_in;
  chain.homogeneous = opts.homogeneous;
  chain.accepted.assign(coords, 0);
  chain.proposed.assign(coords, 0);
  chain.draws.reserve(opts.iterations - opts.burn_in);

  std::vector<double> sigma(coords, opts.stepsize);
  std::vector<std::size_t> window_acc(coords, 0);
  constexpr std::size_t kWindow = 50;

  auto accept = [&](double lar) { return std::log(rng.uniform_open()) < lar; };

  if (opts.homogeneous) {
    double alpha = std::exp(rng.normal());
    auto log_target = [&](double x) {
      double v = log_prior(x) + total_term(K * x);
      for (int k = 0; k < K; ++k) v += log_counts(k, x);
      return v;
    };
    double current = log_target(alpha);
    for (std::size_t t = 0; t < opts.iterations; ++t) {
      const double eps = rng.normal(0.0, sigma[0]);
      const double prop = alpha * std::exp(eps);
      bool ok = false;
      if (prop > 0.0 && std::isfinite(prop)) {
        const double next = log_target(prop);
        if (accept(next - current + eps)) {
          alpha = prop;
          current = next;
          ok = true;
        }
      }
      if (t >= opts.burn_in) {
        ++chain.proposed[0];
        chain.accepted[0] += ok;
        chain.draws.emplace_back(K, alpha);
      } else if (opts.adapt) {
        window_acc[0] += ok;
        if ((t + 1) % kWindow == 0) {
          const double rate = static_cast<double>(window_acc[0]) / kWindow;
          sigma[0] = std::clamp(sigma[0] * std::exp(2.0 * (rate - 0.375)), 1e-3, 20.0);
          window_acc[0] = 0;
        }
      }
    }
    chain.final_stepsizes = sigma;
    return chain;
  }

  std::vector<double> alpha(K);
  for (double& x : alpha) x = std::exp(rng.normal());
  std::vector<double> own(K);
  for (int k = 0; k < K; ++k) own[k] = log_counts(k, alpha[k]) + log_prior(alpha[k]);

  for (std::size_t t = 0; t < opts.iterations; ++t) {
    double A = 0.0;
    for (double x : alpha) A += x;  // re-summed each sweep to avoid drift
    double shared = total_term(A);
    const bool retained = t >= opts.burn_in;
    for (int k = 0; k < K; ++k) {
      const double eps = rng.normal(0.0, sigma[k]);
      const double prop = alpha[k] * std::exp(eps);
      bool ok = false;
      if (prop > 0.0 && std::isfinite(prop)) {
        const double A_prop = std::max(A - alpha[k], 0.0) + prop;
        const double shared_prop = total_term(A_prop);
        const double own_prop = log_counts(k, prop) + log_prior(prop);
        // log-normal proposal: q(x | x') / q(x' | x) = x' / x
        const double lar = (own_prop + shared_prop) - (own[k] + shared) + eps;
        if (accept(lar)) {
          alpha[k] = prop;
          own[k] = own_prop;
          A = A_prop;
          shared = shared_prop;
          ok = true;
        }
      }
      if (retained) {
        ++chain.proposed[k];
        chain.accepted[k] += ok;
      } else {
        window_acc[k] += ok;
      }
    }
    if (retained) {
      chain.draws.push_back(alpha);
    } else if (opts.adapt && (t + 1) % kWindow == 0) {
      for (int k = 0; k < K; ++k) {
        const double rate = static_cast<double>(window_acc[k]) / kWindow;
        sigma[k] = std::clamp(sigma[k] * std::exp(2.0 * (rate - 0.375)), 1e-3, 20.0);
        window_acc[k] = 0;
      }
    }
  }
  chain.final_stepsizes = sigma;
  return chain;
}

PosteriorChain mwg_sample(const Corpus& corpus, const PochhammerParams& prior, std::size_t T, double sigma,
                          std::size_t burn_in, Seed seed) {
  MwgOptions opts;
  opts.iterations = T;
  opts.stepsize = sigma;
  opts.burn_in = burn_in;
  opts.seed = seed;
  return mwg_sample(corpus, prior, opts);
}

// ---------------------------------------------------------------------------
// Summaries

double empirical_quantile(std::vector<double>& values, double p) {
  if (values.empty()) throw DomainError("empirical_quantile: empty sample");
  const double h = (values.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double vlo = values[lo];
  if (lo + 1 >= values.size()) return vlo;
  const double vhi = *std::min_element(values.begin() + lo + 1, values.end());
  return vlo + (h - lo) * (vhi - vlo);
}

ChainSummary chain_summaries(const PosteriorChain& chain, const Corpus& corpus, PiIntervals intervals, Seed seed,
                             std::size_t max_draws) {
  if (chain.draws.empty()) throw DomainError("chain_summaries: no retained draws");
  const int K = corpus.K(), S = corpus.S();
  if (static_cast<int>(chain.draws.front().size()) != K) throw ShapeMismatch("chain_summaries: chain and corpus disagree on K");
  const std::size_t T = chain.draws.size();
  const std::size_t stride = std::max<std::size_t>(1, (T + max_draws - 1) / std::max<std::size_t>(max_draws, 1));

  ChainSummary out;
  out.acceptance = chain.acceptance_rates();
  out.alpha.resize(K);
  out.pi.assign(S, std::vector<Summary>(K));

  std::vector<double> A(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (double x : chain.draws[t]) A[t] += x;
  }
  // means over every retained draw
  for (std::size_t t = 0; t < T; ++t) {
    const auto& d = chain.draws[t];
    for (int k = 0; k < K; ++k) out.alpha[k].mean += d[k] / T;
    for (int s = 0; s < S; ++s) {
      const double denom = corpus.row_totals()[s] + A[t];
      for (int k = 0; k < K; ++k) out.pi[s][k].mean += (corpus.count(s, k) + d[k]) / denom / T;
    }
  }
  std::vector<double> buf;
  for (int k = 0; k < K; ++k) {
    buf.clear();
    for (std::size_t t = 0; t < T; t += stride) buf.push_back(chain.draws[t][k]);
    out.alpha[k].q025 = empirical_quantile(buf, 0.025);
    out.alpha[k].q975 = empirical_quantile(buf, 0.975);
  }
  // pi draws: rows of thinned draws, per document
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < T; t += stride) kept.push_back(t);
  Rng rng(seed);
  std::vector<std::vector<double>> pis(K, std::vector<double>(kept.size()));
  std::vector<double> shape(K);
  for (int s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const auto& d = chain.draws[kept[i]];
      if (intervals == PiIntervals::PlugIn) {
        const double denom = corpus.row_totals()[s] + A[kept[i]];
        for (int k = 0; k < K; ++k) pis[k][i] = (corpus.count(s, k) + d[k]) / denom;
      } else {
        for (int k = 0; k < K; ++k) shape[k] = corpus.count(s, k) + d[k];
        const auto pi = rng.dirichlet(shape);
        for (int k = 0; k < K; ++k) pis[k][i] = pi[k];
      }
    }
    for (int k = 0; k < K; ++k) {
      out.pi[s][k].q025 = empirical_quantile(pis[k], 0.025);
      out.pi[s][k].q975 = empirical_quantile(pis[k], 0.975);
    }
  }
  return out;
}

}  // namespace phprior
