#include "phprior/pochhammer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "closed_form_impl.hpp"
#include "phprior/errors.hpp"
#include "phprior/special.hpp"

namespace phprior {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double ClosedForm::norm() const { return std::exp(log_norm); }

void PochhammerParams::validate() const {
  if (m < 0 || b < 0 || d < 0) throw DomainError("Pochhammer: m, b, d must be non-negative integers");
  if (!(a.value >= 0.0) || !std::isfinite(a.value)) throw DomainError("Pochhammer: a must be non-negative");
  // a = 0 puts a pole at the origin that only an x factor can cancel.
  if (a.value == 0.0 && m + d == 0) throw IntegrabilityError("Pochhammer: a = 0 needs m + d >= 1");
  if (!(c.value > 0.0) || !std::isfinite(c.value)) throw DomainError("Pochhammer: c must be positive");
  if (b < m + d + 2) {
    throw IntegrabilityError("Pochhammer: need b >= m + d + 2 for integrability (got " + to_string() + ")");
  }
}

std::string PochhammerParams::to_string() const {
  std::ostringstream os;
  os << (d == 0 ? "PH(" : "PPH(") << "m=" << m << ", a=" << a.to_string() << ", b=" << b << ", c=" << c.to_string();
  if (d != 0) os << ", d=" << d;
  os << ")";
  return os.str();
}

RationalDensity ph_rational(const PochhammerParams& p) {
  RationalDensity r;
  r.multiply_rising(Scalar::integer(1), Scalar::integer(0), p.m);
  r.multiply_power(p.d);
  r.divide_rising(p.c, p.a, p.b);
  return r;
}

ResidueExpansion ph_residues(const PochhammerParams& p, const ExpansionOptions& opts) {
  if (p.d != 0) throw DomainError("ph_residues: d must be 0 (use pph_residues)");
  return pph_residues(p, opts);
}

ResidueExpansion pph_residues(const PochhammerParams& p, const ExpansionOptions& opts) {
  p.validate();
  return ph_rational(p).expand(opts);
}

ClosedForm pph_closed_form(const PochhammerParams& p, Precision precision) {
  p.validate();
  const Scalar one = Scalar::integer(1);
  auto formula = [&](auto policy) {
    using P = decltype(policy);
    detail::Terms<P> t;
    for (int i = 1; i <= p.b; ++i) {
      const Scalar I = Scalar::integer(i);
      typename P::Product g;
      for (int k = 0; k < p.d; ++k) g.mul(one - p.a - I);
      for (int s = 1; s <= p.m; ++s) g.mul(one + Scalar::integer(s - 1) * p.c - p.a - I);
      for (int k = 0; k < p.m + p.d; ++k) g.div(p.c);
      for (int k = 1; k <= p.b; ++k) {
        if (k != i) g.div(Scalar::integer(k - i));
      }
      const auto gamma = g.value();
      t.gamma.push_back(gamma);
      if (P::is_zero(gamma)) continue;  // a = 0: the pole at the origin cancels
      t.norm_terms.push_back(-gamma / P::make(p.c) * P::log_of(p.a + Scalar::integer(i - 1)));
    }
    return t;
  };
  return detail::run_closed_form(formula, precision, [&] { return ph_rational(p).quadrature_log_norm(); });
}

double ph_log_norm(const PochhammerParams& p) { return pph_residues(p).log_norm_const; }

double ph_moment(const PochhammerParams& p, int k) {
  p.validate();
  if (k < 0) throw DomainError("ph_moment: k must be non-negative");
  if (k == 0) return 1.0;
  if (k > p.moments()) {
    throw MomentDoesNotExist("ph_moment: " + p.to_string() + " has " + std::to_string(std::max(0, p.moments())) +
                             " finite moments, requested k = " + std::to_string(k));
  }
  PochhammerParams tilted = p;
  tilted.d += k;
  return std::exp(ph_log_norm(tilted) - ph_log_norm(p));
}

// ---------------------------------------------------------------------------

Pochhammer::Pochhammer(PochhammerParams p, const ExpansionOptions& opts) : params_(std::move(p)) {
  params_.validate();
  expansion_ = std::make_shared<const ResidueExpansion>(pph_residues(params_, opts));
  if (!expansion_->numeric_fallback && !expansion_->precision_used.is_extended()) return;
  const PochhammerParams q = params_;
  table_ = std::make_shared<const TabulatedCdf>(
      [q](double x) {
        if (!(x > 0.0)) return q.m > 0 || q.d > 0 ? kNegInf : -log_rising(q.a.value, q.b);
        return q.d * std::log(x) + log_rising(x, q.m) - log_rising(q.c.value * x + q.a.value, q.b);
      },
      (q.a.value > 0.0 ? q.a.value : 1.0) / q.c.value);
}

double Pochhammer::log_density(double x) const {
  if (x < 0.0 || std::isnan(x)) return kNegInf;
  const auto& p = params_;
  if (x == 0.0) {
    if (p.m > 0 || p.d > 0) return kNegInf;
    return -log_rising(p.a.value, p.b) - log_norm();
  }
  if (std::isinf(x)) return kNegInf;
  return p.d * std::log(x) + log_rising(x, p.m) - log_rising(p.c.value * x + p.a.value, p.b) - log_norm();
}

double Pochhammer::density(double x) const { return std::exp(log_density(x)); }
double Pochhammer::cdf(double x) const {
  return table_ ? table_->cdf(x) : expansion_->cdf(x);
}
double Pochhammer::survival(double x) const {
  return table_ ? table_->survival(x) : expansion_->survival(x);
}
double Pochhammer::log_survival(double x) const { return expansion_->log_survival(x); }

double Pochhammer::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  if (table_) return table_->quantile(u);
  double lo = 0.0, hi = 1.0;
  double fhi = cdf(hi);
  while (fhi < u) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
    fhi = cdf(hi);
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double f = cdf(x);
    const double err = f - u;
    if (std::fabs(err) <= 1e-14) break;
    if (err < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = density(x);
    double next = dens > 0.0 ? x - err / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double Pochhammer::sample_one(Rng& rng) const {
  return quantile(rng.uniform_open());
}

std::vector<double> Pochhammer::sample(std::size_t n, Seed seed) const {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
  return out;
}

double Pochhammer::moment(int k) const { return ph_moment(params_, k); }

double ph_log_density(const PochhammerParams& p, double x) { return Pochhammer(p).log_density(x); }
double ph_cdf(const PochhammerParams& p, double x) { return Pochhammer(p).cdf(x); }
double ph_quantile(const PochhammerParams& p, double u) { return Pochhammer(p).quantile(u); }
std::vector<double> ph_sample(const PochhammerParams& p, std::size_t n, Seed seed) {
  if (n == 0) {
    p.validate();
    return {};
  }
  return Pochhammer(p).sample(n, seed);
}

double prior_mass_near_zero(const PochhammerParams& p, double eps) {
  if (!(eps >= 0.0)) throw DomainError("prior_mass_near_zero: eps must be non-negative");
  return ph_cdf(p, std::sqrt(eps));
}

std::vector<double> heavy_tail_check(const std::function<double(double)>& log_survival, double t,
                                     const std::vector<double>& grid, bool log_values) {
  if (t < 0.0) throw DomainError("heavy_tail_check: t must be non-negative");
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const double v = t * x + log_survival(x);
    out.push_back(log_values ? v : std::exp(v));
  }
  return out;
}

std::vector<double> heavy_tail_check(const PochhammerParams& p, double t, const std::vector<double>& grid,
                                     bool log_values) {
  const Pochhammer dist(p);
  return heavy_tail_check([&](double x) { return dist.log_survival(x); }, t, grid, log_values);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

StirlingGammaResult stirling_gamma_limit_experiment(const std::vector<int>& b_grid, std::size_t n, Seed seed) {
  StirlingGammaResult out;
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    const int b = b_grid[i];
    if (b < 3) throw DomainError("stirling_gamma_limit_experiment: b must be >= 3");
    const Pochhammer dist({0, Scalar::integer(1), b, Scalar::integer(1), 0});
    // Same seed for every b: the draws are comonotone across b, so the KS
    // differences are not swamped by independent sampling noise.
    auto draws = dist.sample(n, seed);
    const double lb = std::log(static_cast<double>(b));
    for (double& x : draws) x *= lb;
    out.b.push_back(b);
    out.ks.push_back(ks_distance(std::move(draws), [](double x) { return -std::expm1(-x); }));
  }
  return out;
}

std::vector<double> logspace(double lo_exp, double hi_exp, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(std::pow(10.0, lo_exp + t * (hi_exp - lo_exp)));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(lo + t * (hi - lo));
  }
  return out;
}

Curve density_curve(const PochhammerParams& p, const std::vector<double>& grid, const std::string& name) {
  const Pochhammer dist(p);
  Curve c;
  c.name = name.empty() ? p.to_string() : name;
  c.x = grid;
  c.headers = {"density", "cdf"};
  c.columns.resize(2);
  for (double x : grid) {
    c.columns[0].push_back(dist.density(x));
    c.columns[1].push_back(dist.cdf(x));
  }
  return c;
}

std::vector<Curve> figure1_curves() {
  const auto grid = logspace(-3.0, 3.0, 400);
  const Scalar a0 = Scalar::parse("1.1"), c0 = Scalar::integer(5);
  struct Preset {
    const char* name;
    PochhammerParams p;
  };
  const std::vector<Preset> presets{
      {"fig1_baseline", {0, a0, 2, c0, 0}},
      {"fig1_m1", {1, a0, 3, c0, 0}},
      {"fig1_a0.5", {0, Scalar::parse("0.5"), 2, c0, 0}},
      {"fig1_a3", {0, Scalar::integer(3), 2, c0, 0}},
      {"fig1_b5", {0, a0, 5, c0, 0}},
      {"fig1_c1", {0, a0, 2, Scalar::integer(1), 0}},
      {"fig1_c20", {0, a0, 2, Scalar::integer(20), 0}},
  };
  std::vector<Curve> out;
  for (const auto& pr : presets) out.push_back(density_curve(pr.p, grid, pr.name));
  return out;
}

std::vector<Curve> figure2_curves() {
  const auto grid = linspace(0.0, 2.0, 401);
  std::vector<Curve> out;
  for (int b : {5, 50, 500}) {
    const Pochhammer dist({0, Scalar::integer(1), b, Scalar::integer(1), 0});
    const double rate = std::log(static_cast<double>(b));
    Curve c;
    c.name = "fig2_b" + std::to_string(b);
    c.x = grid;
    c.headers = {"ph_density", "gamma_density"};
    c.columns.resize(2);
    for (double x : grid) {
      c.columns[0].push_back(dist.density(x));
      c.columns[1].push_back(rate * std::exp(-rate * x));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace phprior
