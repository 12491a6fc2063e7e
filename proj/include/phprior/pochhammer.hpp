#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "phprior/closed_form.hpp"
#include "phprior/quadrature.hpp"
#include "phprior/residue.hpp"
#include "phprior/rng.hpp"
#include "phprior/scalar.hpp"

namespace phprior {

// PPH(m, a, b, c, d): density proportional to x^d [x]^m / [c x + a]^b on
// x >= 0. d = 0 is the plain PH family.
struct PochhammerParams {
  int m = 0;
  Scalar a = Scalar::integer(1);
  int b = 2;
  Scalar c = Scalar::integer(1);
  int d = 0;

  // Throws DomainError (sign/range) or IntegrabilityError (b < m + d + 2).
  void validate() const;
  std::string to_string() const;
  // Number of finite moments, b - (m + d + 2).
  int moments() const { return b - (m + d + 2); }
};

// Half-horseshoe PH(0, 1, 2, 1), the recommended default.
inline const PochhammerParams kDefaultPrior{0, Scalar::integer(1), 2, Scalar::integer(1), 0};

// x^d [x]^m / [c x + a]^b as a rational density.
RationalDensity ph_rational(const PochhammerParams& p);

// Residue expansion; ph_residues requires d == 0.
ResidueExpansion ph_residues(const PochhammerParams& p, const ExpansionOptions& opts = {});
ResidueExpansion pph_residues(const PochhammerParams& p, const ExpansionOptions& opts = {});

// Explicit coefficient formulas: gamma_i against (c x + a + i - 1), i = 1..b,
// and C = sum_i (-gamma_i / c) ln(a + i - 1). beta is empty.
ClosedForm pph_closed_form(const PochhammerParams& p,
                           Precision precision = Precision::double_precision());

// ln of the normalizing constant (residue path with escalation).
double ph_log_norm(const PochhammerParams& p);

// E(x^k) = C(d + k) / C(d). Throws MomentDoesNotExist when k > b - (m + d + 2).
double ph_moment(const PochhammerParams& p, int k);

// A PPH distribution with its expansion computed once.
class Pochhammer {
 public:
  explicit Pochhammer(PochhammerParams p, const ExpansionOptions& opts = {});

  const PochhammerParams& params() const { return params_; }
  const ResidueExpansion& expansion() const { return *expansion_; }
  double log_norm() const { return expansion_->log_norm_const; }

  // Direct log-gamma evaluation; -inf where the density vanishes.
  double log_density(double x) const;
  double density(double x) const;
  double cdf(double x) const;
  double survival(double x) const;
  double log_survival(double x) const;
  // x with |cdf(x) - u| <= 1e-10 (u in (0, 1)).
  double quantile(double u) const;
  std::vector<double> sample(std::size_t n, Seed seed) const;
  double sample_one(Rng& rng) const;
  double moment(int k) const;

 private:
  PochhammerParams params_;
  std::shared_ptr<const ResidueExpansion> expansion_;
  // Tabulated CDF, built when the expansion is not a plain double residue sum
  // (its quantile would need escalated arithmetic on every bisection step).
  std::shared_ptr<const TabulatedCdf> table_;
};

double ph_log_density(const PochhammerParams& p, double x);
double ph_cdf(const PochhammerParams& p, double x);
double ph_quantile(const PochhammerParams& p, double u);
std::vector<double> ph_sample(const PochhammerParams& p, std::size_t n, Seed seed);

// P(x <= sqrt(eps)).
double prior_mass_near_zero(const PochhammerParams& p, double eps);

// e^{t x} (1 - F(x)) on the grid, or its log when `log_values`.
std::vector<double> heavy_tail_check(const PochhammerParams& p, double t, const std::vector<double>& grid,
                                     bool log_values = false);
// Same check for any distribution given its log-survival function.
std::vector<double> heavy_tail_check(const std::function<double(double)>& log_survival, double t,
                                     const std::vector<double>& grid, bool log_values = false);

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

struct StirlingGammaResult {
  std::vector<int> b;
  std::vector<double> ks;
};
// Draws PH(0, 1, b, 1), rescales by ln b, and measures the KS distance to Exp(1).
StirlingGammaResult stirling_gamma_limit_experiment(const std::vector<int>& b_grid, std::size_t n, Seed seed);

struct Curve {
  std::string name;
  std::vector<double> x;
  std::vector<std::vector<double>> columns;
  std::vector<std::string> headers;  // names of `columns`
};

std::vector<double> logspace(double lo_exp, double hi_exp, std::size_t n);
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Density and CDF of a PPH on the grid (columns: density, cdf).
Curve density_curve(const PochhammerParams& p, const std::vector<double>& grid, const std::string& name = "");
// Baseline (0, 1.1, 2, 5) and its one-parameter perturbations on logspace(-3, 3, 400).
std::vector<Curve> figure1_curves();
// PH(0, 1, b, 1) against Gamma(1, ln b) for b in {5, 50, 500}.
std::vector<Curve> figure2_curves();

}  // namespace phprior
