#pragma once

// Partial-fraction machinery for densities of the form
//
//   f(x) = K * prod_j (s_j x + o_j)^{p_j} / prod_l (t_l x + q_l)^{r_l},  x >= 0,
//
// with all roots -o/s, -q/t non-positive. Common roots are cancelled, the
// remaining poles (order 1 or 2) are resolved by evaluating the residue
// identity at each pole, and the integral over (0, inf) follows from
// term-by-term integration using sum_i A_i = 0.

#include <memory>
#include <optional>
#include <vector>

#include "phprior/scalar.hpp"
#include "phprior/signed_log.hpp"

namespace phprior {

// (scale * x + offset)^power with scale > 0 and offset >= 0.
struct LinearFactor {
  Scalar scale;
  Scalar offset;
  int power = 1;
};

struct ExpansionOptions {
  Precision precision = Precision::double_precision();
  // Double -> Extended(256) when the normalizer sum loses too many digits.
  bool escalate = true;
  // Quadrature normalizer when the residue path is unusable (precision loss
  // after escalation, or poles of order > 2).
  bool quadrature_fallback = true;
  // Maximum number of distinct poles for the exact path.
  std::size_t max_poles = 400;
};

class RationalDensity;

// One pole at `root` (<= 0) of the given order. The density contributes
// residue / (x - root) + residue2 / (x - root)^2. `scale` is the factor scale
// the pole came from, so coefficient() reports the residue against
// (scale * x + offset) as written in closed forms.
struct Pole {
  Scalar root;
  int order = 1;
  double scale = 1.0;
  SignedLogReal residue;
  SignedLogReal residue2;

  SignedLogReal coefficient() const { return residue * SignedLogReal::from_real(scale); }
  SignedLogReal coefficient2() const {
    return residue2 * SignedLogReal::from_real(scale * scale);
  }
};

struct ExtendedCoefficients;

class ResidueExpansion {
 public:
  std::vector<Pole> poles;
  double log_norm_const = 0.0;  // ln of the integral over (0, inf)
  Precision precision_used;
  // Normalizer computed by quadrature; poles may be empty or untrusted.
  bool numeric_fallback = false;
  // Cancellation (nats) observed in the normalizer sum.
  double cancellation = 0.0;

  double norm_const() const;
  // Sum of order-1 residues and its relative size against max |residue|.
  SumResult residue_sum() const;
  double residue_sum_relative() const;

  // Normalized density from the residue form.
  double density(double x) const;
  double cdf(double x) const;
  double survival(double x) const;
  // ln of the survival function; finite far into the tail.
  double log_survival(double x) const;

  const RationalDensity& source() const { return *source_; }

 private:
  friend class RationalDensity;
  std::shared_ptr<const RationalDensity> source_;
  std::shared_ptr<const ExtendedCoefficients> extended_;
  // Unnormalized residue-form integrals over [0, x] and [x, inf); nullopt
  // when the sum loses too many digits to be trusted.
  std::optional<double> residue_integral(double x) const;
  std::optional<double> residue_tail(double x) const;
  double quadrature_integral(double lo, double hi) const;
};

class RationalDensity {
 public:
  RationalDensity() = default;

  RationalDensity& multiply(LinearFactor f);
  RationalDensity& divide(LinearFactor f);
  // Multiplies by (x + offset)(x + offset + 1)...(x + offset + n - 1) with the
  // given scale applied to x: prod_{i<n} (scale x + offset + i).
  RationalDensity& multiply_rising(Scalar scale, Scalar offset, int n);
  RationalDensity& divide_rising(Scalar scale, Scalar offset, int n);
  RationalDensity& multiply_power(int d);  // x^d
  RationalDensity& add_log_constant(double c) {
    log_constant_ += c;
    return *this;
  }

  int numerator_degree() const;
  int denominator_degree() const;

  // ln f(x) for x >= 0 evaluated from the factored form after cancellation.
  double log_eval(double x) const;

  // Distinct denominator roots that coincide (before numerator cancellation).
  bool has_repeated_denominator_roots() const;

  ResidueExpansion expand(const ExpansionOptions& opts = {}) const;
  // Normalizer by quadrature only (independent of the residue path).
  double quadrature_log_norm(double rel_tol = 1e-11) const;

  struct Root {
    Scalar root;
    int multiplicity = 0;  // > 0: numerator zero, < 0: pole of that order
    double scale = 1.0;
  };
  // Reduced root form: f(x) = exp(log_scale) prod (x - root)^{multiplicity}.
  std::vector<Root> reduced_roots() const;
  double reduced_log_scale() const;

  const std::vector<LinearFactor>& numerator() const { return numerator_; }
  const std::vector<LinearFactor>& denominator() const { return denominator_; }

 private:
  std::vector<LinearFactor> numerator_;
  std::vector<LinearFactor> denominator_;
  double log_constant_ = 0.0;

  void invalidate() { reduced_.reset(); }
  struct Reduced;
  const Reduced& reduced() const;
  mutable std::shared_ptr<const Reduced> reduced_;

  ResidueExpansion quadrature_expansion(const ExpansionOptions& opts) const;
};

}  // namespace phprior
