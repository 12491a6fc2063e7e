#include "phprior/residue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phprior/errors.hpp"
#include "phprior/extended.hpp"
#include "phprior/quadrature.hpp"

namespace phprior {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

Scalar root_of(const LinearFactor& f) {
  if (!(f.scale.value > 0.0)) throw DomainError("linear factor: scale must be positive");
  if (f.offset.value < 0.0) throw DomainError("linear factor: offset must be non-negative");
  if (f.power < 0) throw DomainError("linear factor: negative power");
  return -(f.offset / f.scale);
}

// p - r, exact when both are.
Scalar difference(const Scalar& p, const Scalar& r) { return p - r; }

}  // namespace

struct ExtendedCoefficients {
  unsigned bits = 256;
  std::vector<ExtReal> roots;
  std::vector<ExtReal> residue;
  std::vector<ExtReal> residue2;
  ExtReal norm;
};

struct RationalDensity::Reduced {
  std::vector<Root> roots;
  double log_scale = 0.0;
  int num_degree = 0;
  int den_degree = 0;
  bool repeated_denominator = false;
};

// ---------------------------------------------------------------------------
// RationalDensity

RationalDensity& RationalDensity::multiply(LinearFactor f) {
  root_of(f);
  if (f.power > 0) numerator_.push_back(f);
  invalidate();
  return *this;
}

RationalDensity& RationalDensity::divide(LinearFactor f) {
  root_of(f);
  if (f.power > 0) denominator_.push_back(f);
  invalidate();
  return *this;
}

RationalDensity& RationalDensity::multiply_rising(Scalar scale, Scalar offset, int n) {
  for (int i = 0; i < n; ++i) multiply({scale, offset + Scalar::integer(i), 1});
  return *this;
}

RationalDensity& RationalDensity::divide_rising(Scalar scale, Scalar offset, int n) {
  for (int i = 0; i < n; ++i) divide({scale, offset + Scalar::integer(i), 1});
  return *this;
}

RationalDensity& RationalDensity::multiply_power(int d) {
  if (d < 0) throw DomainError("multiply_power: negative power");
  if (d > 0) multiply({Scalar::integer(1), Scalar::integer(0), d});
  return *this;
}

int RationalDensity::numerator_degree() const { return reduced().num_degree; }
int RationalDensity::denominator_degree() const { return reduced().den_degree; }

const RationalDensity::Reduced& RationalDensity::reduced() const {
  if (reduced_) return *reduced_;
  struct Entry {
    Scalar root;
    int mult;
    double scale;
  };
  std::vector<Entry> entries;
  auto red = std::make_shared<Reduced>();
  red->log_scale = log_constant_;
  for (const auto& f : numerator_) {
    entries.push_back({root_of(f), f.power, f.scale.value});
    red->log_scale += f.power * std::log(f.scale.value);
  }
  for (const auto& f : denominator_) {
    entries.push_back({root_of(f), -f.power, f.scale.value});
    red->log_scale -= f.power * std::log(f.scale.value);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.root.value < y.root.value; });
  for (std::size_t i = 0; i < entries.size();) {
    Root r{entries[i].root, 0, 1.0};
    int den_raw = 0;
    bool scale_set = false;
    std::size_t j = i;
    for (; j < entries.size() && same_value(entries[j].root, entries[i].root); ++j) {
      r.multiplicity += entries[j].mult;
      if (!r.root.exact && entries[j].root.exact) r.root = entries[j].root;
      if (entries[j].mult < 0) {
        den_raw -= entries[j].mult;
        if (!scale_set) {
          r.scale = entries[j].scale;
          scale_set = true;
        }
      }
    }
    if (den_raw > 1) red->repeated_denominator = true;
    if (r.multiplicity != 0) red->roots.push_back(r);
    i = j;
  }
  for (const auto& r : red->roots) {
    if (r.multiplicity > 0) {
      red->num_degree += r.multiplicity;
    } else {
      red->den_degree -= r.multiplicity;
    }
  }
  reduced_ = std::move(red);
  return *reduced_;
}

std::vector<RationalDensity::Root> RationalDensity::reduced_roots() const { return reduced().roots; }
double RationalDensity::reduced_log_scale() const { return reduced().log_scale; }

bool RationalDensity::has_repeated_denominator_roots() const { return reduced().repeated_denominator; }

double RationalDensity::log_eval(double x) const {
  if (x < 0.0) throw DomainError("log_eval: x must be non-negative");
  const Reduced& red = reduced();
  double out = red.log_scale;
  for (const auto& r : red.roots) {
    const double diff = x - r.root.value;
    if (diff == 0.0) return r.multiplicity > 0 ? kNegInf : kInf;
    out += r.multiplicity * std::log(diff);
  }
  return out;
}

double RationalDensity::quadrature_log_norm(double rel_tol) const {
  const Reduced& red = reduced();
  if (red.den_degree - red.num_degree < 2) {
    throw IntegrabilityError("density not integrable at infinity (degree gap < 2)");
  }
  for (const auto& r : red.roots) {
    if (r.multiplicity < 0 && r.root.value >= 0.0) {
      throw IntegrabilityError("density has a pole at the origin");
    }
  }
  return integrate_halfline_log([this](double x) { return log_eval(x); }, {rel_tol, 20000}).log_value;
}

namespace {

struct PoleWork {
  std::size_t index;  // into roots
  int order;
};

struct RawExpansion {
  std::vector<Pole> poles;
  double log_norm = 0.0;
  double cancellation = 0.0;
  bool positive = true;
  std::shared_ptr<ExtendedCoefficients> ext;
};

RawExpansion expand_double(const std::vector<RationalDensity::Root>& roots, double log_scale,
                           const std::vector<PoleWork>& work) {
  RawExpansion out;
  std::vector<SignedLogReal> norm_terms;
  for (const auto& pw : work) {
    const auto& p = roots[pw.index];
    int sign = 1;
    double logg = log_scale;
    std::vector<SignedLogReal> deriv_terms;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == pw.index) continue;
      const auto& r = roots[j];
      const double diff = difference(p.root, r.root).value;
      if (diff == 0.0) throw PoleCollision("residue: coincident roots after grouping");
      if (diff < 0.0 && (std::abs(r.multiplicity) % 2 == 1)) sign = -sign;
      logg += r.multiplicity * std::log(std::fabs(diff));
      if (pw.order == 2) deriv_terms.push_back(SignedLogReal::from_real(r.multiplicity / diff));
    }
    Pole pole;
    pole.root = p.root;
    pole.order = pw.order;
    pole.scale = p.scale;
    const SignedLogReal g = SignedLogReal::from_log(logg, sign);
    if (pw.order == 1) {
      pole.residue = g;
    } else {
      pole.residue2 = g;
      pole.residue = g * signed_log_sum(deriv_terms).value;
    }
    const double neg_root = -p.root.value;
    // -A ln(-p) + B / (-p)
    norm_terms.push_back(-pole.residue * SignedLogReal::from_real(std::log(neg_root)));
    if (pw.order == 2) norm_terms.push_back(pole.residue2 / SignedLogReal::from_real(neg_root));
    out.poles.push_back(pole);
  }
  const SumResult c = signed_log_sum(norm_terms);
  out.cancellation = c.cancellation;
  out.positive = c.value.sign > 0;
  out.log_norm = c.value.sign > 0 ? c.value.logmag : kNegInf;
  return out;
}

ExtReal ext_of(const Scalar& s) {
  if (s.exact) return ExtReal(s.exact->num) / ExtReal(s.exact->den);
  return ExtReal(s.value);
}

RawExpansion expand_extended(const std::vector<RationalDensity::Root>& roots, double log_scale,
                             const std::vector<PoleWork>& work, unsigned bits) {
  ExtendedScope scope(bits);
  RawExpansion out;
  auto ext = std::make_shared<ExtendedCoefficients>();
  ext->bits = bits;
  std::vector<ExtReal> root_vals;
  root_vals.reserve(roots.size());
  for (const auto& r : roots) root_vals.push_back(ext_of(r.root));
  // The overall scale is carried separately in log form to keep the
  // products well inside the exponent range.
  ExtReal norm = 0;
  ExtReal max_term = 0;
  for (const auto& pw : work) {
    const auto& p = roots[pw.index];
    ExtReal g = 1;
    ExtReal deriv = 0;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == pw.index) continue;
      const auto& r = roots[j];
      ExtReal diff = (p.root.exact && r.root.exact) ? ext_of(difference(p.root, r.root))
                                                    : ExtReal(root_vals[pw.index] - root_vals[j]);
      if (diff == 0) throw PoleCollision("residue: coincident roots after grouping");
      const int m = r.multiplicity;
      if (m > 0) {
        for (int k = 0; k < m; ++k) g *= diff;
      } else {
        for (int k = 0; k < -m; ++k) g /= diff;
      }
      if (pw.order == 2) deriv += ExtReal(m) / diff;
    }
    ExtReal a, b = 0;
    if (pw.order == 1) {
      a = g;
    } else {
      b = g;
      a = g * deriv;
    }
    const ExtReal neg_root = -root_vals[pw.index];
    const ExtReal t1 = -a * log(neg_root);
    norm += t1;
    max_term = std::max<ExtReal>(max_term, abs(t1));
    if (pw.order == 2) {
      const ExtReal t2 = b / neg_root;
      norm += t2;
      max_term = std::max<ExtReal>(max_term, abs(t2));
    }
    Pole pole;
    pole.root = p.root;
    pole.order = pw.order;
    pole.scale = p.scale;
    SignedLogReal sa = to_signed_log(a), sb = to_signed_log(b);
    if (!sa.is_zero()) sa.logmag += log_scale;
    if (!sb.is_zero()) sb.logmag += log_scale;
    pole.residue = sa;
    pole.residue2 = sb;
    out.poles.push_back(pole);
    ext->roots.push_back(root_vals[pw.index]);
    ext->residue.push_back(a);
    ext->residue2.push_back(b);
  }
  ext->norm = norm;
  if (norm == 0) {
    out.cancellation = kInf;
    out.positive = false;
    out.log_norm = kNegInf;
  } else {
    out.cancellation = static_cast<double>(log(max_term) - log(abs(norm)));
    out.positive = norm > 0;
    out.log_norm = out.positive ? static_cast<double>(log(norm)) + log_scale : kNegInf;
  }
  // Stored coefficients exclude the overall scale; fold it in.
  const ExtReal scale = exp(ExtReal(log_scale));
  for (auto& v : ext->residue) v *= scale;
  for (auto& v : ext->residue2) v *= scale;
  ext->norm *= scale;
  out.ext = std::move(ext);
  return out;
}

}  // namespace

ResidueExpansion RationalDensity::quadrature_expansion(const ExpansionOptions& opts) const {
  ResidueExpansion out;
  out.log_norm_const = quadrature_log_norm();
  out.precision_used = opts.precision;
  out.numeric_fallback = true;
  out.source_ = std::make_shared<const RationalDensity>(*this);
  return out;
}

ResidueExpansion RationalDensity::expand(const ExpansionOptions& opts) const {
  const Reduced& red = reduced();
  if (red.den_degree - red.num_degree < 2) {
    throw IntegrabilityError("density not integrable at infinity: denominator degree " +
                             std::to_string(red.den_degree) + ", numerator degree " +
                             std::to_string(red.num_degree));
  }
  std::vector<PoleWork> work;
  bool high_order = false;
  for (std::size_t i = 0; i < red.roots.size(); ++i) {
    const auto& r = red.roots[i];
    if (r.multiplicity >= 0) continue;
    if (r.root.value >= 0.0 || (r.root.exact && r.root.exact->num == 0)) {
      throw IntegrabilityError("density has a non-cancelled pole at the origin");
    }
    if (-r.multiplicity > 2) high_order = true;
    work.push_back({i, -r.multiplicity});
  }
  if (high_order) {
    if (opts.quadrature_fallback) return quadrature_expansion(opts);
    throw HighOrderPole("residue expansion supports poles of order <= 2 only");
  }
  if (work.size() > opts.max_poles) {
    if (opts.quadrature_fallback) return quadrature_expansion(opts);
    throw SizeBudgetExceeded("residue expansion: " + std::to_string(work.size()) +
                             " poles exceed the budget of " + std::to_string(opts.max_poles));
  }

  auto finish = [&](RawExpansion raw, Precision prec) {
    ResidueExpansion out;
    out.poles = std::move(raw.poles);
    out.log_norm_const = raw.log_norm;
    out.cancellation = raw.cancellation;
    out.precision_used = prec;
    out.extended_ = raw.ext;
    out.source_ = std::make_shared<const RationalDensity>(*this);
    return out;
  };

  Precision prec = opts.precision;
  if (!prec.is_extended()) {
    RawExpansion raw = expand_double(red.roots, red.log_scale, work);
    if (raw.positive && !(raw.cancellation > prec.cancellation_threshold())) {
      return finish(std::move(raw), prec);
    }
    if (!opts.escalate) {
      if (opts.quadrature_fallback) {
        ResidueExpansion out = finish(std::move(raw), prec);
        out.log_norm_const = quadrature_log_norm();
        out.numeric_fallback = true;
        out.extended_.reset();
        return out;
      }
      throw Error("residue expansion: precision loss of " + std::to_string(raw.cancellation) +
                  " nats in double precision");
    }
    prec = Precision::extended(256);
  }
  RawExpansion raw = expand_extended(red.roots, red.log_scale, work, prec.bits);
  if (raw.positive && !(raw.cancellation > prec.cancellation_threshold())) {
    return finish(std::move(raw), prec);
  }
  if (!opts.quadrature_fallback) {
    throw Error("residue expansion: precision loss of " + std::to_string(raw.cancellation) +
                " nats at " + std::to_string(prec.bits) + " bits");
  }
  ResidueExpansion out = finish(std::move(raw), prec);
  out.log_norm_const = quadrature_log_norm();
  out.numeric_fallback = true;
  out.extended_.reset();
  return out;
}

// ---------------------------------------------------------------------------
// ResidueExpansion

double ResidueExpansion::norm_const() const { return std::exp(log_norm_const); }

SumResult ResidueExpansion::residue_sum() const {
  if (extended_) {
    ExtendedScope scope(extended_->bits);
    ExtReal sum = 0, max_abs = 0;
    for (const auto& a : extended_->residue) {
      sum += a;
      max_abs = std::max<ExtReal>(max_abs, abs(a));
    }
    SumResult out;
    out.value = to_signed_log(sum);
    if (max_abs == 0) return out;
    out.cancellation = sum == 0 ? kInf : static_cast<double>(log(max_abs) - log(abs(sum)));
    return out;
  }
  std::vector<SignedLogReal> terms;
  for (const auto& p : poles) terms.push_back(p.residue);
  return signed_log_sum(terms);
}

double ResidueExpansion::residue_sum_relative() const {
  const SumResult s = residue_sum();
  if (s.value.is_zero()) return 0.0;
  return std::exp(-s.cancellation);
}

double ResidueExpansion::density(double x) const {
  if (x < 0.0) return 0.0;
  if (numeric_fallback) return std::exp(source_->log_eval(x) - log_norm_const);
  std::vector<SignedLogReal> terms;
  for (const auto& p : poles) {
    const double d = x - p.root.value;
    terms.push_back(p.residue / SignedLogReal::from_real(d));
    if (p.order == 2) terms.push_back(p.residue2 / SignedLogReal::from_real(d * d));
  }
  const SumResult s = signed_log_sum(terms);
  return s.value.sign > 0 ? std::exp(s.value.logmag - log_norm_const) : 0.0;
}

double ResidueExpansion::quadrature_integral(double lo, double hi) const {
  auto f = [this](double x) { return source_->log_eval(x); };
  if (std::isinf(hi)) {
    if (lo > 1.0) {
      return lo * integrate_halfline_log([&](double v) { return f(lo * (1.0 + v)); }, {1e-11, 20000}).value();
    }
    return integrate_halfline_log([&](double t) { return f(lo + t); }, {1e-11, 20000}).value();
  }
  return integrate_interval_log(f, lo, hi, {1e-11, 20000}).value();
}

namespace {

// Sum of extended terms with the same cancellation diagnostic as signed_log_sum.
std::optional<double> trusted(const ExtReal& sum, const ExtReal& max_abs, double threshold) {
  if (max_abs == 0) return 0.0;
  if (sum == 0) return std::nullopt;
  const double lost = static_cast<double>(log(max_abs) - log(abs(sum)));
  if (lost > threshold) return std::nullopt;
  return static_cast<double>(sum);
}

std::optional<double> trusted(const SumResult& s, double threshold) {
  if (s.precision_loss(threshold)) return std::nullopt;
  return s.value.to_real();
}

}  // namespace

std::optional<double> ResidueExpansion::residue_integral(double x) const {
  const double threshold = precision_used.cancellation_threshold();
  if (extended_) {
    ExtendedScope scope(extended_->bits);
    ExtReal sum = 0, max_abs = 0;
    const ExtReal ex(x);
    for (std::size_t i = 0; i < extended_->roots.size(); ++i) {
      const ExtReal neg_root = -extended_->roots[i];
      ExtReal t = extended_->residue[i] * log1p(ex / neg_root);
      sum += t;
      max_abs = std::max<ExtReal>(max_abs, abs(t));
      if (poles[i].order == 2) {
        t = extended_->residue2[i] * ex / (neg_root * (ex + neg_root));
        sum += t;
        max_abs = std::max<ExtReal>(max_abs, abs(t));
      }
    }
    return trusted(sum, max_abs, threshold);
  }
  std::vector<SignedLogReal> terms;
  for (const auto& p : poles) {
    const double neg_root = -p.root.value;
    terms.push_back(p.residue * SignedLogReal::from_real(std::log1p(x / neg_root)));
    if (p.order == 2) {
      terms.push_back(p.residue2 * SignedLogReal::from_real(x / (neg_root * (x + neg_root))));
    }
  }
  return trusted(signed_log_sum(terms), threshold);
}

std::optional<double> ResidueExpansion::residue_tail(double x) const {
  if (x == 0.0) return norm_const();
  const double threshold = precision_used.cancellation_threshold();
  if (extended_) {
    ExtendedScope scope(extended_->bits);
    ExtReal sum = 0, max_abs = 0;
    const ExtReal ex(x);
    for (std::size_t i = 0; i < extended_->roots.size(); ++i) {
      const ExtReal neg_root = -extended_->roots[i];
      ExtReal t = -extended_->residue[i] * log1p(neg_root / ex);
      sum += t;
      max_abs = std::max<ExtReal>(max_abs, abs(t));
      if (poles[i].order == 2) {
        t = extended_->residue2[i] / (ex + neg_root);
        sum += t;
        max_abs = std::max<ExtReal>(max_abs, abs(t));
      }
    }
    return trusted(sum, max_abs, threshold);
  }
  std::vector<SignedLogReal> terms;
  for (const auto& p : poles) {
    const double neg_root = -p.root.value;
    terms.push_back(-p.residue * SignedLogReal::from_real(std::log1p(neg_root / x)));
    if (p.order == 2) terms.push_back(p.residue2 / SignedLogReal::from_real(x + neg_root));
  }
  return trusted(signed_log_sum(terms), threshold);
}

double ResidueExpansion::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double c = norm_const();
  if (!numeric_fallback) {
    if (auto head = residue_integral(x); head && *head / c <= 0.5) return std::clamp(*head / c, 0.0, 1.0);
    if (auto tail = residue_tail(x); tail && *tail / c <= 0.5) return std::clamp(1.0 - *tail / c, 0.0, 1.0);
  }
  return 1.0 - survival(x);
}

double ResidueExpansion::survival(double x) const {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double c = norm_const();
  if (!numeric_fallback) {
    if (auto tail = residue_tail(x); tail && *tail / c <= 0.5) return std::clamp(*tail / c, 0.0, 1.0);
    if (auto head = residue_integral(x); head && *head / c <= 0.5) return std::clamp(1.0 - *head / c, 0.0, 1.0);
  }
  // Integrate whichever side is smaller.
  const double head = quadrature_integral(0.0, x) / c;
  if (head <= 0.5) return std::clamp(1.0 - head, 0.0, 1.0);
  return std::clamp(quadrature_integral(x, kInf) / c, 0.0, 1.0);
}

double ResidueExpansion::log_survival(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return kNegInf;
  if (!numeric_fallback) {
    if (auto tail = residue_tail(x); tail && *tail > 0.0) {
      return std::min(0.0, std::log(*tail) - log_norm_const);
    }
  }
  const double s = survival(x);
  if (s > 1e-12) return std::log(s);
  // int_x^inf f = x int_0^inf f(x (1 + v)) dv keeps the mapped variable O(1).
  return std::log(x) +
         integrate_halfline_log([&](double v) { return source_->log_eval(x * (1.0 + v)); }, {1e-10, 20000})
             .log_value -
         log_norm_const;
}

}  // namespace phprior
