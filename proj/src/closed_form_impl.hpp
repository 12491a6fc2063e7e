#pragma once

// Evaluation of explicit residue formulas in either log-double or MPFR
// arithmetic. A formula is written once as a generic lambda over a policy P:
//
//   [&](auto policy) -> Terms<decltype(policy)> { ... }
//
// and run_closed_form() drives the Double -> Extended -> quadrature policy.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "phprior/closed_form.hpp"
#include "phprior/errors.hpp"
#include "phprior/extended.hpp"
#include "phprior/scalar.hpp"

namespace phprior::detail {

inline ExtReal ext_of(const Scalar& s) {
  if (s.exact) return ExtReal(s.exact->num) / ExtReal(s.exact->den);
  return ExtReal(s.value);
}

struct DoublePolicy {
  using Value = SignedLogReal;
  static Value make(const Scalar& x) { return SignedLogReal::from_real(x.value); }
  static Value log_of(const Scalar& x) {
    if (!(x.value > 0.0)) throw DomainError("closed form: log of non-positive value");
    return SignedLogReal::from_real(std::log(x.value));
  }
  static SignedLogReal to_signed(const Value& v) { return v; }
  static bool is_zero(const Value& v) { return v.is_zero(); }
  // working-precision arithmetic for factors built from inexact inputs
  using Num = double;
  static Num num(const Scalar& x) { return x.value; }
  static Value log_num(Num x) {
    if (!(x > 0.0)) throw DomainError("closed form: log of non-positive value");
    return SignedLogReal::from_real(std::log(x));
  }

  class Product {
   public:
    void mul(const Scalar& x) { step(x.value, 1); }
    void div(const Scalar& x) {
      if (x.value == 0.0) throw PoleCollision("closed form: zero denominator factor");
      step(x.value, -1);
    }
    void mul(Num x) { step(x, 1); }
    void div(Num x) {
      if (x == 0.0) throw PoleCollision("closed form: zero denominator factor");
      step(x, -1);
    }
    Value value() const { return zero_ ? SignedLogReal::zero() : SignedLogReal::from_log(logmag_, sign_); }

   private:
    void step(double v, int dir) {
      if (v == 0.0) {
        zero_ = true;
        return;
      }
      if (v < 0.0) sign_ = -sign_;
      logmag_ += dir * std::log(std::fabs(v));
    }
    int sign_ = 1;
    double logmag_ = 0.0;
    bool zero_ = false;
  };

  struct Sum {
    SignedLogReal total;
    double cancellation = 0.0;
  };
  static Sum sum(const std::vector<Value>& terms) {
    const SumResult r = signed_log_sum(terms);
    return {r.value, r.cancellation};
  }
};

struct ExtPolicy {
  using Value = ExtReal;
  static Value make(const Scalar& x) { return ext_of(x); }
  static Value log_of(const Scalar& x) {
    if (!(x.value > 0.0)) throw DomainError("closed form: log of non-positive value");
    return log(ext_of(x));
  }
  static SignedLogReal to_signed(const Value& v) { return to_signed_log(v); }
  static bool is_zero(const Value& v) { return v == 0; }
  using Num = ExtReal;
  static Num num(const Scalar& x) { return ext_of(x); }
  static Value log_num(const Num& x) {
    if (!(x > 0)) throw DomainError("closed form: log of non-positive value");
    return log(x);
  }

  class Product {
   public:
    void mul(const Scalar& x) { v_ *= ext_of(x); }
    void div(const Scalar& x) {
      if (x.value == 0.0 && (!x.exact || x.exact->num == 0)) throw PoleCollision("closed form: zero denominator factor");
      v_ /= ext_of(x);
    }
    void mul(const Num& x) { v_ *= x; }
    void div(const Num& x) {
      if (x == 0) throw PoleCollision("closed form: zero denominator factor");
      v_ /= x;
    }
    Value value() const { return v_; }

   private:
    ExtReal v_ = 1;
  };

  struct Sum {
    SignedLogReal total;
    double cancellation = 0.0;
  };
  static Sum sum(const std::vector<Value>& terms) {
    ExtReal s = 0, max_abs = 0;
    for (const auto& t : terms) {
      s += t;
      if (abs(t) > max_abs) max_abs = abs(t);
    }
    Sum out{to_signed_log(s), 0.0};
    if (max_abs == 0) return out;
    out.cancellation = s == 0 ? std::numeric_limits<double>::infinity()
                              : static_cast<double>(log(max_abs) - log(abs(s)));
    return out;
  }
};

template <class P>
struct Terms {
  std::vector<typename P::Value> gamma;
  std::vector<typename P::Value> beta;
  std::vector<typename P::Value> norm_terms;  // summands of the normalizer
};

template <class Formula>
ClosedForm run_closed_form(Formula&& formula, Precision start,
                           const std::function<double()>& quadrature_log_norm) {
  auto pack = [](auto terms, auto policy, Precision used) {
    using P = decltype(policy);
    ClosedForm out;
    for (const auto& g : terms.gamma) out.gamma.push_back(P::to_signed(g));
    for (const auto& b : terms.beta) out.beta.push_back(P::to_signed(b));
    const auto s = P::sum(terms.norm_terms);
    out.cancellation = s.cancellation;
    out.log_norm = s.total.sign > 0 ? s.total.logmag : -std::numeric_limits<double>::infinity();
    out.precision_used = used;
    return out;
  };
  auto ok = [](const ClosedForm& cf) {
    return std::isfinite(cf.log_norm) && !(cf.cancellation > cf.precision_used.cancellation_threshold());
  };
  if (!start.is_extended()) {
    ClosedForm cf = pack(formula(DoublePolicy{}), DoublePolicy{}, start);
    if (ok(cf)) return cf;
    start = Precision::extended(256);
  }
  ClosedForm cf;
  {
    ExtendedScope scope(start.bits);
    cf = pack(formula(ExtPolicy{}), ExtPolicy{}, start);
  }
  if (ok(cf)) return cf;
  cf.log_norm = quadrature_log_norm();
  cf.numeric_fallback = true;
  return cf;
}

}  // namespace phprior::detail
