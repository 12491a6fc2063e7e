#include "phprior/signed_log.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <vector>

#include "phprior/errors.hpp"
#include "phprior/extended.hpp"

namespace phprior {

SignedLogReal SignedLogReal::from_real(double x) {
  if (x == 0.0) return zero();
  return {x < 0 ? -1 : 1, std::log(std::fabs(x))};
}

SignedLogReal operator*(SignedLogReal x, SignedLogReal y) {
  if (x.is_zero() || y.is_zero()) return SignedLogReal::zero();
  return {x.sign * y.sign, x.logmag + y.logmag};
}

SignedLogReal operator/(SignedLogReal x, SignedLogReal y) {
  if (y.is_zero()) throw DomainError("SignedLogReal: division by zero");
  if (x.is_zero()) return SignedLogReal::zero();
  return {x.sign * y.sign, x.logmag - y.logmag};
}

SignedLogReal operator+(SignedLogReal x, SignedLogReal y) {
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  if (x.logmag < y.logmag) std::swap(x, y);
  const double r = std::exp(y.logmag - x.logmag);
  if (x.sign == y.sign) return {x.sign, x.logmag + std::log1p(r)};
  if (r == 1.0) return SignedLogReal::zero();
  return {x.sign, x.logmag + std::log1p(-r)};
}

std::string to_string(const SignedLogReal& x) {
  std::ostringstream os;
  if (x.is_zero()) {
    os << "0";
  } else {
    os << (x.sign < 0 ? "-" : "+") << "exp(" << x.logmag << ")";
  }
  return os.str();
}

Precision Precision::extended(unsigned bits) {
  if (bits < 128) throw DomainError("extended precision requires at least 128 bits");
  return {Mode::Extended, bits};
}

double Precision::cancellation_threshold() const {
  if (mode == Mode::Double) return 18.0;
  // Keep ~10 significant decimal digits in reserve.
  return static_cast<double>(bits) * std::log(2.0) - 23.0;
}

std::string to_string(const Precision& p) {
  return p.is_extended() ? "extended:" + std::to_string(p.bits) : "double";
}

Precision parse_precision(const std::string& text) {
  if (text == "double") return Precision::double_precision();
  if (text == "extended") return Precision::extended();
  const std::string prefix = "extended:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      const int bits = std::stoi(text.substr(prefix.size()));
      if (bits <= 0) throw DomainError("precision bits must be positive");
      return Precision::extended(static_cast<unsigned>(bits));
    } catch (const std::logic_error&) {
      throw ParseError("invalid precision: " + text);
    }
  }
  throw ParseError("invalid precision: " + text);
}

namespace {

std::recursive_mutex& extended_mutex() {
  static std::recursive_mutex m;
  return m;
}

SumResult double_sum(std::span<const SignedLogReal> terms) {
  double max_log = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    any = true;
    max_log = std::max(max_log, t.logmag);
  }
  if (!any) return {};
  // Neumaier compensated summation of the rescaled terms.
  double sum = 0.0, comp = 0.0;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    const double v = t.sign * std::exp(t.logmag - max_log);
    const double s = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - s) + v;
    } else {
      comp += (v - s) + sum;
    }
    sum = s;
  }
  sum += comp;
  if (sum == 0.0) return {SignedLogReal::zero(), std::numeric_limits<double>::infinity()};
  SignedLogReal value{sum < 0 ? -1 : 1, max_log + std::log(std::fabs(sum))};
  return {value, max_log - value.logmag};
}

SumResult extended_sum(std::span<const SignedLogReal> terms, unsigned bits) {
  ExtendedScope scope(bits);
  double max_log = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    any = true;
    max_log = std::max(max_log, t.logmag);
  }
  if (!any) return {};
  ExtReal sum = 0;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    ExtReal v = exp(ExtReal(t.logmag) - ExtReal(max_log));
    if (t.sign < 0) {
      sum -= v;
    } else {
      sum += v;
    }
  }
  if (sum == 0) return {SignedLogReal::zero(), std::numeric_limits<double>::infinity()};
  SignedLogReal scaled = to_signed_log(sum);
  SignedLogReal value{scaled.sign, scaled.logmag + max_log};
  return {value, -scaled.logmag};
}

}  // namespace

ExtendedScope::ExtendedScope(unsigned bits) {
  extended_mutex().lock();
  saved_digits_ = ExtReal::default_precision();
  // digits10 that yields at least `bits` binary digits.
  const unsigned digits10 = static_cast<unsigned>(std::ceil(bits * std::log10(2.0))) + 1;
  ExtReal::default_precision(digits10);
}

ExtendedScope::~ExtendedScope() {
  ExtReal::default_precision(saved_digits_);
  extended_mutex().unlock();
}

SumResult signed_log_sum(std::span<const SignedLogReal> terms, Precision precision) {
  if (precision.is_extended()) return extended_sum(terms, precision.bits);
  return double_sum(terms);
}

}  // namespace phprior
