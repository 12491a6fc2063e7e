#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace phprior {

// A real number stored as sign and natural-log magnitude. sign == 0 is an
// exact zero and logmag is ignored.
struct SignedLogReal {
  int sign = 0;
  double logmag = -std::numeric_limits<double>::infinity();

  static SignedLogReal zero() { return {}; }
  static SignedLogReal from_real(double x);
  static SignedLogReal from_log(double logmag, int sign = 1) {
    return sign == 0 ? zero() : SignedLogReal{sign > 0 ? 1 : -1, logmag};
  }

  bool is_zero() const { return sign == 0; }
  double to_real() const { return sign == 0 ? 0.0 : sign * std::exp(logmag); }

  SignedLogReal operator-() const { return {-sign, logmag}; }
  friend SignedLogReal operator*(SignedLogReal x, SignedLogReal y);
  friend SignedLogReal operator/(SignedLogReal x, SignedLogReal y);
  friend SignedLogReal operator+(SignedLogReal x, SignedLogReal y);
  friend SignedLogReal operator-(SignedLogReal x, SignedLogReal y) { return x + (-y); }
  SignedLogReal& operator*=(SignedLogReal y) { return *this = *this * y; }
  SignedLogReal& operator/=(SignedLogReal y) { return *this = *this / y; }
  SignedLogReal& operator+=(SignedLogReal y) { return *this = *this + y; }
};

std::string to_string(const SignedLogReal& x);

// Arithmetic precision used for cancellation-prone sums.
struct Precision {
  enum class Mode { Double, Extended };
  Mode mode = Mode::Double;
  unsigned bits = 53;

  static Precision double_precision() { return {}; }
  // Throws DomainError when bits < 128.
  static Precision extended(unsigned bits = 256);

  bool is_extended() const { return mode == Mode::Extended; }

  // Largest tolerated loss, in nats, before a sum is considered untrustworthy.
  // 18 nats (~8 decimal digits) in double, so at least ~7 digits survive; in
  // extended mode about 10 digits are kept in reserve.
  double cancellation_threshold() const;
};

std::string to_string(const Precision& p);
// Accepts "double", "extended" or "extended:<bits>".
Precision parse_precision(const std::string& text);

struct SumResult {
  SignedLogReal value;
  // log(max |term|) - log |value|; +inf when nonzero terms cancel to exact
  // zero, 0 for an empty or all-zero input.
  double cancellation = 0.0;

  bool precision_loss(double threshold) const { return cancellation > threshold; }
};

SumResult signed_log_sum(std::span<const SignedLogReal> terms,
                         Precision precision = Precision::double_precision());

}  // namespace phprior
