#pragma once

// Extended-precision real backed by MPFR. Precision is set per thread through
// ExtendedScope so that every temporary created inside a computation carries
// the requested number of bits.

#include <boost/multiprecision/mpfr.hpp>

#include "phprior/signed_log.hpp"

namespace phprior {

using ExtReal = boost::multiprecision::mpfr_float;

class ExtendedScope {
 public:
  explicit ExtendedScope(unsigned bits);
  ~ExtendedScope();
  ExtendedScope(const ExtendedScope&) = delete;
  ExtendedScope& operator=(const ExtendedScope&) = delete;

 private:
  unsigned saved_digits_;
};

inline SignedLogReal to_signed_log(const ExtReal& x) {
  if (x == 0) return SignedLogReal::zero();
  const int sign = x < 0 ? -1 : 1;
  return SignedLogReal::from_log(static_cast<double>(log(abs(x))), sign);
}

inline ExtReal from_signed_log(const SignedLogReal& x) {
  if (x.is_zero()) return ExtReal(0);
  ExtReal mag = exp(ExtReal(x.logmag));
  return x.sign < 0 ? ExtReal(-mag) : mag;
}

}  // namespace phprior
