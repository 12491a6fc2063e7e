#include "phprior/special.hpp"

#include <cmath>
#include <string>

#include "phprior/errors.hpp"

namespace phprior {

namespace {
constexpr std::int64_t kDirectProductLimit = 8;
}

double log_gamma(double x) {
  // lgamma_r: std::lgamma writes the global signgam, a data race across threads.
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_rising(double x, std::int64_t n) {
  if (n < 0) throw DomainError("log_rising: negative n");
  if (n == 0) return 0.0;
  if (!(x > 0.0)) {
    throw DomainError("log_rising: x must be positive for n >= 1 (x = " + std::to_string(x) + ")");
  }
  if (n <= kDirectProductLimit) {
    double p = x;
    for (std::int64_t i = 1; i < n; ++i) p *= x + static_cast<double>(i);
    return std::log(p);
  }
  return log_gamma(x + static_cast<double>(n)) - log_gamma(x);
}

SignedLogReal signed_rising(double x, std::int64_t n) {
  if (n < 0) throw DomainError("signed_rising: negative n");
  if (n == 0) return SignedLogReal::from_log(0.0);
  if (x > 0.0) return SignedLogReal::from_log(log_rising(x, n));
  int sign = 1;
  double logmag = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double f = x + static_cast<double>(i);
    if (f == 0.0) return SignedLogReal::zero();
    if (f < 0.0) sign = -sign;
    logmag += std::log(std::fabs(f));
  }
  return SignedLogReal::from_log(logmag, sign);
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw DomainError("log_factorial: negative n");
  return log_gamma(static_cast<double>(n) + 1.0);
}

}  // namespace phprior
