#pragma once

#include <cstdint>

#include "phprior/signed_log.hpp"

namespace phprior {

// ln [x]^n where [x]^n = x(x+1)...(x+n-1). Requires x > 0, or x == 0 with
// n == 0. Uses lgamma differences except for small n where the direct product
// is both faster and more accurate.
double log_rising(double x, std::int64_t n);

// [x]^n for any real x as a SignedLogReal; exact zero when a factor vanishes.
SignedLogReal signed_rising(double x, std::int64_t n);

double log_factorial(std::int64_t n);
// ln |Gamma(x)|, safe to call from several threads.
double log_gamma(double x);

}  // namespace phprior
