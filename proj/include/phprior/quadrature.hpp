#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace phprior {

// Log of a non-negative integrand: returns ln f(x), -inf where f vanishes.
using LogIntegrand = std::function<double(double)>;

struct QuadratureOptions {
  double rel_tol = 1e-10;
  std::size_t max_panels = 4000;
};

struct QuadratureResult {
  double log_value = 0.0;  // ln of the integral
  double rel_error = 0.0;  // estimated relative error
  std::size_t panels = 0;

  double value() const;
};

// Adaptive Gauss-Kronrod (7/15) estimate of the integral of exp(log_f) over
// (0, inf). The half-line is mapped to (0, 1) by x = t / (1 - t). Throws
// NonConvergence when the panel budget is exhausted before rel_tol is met.
QuadratureResult integrate_halfline_log(const LogIntegrand& log_f,
                                        QuadratureOptions opts = {});

// Same on a finite interval [lo, hi] without a change of variables.
QuadratureResult integrate_interval_log(const LogIntegrand& log_f, double lo, double hi,
                                        QuadratureOptions opts = {});

// Convenience: plain value of the half-line integral.
double integrate_halfline(const LogIntegrand& log_f, double rel_tol = 1e-10);

}  // namespace phprior

namespace phprior {

// CDF and quantile of an unnormalized density on (0, inf), tabulated once by
// Gauss-Kronrod panels on the map x = scale * t / (1 - t). Lookups integrate
// only the partial panel, so each costs a handful of density evaluations.
class TabulatedCdf {
 public:
  TabulatedCdf(LogIntegrand log_f, double scale, std::size_t panels = 2048, double rel_tol = 1e-13);

  double log_total() const { return log_total_; }
  double cdf(double x) const;
  double survival(double x) const;
  // x with cdf(x) = u to about 1e-13 absolute.
  double quantile(double u) const;

 private:
  double mapped(double t) const;  // exp(log g(t) - shift) in the t variable
  double partial(double lo, double hi) const;
  double to_x(double t) const { return scale_ * t / (1.0 - t); }
  double to_t(double x) const { return x / (scale_ + x); }

  LogIntegrand log_f_;
  double scale_;
  double shift_ = 0.0;
  double log_total_ = 0.0;
  double total_ = 0.0;
  std::vector<double> nodes_;  // t values, nodes_.front() = 0, nodes_.back() = 1
  std::vector<double> head_;   // mass of [0, nodes_[i]]
  std::vector<double> tail_;   // mass of [nodes_[i], 1]
};

}  // namespace phprior
