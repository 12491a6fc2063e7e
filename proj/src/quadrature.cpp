#include "phprior/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <functional>
#include <queue>
#include <utility>
#include <string>
#include <vector>

#include "phprior/errors.hpp"

namespace phprior {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and the centre.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// Integrates exp(log_g(t) - shift) over [lo, hi]. Records the largest log value
// seen so the caller can detect a badly chosen shift.
class Integrator {
 public:
  Integrator(const LogIntegrand& log_g, double shift) : log_g_(log_g), shift_(shift) {}

  Panel panel(double lo, double hi) {
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = eval(centre);
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kKronrodNodes[j];
      const double pair = eval(centre - dx) + eval(centre + dx);
      kronrod += kKronrodWeights[j] * pair;
      if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::fabs(kronrod - gauss)};
  }

  double max_log() const { return max_log_; }

 private:
  double eval(double t) {
    const double lg = log_g_(t);
    if (std::isnan(lg)) throw DomainError("quadrature: integrand returned NaN at t = " + std::to_string(t));
    if (lg == kNegInf) return 0.0;
    max_log_ = std::max(max_log_, lg);
    return std::exp(lg - shift_);
  }

  const LogIntegrand& log_g_;
  double shift_;
  double max_log_ = kNegInf;
};

double probe_shift(const LogIntegrand& log_g, double lo, double hi) {
  double best = kNegInf;
  constexpr int kProbes = 257;
  for (int i = 1; i < kProbes; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / kProbes;
    const double v = log_g(t);
    if (std::isfinite(v)) best = std::max(best, v);
  }
  return best;
}

QuadratureResult adaptive(const LogIntegrand& log_g, double lo, double hi,
                          const QuadratureOptions& opts) {
  double shift = probe_shift(log_g, lo, hi);
  if (shift == kNegInf) shift = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Integrator integ(log_g, shift);
    std::priority_queue<Panel> heap;
    double total = 0.0, total_err = 0.0;
    constexpr int kInitial = 16;
    for (int i = 0; i < kInitial; ++i) {
      const double a = lo + (hi - lo) * i / kInitial;
      const double b = lo + (hi - lo) * (i + 1) / kInitial;
      Panel p = integ.panel(a, b);
      total += p.value;
      total_err += p.error;
      heap.push(p);
    }
    std::size_t panels = kInitial;
    bool restart = false;
    while (true) {
      if (integ.max_log() > shift + 600.0) {
        shift = integ.max_log();
        restart = true;
        break;
      }
      if (total_err <= opts.rel_tol * std::fabs(total) || (total == 0.0 && total_err == 0.0)) break;
      if (panels >= opts.max_panels) {
        throw NonConvergence("quadrature: panel budget exhausted (relative error estimate " +
                             std::to_string(total_err / std::fabs(total)) + ")");
      }
      Panel worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst.lo + worst.hi);
      if (!(mid > worst.lo && mid < worst.hi)) {
        // Cannot refine further in double; accept the panel as is.
        total_err -= worst.error;
        worst.error = 0.0;
        heap.push(worst);
        continue;
      }
      Panel left = integ.panel(worst.lo, mid);
      Panel right = integ.panel(mid, worst.hi);
      total += left.value + right.value - worst.value;
      total_err += left.error + right.error - worst.error;
      heap.push(left);
      heap.push(right);
      ++panels;
      // Periodic resummation limits drift from the incremental updates.
      if (panels % 256 == 0) {
        std::priority_queue<Panel> copy = heap;
        total = 0.0;
        total_err = 0.0;
        while (!copy.empty()) {
          total += copy.top().value;
          total_err += copy.top().error;
          copy.pop();
        }
      }
    }
    if (restart) continue;
    // Final exact resummation.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
      total += heap.top().value;
      total_err += heap.top().error;
      heap.pop();
    }
    if (total <= 0.0) return {kNegInf, 0.0, panels};
    return {shift + std::log(total), total_err / total, panels};
  }
  throw NonConvergence("quadrature: integrand scale could not be stabilised");
}

}  // namespace

double QuadratureResult::value() const { return std::exp(log_value); }

QuadratureResult integrate_halfline_log(const LogIntegrand& log_f, QuadratureOptions opts) {
  if (!(opts.rel_tol > 0.0 && opts.rel_tol < 1.0)) throw DomainError("quadrature: tol must be in (0, 1)");
  // x = t / (1 - t), dx = dt / (1 - t)^2
  LogIntegrand mapped = [&log_f](double t) {
    const double one_minus = 1.0 - t;
    const double x = t / one_minus;
    const double lf = log_f(x);
    if (lf == kNegInf) return kNegInf;
    return lf - 2.0 * std::log(one_minus);
  };
  return adaptive(mapped, 0.0, 1.0, opts);
}

QuadratureResult integrate_interval_log(const LogIntegrand& log_f, double lo, double hi,
                                        QuadratureOptions opts) {
  if (!(opts.rel_tol > 0.0 && opts.rel_tol < 1.0)) throw DomainError("quadrature: tol must be in (0, 1)");
  if (!(hi >= lo)) throw DomainError("quadrature: empty interval");
  if (hi == lo) return {kNegInf, 0.0, 0};
  return adaptive(log_f, lo, hi, opts);
}

double integrate_halfline(const LogIntegrand& log_f, double rel_tol) {
  return integrate_halfline_log(log_f, {rel_tol, 4000}).value();
}

namespace {

double gk15(const std::function<double(double)>& g, double lo, double hi, double* err) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = g(centre);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = g(centre - dx) + g(centre + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  if (err) *err = std::fabs(kronrod - gauss) * half;
  return kronrod * half;
}

}  // namespace

TabulatedCdf::TabulatedCdf(LogIntegrand log_f, double scale, std::size_t panels, double rel_tol)
    : log_f_(std::move(log_f)), scale_(scale) {
  if (!(scale > 0.0) || panels < 2) throw DomainError("TabulatedCdf: invalid scale or panel count");
  auto log_g = [this](double t) {
    if (t <= 0.0 || t >= 1.0) return kNegInf;
    const double lf = log_f_(to_x(t));
    if (lf == kNegInf) return kNegInf;
    return lf + std::log(scale_) - 2.0 * std::log1p(-t);
  };
  shift_ = probe_shift(log_g, 0.0, 1.0);
  if (shift_ == kNegInf) throw DomainError("TabulatedCdf: density vanishes everywhere");
  for (int attempt = 0; attempt < 3; ++attempt) {
    double seen = shift_;
    std::vector<double> coarse(panels);
    double total = 0.0;
    auto g = [&](double t) {
      const double lg = log_g(t);
      if (std::isnan(lg)) throw DomainError("TabulatedCdf: density returned NaN");
      if (lg == kNegInf) return 0.0;
      seen = std::max(seen, lg);
      return std::exp(lg - shift_);
    };
    for (std::size_t i = 0; i < panels; ++i) {
      coarse[i] = gk15(g, double(i) / panels, double(i + 1) / panels, nullptr);
      total += coarse[i];
    }
    if (seen > shift_ + 600.0) {
      shift_ = seen;
      continue;
    }
    if (!(total > 0.0)) throw DomainError("TabulatedCdf: zero total mass");
    nodes_.assign(1, 0.0);
    std::vector<double> mass;
    const double tol = rel_tol * total;
    std::function<void(double, double, int)> refine = [&](double lo, double hi, int depth) {
      double err = 0.0;
      const double v = gk15(g, lo, hi, &err);
      if (err <= tol || depth >= 40 || !(0.5 * (lo + hi) > lo)) {
        nodes_.push_back(hi);
        mass.push_back(v);
        return;
      }
      const double mid = 0.5 * (lo + hi);
      refine(lo, mid, depth + 1);
      refine(mid, hi, depth + 1);
    };
    for (std::size_t i = 0; i < panels; ++i) refine(double(i) / panels, double(i + 1) / panels, 0);
    nodes_.back() = 1.0;
    const std::size_t n = mass.size();
    head_.assign(n + 1, 0.0);
    tail_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) head_[i + 1] = head_[i] + mass[i];
    for (std::size_t i = n; i-- > 0;) tail_[i] = tail_[i + 1] + mass[i];
    total_ = head_[n];
    log_total_ = shift_ + std::log(total_);
    return;
  }
  throw NonConvergence("TabulatedCdf: integrand scale could not be stabilised");
}

double TabulatedCdf::mapped(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double lf = log_f_(to_x(t));
  if (lf == kNegInf) return 0.0;
  return std::exp(lf + std::log(scale_) - 2.0 * std::log1p(-t) - shift_);
}

double TabulatedCdf::partial(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  return gk15([this](double t) { return mapped(t); }, lo, hi, nullptr);
}

double TabulatedCdf::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double t = to_t(x);
  const std::size_t j = std::upper_bound(nodes_.begin(), nodes_.end(), t) - nodes_.begin() - 1;
  if (j + 1 >= nodes_.size()) return 1.0;
  if (head_[j] <= tail_[j + 1]) return std::min(1.0, (head_[j] + partial(nodes_[j], t)) / total_);
  return std::max(0.0, 1.0 - (tail_[j + 1] + partial(t, nodes_[j + 1])) / total_);
}

double TabulatedCdf::survival(double x) const {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double t = to_t(x);
  const std::size_t j = std::upper_bound(nodes_.begin(), nodes_.end(), t) - nodes_.begin() - 1;
  if (j + 1 >= nodes_.size()) return 0.0;
  if (tail_[j + 1] <= head_[j]) return std::min(1.0, (tail_[j + 1] + partial(t, nodes_[j + 1])) / total_);
  return std::max(0.0, 1.0 - (head_[j] + partial(nodes_[j], t)) / total_);
}

double TabulatedCdf::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  // Work from whichever end keeps the target mass small.
  const bool from_head = u <= 0.5;
  const double target = (from_head ? u : 1.0 - u) * total_;
  std::size_t j;
  if (from_head) {
    j = std::upper_bound(head_.begin(), head_.end(), target) - head_.begin() - 1;
  } else {
    j = std::upper_bound(tail_.begin(), tail_.end(), target, std::greater<double>()) - tail_.begin() - 1;
  }
  j = std::min(j, nodes_.size() - 2);
  double lo = nodes_[j], hi = nodes_[j + 1];
  // residual(t) is increasing in t and vanishes at the quantile.
  auto residual = [&](double t) {
    return from_head ? head_[j] + partial(nodes_[j], t) - target
                     : target - tail_[j + 1] - partial(t, nodes_[j + 1]);
  };
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double r = residual(t);
    if (std::fabs(r) <= 1e-15 * target) break;
    if (r < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double d = mapped(t);
    double next = d > 0.0 ? t - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (!(hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi)) {
      t = next;
      break;
    }
    t = next;
  }
  return to_x(t);
}

}  // namespace phprior
