#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "phprior/errors.hpp"
#include "phprior/pochhammer.hpp"
#include "phprior/quadrature.hpp"
#include "phprior/special.hpp"

using namespace phprior;

namespace {

PochhammerParams P(int m, const char* a, int b, const char* c, int d = 0) {
  return {m, Scalar::parse(a), b, Scalar::parse(c), d};
}

double quad_norm(const PochhammerParams& p) {
  return integrate_halfline(
      [&](double x) {
        if (x == 0.0 && (p.m > 0 || p.d > 0)) return -std::numeric_limits<double>::infinity();
        return p.d * std::log(x) + (p.m ? log_rising(x, p.m) : 0.0) - log_rising(p.c.value * x + p.a.value, p.b);
      },
      1e-12);
}

std::vector<double> coefficients_by_root(const ResidueExpansion& e) {
  // ascending i, i.e. root -(a + i - 1) / c from closest to zero outward
  std::vector<double> out;
  for (auto it = e.poles.rbegin(); it != e.poles.rend(); ++it) out.push_back(it->coefficient().to_real());
  return out;
}

}  // namespace

TEST_CASE("PH residues: spec examples") {
  auto e = ph_residues(P(0, "1", 2, "1"));
  auto g = coefficients_by_root(e);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == -1.0);
  CHECK(std::fabs(e.norm_const() - std::log(2.0)) < 1e-12);

  g = coefficients_by_root(ph_residues(P(0, "1", 3, "1")));
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ph_residues(P(0, "1", 3, "1")).norm_const() == doctest::Approx(std::log(2.0) - std::log(3.0) / 2).epsilon(1e-13));

  // m = 1: the numerator zero at 0 does not cancel; the pole at -1 carries -1/2
  e = ph_residues(P(1, "1", 3, "1"));
  g = coefficients_by_root(e);
  CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(e.norm_const() == doctest::Approx(1.5 * std::log(3.0) - 2 * std::log(2.0)).epsilon(1e-13));
  CHECK(e.norm_const() == doctest::Approx(0.261624).epsilon(1e-6));
  CHECK_THROWS_AS(ph_residues(P(0, "1", 4, "1", 1)), DomainError);
}

TEST_CASE("PPH residues") {
  auto e = pph_residues(P(0, "1", 4, "1", 1));
  auto g = coefficients_by_root(e);
  CHECK(g[0] == doctest::Approx(-1.0 / 6).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g[2] == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(g[3] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(e.norm_const() == doctest::Approx(0.030575).epsilon(2e-5));
  CHECK(e.norm_const() == doctest::Approx(quad_norm(P(0, "1", 4, "1", 1))).epsilon(1e-10));
  CHECK(pph_residues(P(0, "1", 4, "1")).norm_const() == doctest::Approx(0.028317).epsilon(2e-5));

  // d = 0 agrees with the PH entry point exactly
  auto a = ph_residues(P(2, "3/2", 7, "2"));
  auto b = pph_residues(P(2, "3/2", 7, "2"));
  CHECK(a.log_norm_const == b.log_norm_const);
  for (std::size_t i = 0; i < a.poles.size(); ++i) {
    CHECK(a.poles[i].residue.logmag == b.poles[i].residue.logmag);
    CHECK(a.poles[i].residue.sign == b.poles[i].residue.sign);
  }
}

TEST_CASE("closed form coefficients agree with the residue engine") {
  for (int m = 0; m <= 3; ++m) {
    for (int d = 0; d <= 2; ++d) {
      for (const char* a : {"1/2", "3/2", "0.3"}) {
        for (const char* c : {"1", "5", "7/3"}) {
          for (int b : {m + d + 2, m + d + 5, 12}) {
            if (b < m + d + 2) continue;
            const auto p = P(m, a, b, c, d);
            const auto cf = pph_closed_form(p);
            const auto e = pph_residues(p);
            // both are double residue sums with up to ~18 nats of cancellation
            CHECK(cf.norm() == doctest::Approx(std::exp(e.log_norm_const)).epsilon(1e-7));
            // engine poles are sorted most negative first; closed form lists i = 1..b
            const auto g = coefficients_by_root(e);
            std::size_t j = 0;
            for (std::size_t i = 0; i < cf.gamma.size(); ++i) {
              if (cf.gamma[i].is_zero()) continue;  // cancelled by a numerator zero
              REQUIRE(j < g.size());
              CHECK(cf.gamma[i].to_real() == doctest::Approx(g[j]).epsilon(1e-10));
              ++j;
            }
          }
        }
      }
    }
  }
}

TEST_CASE("normalizer equivalence with quadrature") {
  for (int m = 0; m <= 3; ++m) {
    for (int d = 0; d <= 2; ++d) {
      for (int b : {m + d + 2, m + d + 6, 25}) {
        for (const char* a : {"1/2", "3/2"}) {
          for (const char* c : {"1", "5"}) {
            const auto p = P(m, a, b, c, d);
            CHECK(std::exp(ph_log_norm(p)) == doctest::Approx(quad_norm(p)).epsilon(1e-8));
          }
        }
      }
    }
  }
}

TEST_CASE("moments") {
  CHECK(ph_moment(P(0, "1", 4, "1"), 1) == doctest::Approx(0.030575 / 0.028317).epsilon(1e-4));
  CHECK(ph_moment(P(0, "1", 4, "1"), 1) == doctest::Approx(1.0797).epsilon(1e-4));
  CHECK_THROWS_AS(ph_moment(P(0, "1", 2, "1"), 1), MomentDoesNotExist);
  for (const auto& p : {P(0, "1", 5, "1"), P(1, "1/2", 8, "2"), P(2, "3/2", 9, "5", 1)}) {
    for (int k = 1; k <= p.moments(); ++k) {
      PochhammerParams t = p;
      t.d += k;
      CHECK(ph_moment(p, k) == doctest::Approx(quad_norm(t) / quad_norm(p)).epsilon(1e-8));
    }
  }
}

TEST_CASE("log density") {
  const auto hh = P(0, "1", 2, "1");
  CHECK(ph_log_density(hh, 0.0) == doctest::Approx(std::log(1.0 / (2.0 * std::log(2.0)))).epsilon(1e-13));
  CHECK(ph_log_density(hh, 0.0) == doctest::Approx(-0.326634).epsilon(1e-5));
  CHECK(ph_log_density(hh, 1.0) == doctest::Approx(std::log(1.0 / (6.0 * std::log(2.0)))).epsilon(1e-13));
  CHECK(ph_log_density(P(1, "1", 3, "1"), 0.0) == -INFINITY);
  for (const auto& p : {hh, P(1, "1", 3, "1"), P(2, "1/2", 9, "5", 1), P(0, "1", 20, "1")}) {
    const Pochhammer dist(p);
    for (double x : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      CHECK(dist.density(x) == doctest::Approx(dist.expansion().density(x)).epsilon(1e-8));
    }
  }
}

TEST_CASE("cdf, quantile and half-horseshoe shape") {
  const Pochhammer hh(kDefaultPrior);
  CHECK(hh.cdf(2.0) == doctest::Approx(std::log(1.5) / std::log(2.0)).epsilon(1e-14));
  CHECK(hh.cdf(0.0) == 0.0);
  CHECK(hh.cdf(INFINITY) == 1.0);
  CHECK(std::fabs(hh.quantile(0.5) - std::sqrt(2.0)) < 1e-9);
  CHECK(hh.quantile(1e-12) < 1e-10);
  for (double u : {0.01, 0.5, 0.99}) CHECK(std::fabs(hh.cdf(hh.quantile(u)) - u) < 1e-9);
  CHECK_THROWS_AS(hh.quantile(1.0), DomainError);

  for (const auto& p : {P(2, "1/2", 9, "5", 1), P(0, "1", 40, "1"), P(1, "3/2", 6, "2")}) {
    const Pochhammer dist(p);
    double prev = 0.0;
    for (double x : logspace(-3, 4, 80)) {
      const double f = dist.cdf(x);
      CHECK(f >= prev - 1e-15);
      CHECK(f <= 1.0);
      prev = f;
    }
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(std::fabs(dist.cdf(dist.quantile(u)) - u) <= 1e-10);
  }

  for (const char* a : {"1", "0.2", "3"}) {
    for (const char* c : {"1", "5"}) {
      const Pochhammer d(P(0, a, 2, c));
      CHECK(std::isfinite(d.density(0.0)));
      CHECK(d.density(0.0) > 0.0);
      double prev = d.density(0.0);
      for (double x : logspace(-3, 3, 60)) {
        CHECK(d.density(x) < prev);
        prev = d.density(x);
      }
    }
  }
}

TEST_CASE("prior mass near zero and heavy tail") {
  CHECK(std::fabs(prior_mass_near_zero(kDefaultPrior, 1.0) - std::log(4.0 / 3.0) / std::log(2.0)) < 1e-12);
  CHECK(prior_mass_near_zero(kDefaultPrior, 0.01) == doctest::Approx(std::log1p(0.1 / 2.1) / std::log(2.0)).epsilon(1e-12));
  CHECK(prior_mass_near_zero(kDefaultPrior, 0.0) == 0.0);

  auto v = heavy_tail_check(kDefaultPrior, 0.1, {10, 20, 40});
  CHECK(v[0] < v[1]);
  CHECK(v[1] < v[2]);
  v = heavy_tail_check(kDefaultPrior, 0.0, {10, 20, 40});
  CHECK(v[0] > v[1]);
  CHECK(v[1] > v[2]);
  CHECK(v[1] == doctest::Approx(Pochhammer(kDefaultPrior).survival(20)).epsilon(1e-12));
  // log form stays finite where the plain form overflows
  auto lv = heavy_tail_check(kDefaultPrior, 1.0, {100, 1000, 1e4}, true);
  CHECK(lv[2] > lv[1]);
  CHECK(std::isfinite(lv[2]));
  auto ex = heavy_tail_check([](double x) { return -0.5 * x; }, 0.5, {1, 10, 100});
  for (double e : ex) CHECK(e == doctest::Approx(1.0).epsilon(1e-14));
  // a PH with more moments is still heavy tailed eventually
  lv = heavy_tail_check(P(0, "1", 12, "1"), 0.05, {1e3, 2e3, 4e3}, true);
  CHECK(lv[0] < lv[1]);
  CHECK(lv[1] < lv[2]);
}

TEST_CASE("sampling") {
  CHECK(ph_sample(kDefaultPrior, 0, Seed{1}).empty());
  const auto s1 = ph_sample(kDefaultPrior, 100000, Seed{11});
  const auto s2 = ph_sample(kDefaultPrior, 100, Seed{11});
  for (std::size_t i = 0; i < s2.size(); ++i) CHECK(s1[i] == s2[i]);
  const Pochhammer hh(kDefaultPrior);
  CHECK(ks_distance(s1, [&](double x) { return hh.cdf(x); }) < 0.006);

  const auto p5 = P(0, "1", 5, "1");
  const auto s = ph_sample(p5, 100000, Seed{5});
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  const double m1 = ph_moment(p5, 1), m2 = ph_moment(p5, 2);
  CHECK(std::fabs(mean - m1) < 3 * std::sqrt((m2 - m1 * m1) / s.size()));
}

TEST_CASE("tabulated inverse-CDF sampling off the double residue path") {
  // b large enough to leave the double-precision residue path
  for (const auto& p : {P(0, "1", 90, "1"), P(2, "1/2", 70, "2", 1)}) {
    const Pochhammer dist(p);
    REQUIRE(dist.expansion().precision_used.is_extended());
    for (double u : {1e-6, 0.2, 0.5, 0.9, 1 - 1e-6}) {
      const double x = dist.quantile(u);
      CHECK(std::fabs(dist.cdf(x) - u) < 1e-10);
      // against the extended residue sum
      CHECK(std::fabs(dist.expansion().cdf(x) - u) < 1e-10);
    }
    const auto s = dist.sample(40000, Seed{21});
    CHECK(ks_distance(s, [&](double x) { return dist.cdf(x); }) < 0.012);
  }
}

TEST_CASE("Stirling-Gamma limit") {
  auto r = stirling_gamma_limit_experiment({10, 100, 1000}, 20000, Seed{3});
  auto r2 = stirling_gamma_limit_experiment({10, 100, 1000}, 20000, Seed{3});
  CHECK(r.ks == r2.ks);
  // true distances are about 0.0276, 0.0158, 0.0156: only b = 10 is clearly
  // separated at this sample size
  CHECK(r.ks[0] > r.ks[1]);
  CHECK(r.ks[0] > r.ks[2]);
  CHECK_THROWS_AS(stirling_gamma_limit_experiment({2}, 10, Seed{1}), DomainError);
}

TEST_CASE("figure curves") {
  auto f1 = figure1_curves();
  CHECK(f1.size() == 7);
  for (const auto& c : f1) {
    CHECK(c.x.size() == 400);
    CHECK(c.columns[1].back() <= 1.0);
  }
  auto f2 = figure2_curves();
  CHECK(f2.size() == 3);
  // integral of the b = 50 curve over [0, 2] close to its cdf at 2
  const auto& c = f2[1];
  double integral = 0.0;
  for (std::size_t i = 1; i < c.x.size(); ++i) {
    integral += 0.5 * (c.columns[0][i] + c.columns[0][i - 1]) * (c.x[i] - c.x[i - 1]);
  }
  CHECK(integral == doctest::Approx(ph_cdf(P(0, "1", 50, "1"), 2.0)).epsilon(1e-3));
}
