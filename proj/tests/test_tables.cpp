#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "phprior/errors.hpp"
#include "phprior/tables.hpp"

using namespace phprior;

namespace {

using Joint = std::vector<std::vector<double>>;

// textbook chi-square form, no rearrangement
double brute_v(const Joint& t) {
  std::vector<double> r(t.size(), 0.0), c(t[0].size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[0].size(); ++j) {
      r[i] += t[i][j];
      c[j] += t[i][j];
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[0].size(); ++j) s += std::pow(t[i][j] - r[i] * c[j], 2) / (r[i] * c[j]);
  }
  return std::sqrt(s / (std::min(t.size(), t[0].size()) - 1));
}

McmcBudget budget(std::size_t it) {
  McmcBudget b;
  b.iterations = it;
  b.burn_in = it / 5;
  return b;
}

}  // namespace

TEST_CASE("cramers_v examples") {
  CHECK(cramers_v({{0.5, 0.0}, {0.0, 0.5}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(cramers_v({{0.4, 0.1}, {0.1, 0.4}}) - 0.6) < 1e-12);
  const std::vector<double> a{0.2, 0.5, 0.3}, b{0.1, 0.6, 0.1, 0.2};
  Joint prod(3, std::vector<double>(4));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) prod[i][j] = a[i] * b[j];
  }
  CHECK(cramers_v(prod) < 1e-12);

  Joint t{{0.05, 0.1, 0.02}, {0.2, 0.03, 0.1}, {0.1, 0.3, 0.1}};
  CHECK(std::fabs(cramers_v(t) - brute_v(t)) < 1e-12);
}

TEST_CASE("cramers_v errors") {
  CHECK_THROWS_AS(cramers_v({{0.5, 0.5}, {0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(cramers_v({{0.5, 0.0}, {0.5, 0.0}}), DomainError);
  CHECK_THROWS_AS(cramers_v({{1.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(cramers_v({{0.5, 0.6}, {0.0, -0.1}}), DomainError);
  CHECK_THROWS_AS(cramers_v({{0.3, 0.3}, {0.3, 0.3}}), DomainError);
  CHECK_THROWS_AS(cramers_v({{0.5, 0.25}, {0.25}}), ShapeMismatch);
}

TEST_CASE("cramers_v label invariance and tiny marginals") {
  Joint t{{0.05, 0.1, 0.02, 0.03}, {0.2, 0.03, 0.1, 0.07}, {0.1, 0.2, 0.05, 0.05}};
  const double v = cramers_v(t);
  Joint rows{t[2], t[0], t[1]};
  CHECK(std::fabs(cramers_v(rows) - v) < 1e-12);
  Joint cols = t;
  for (auto& r : cols) std::swap(r[0], r[3]);
  CHECK(std::fabs(cramers_v(cols) - v) < 1e-12);

  // marginal products below the smallest double stay finite
  Joint tiny{{0.5 - 1e-200, 1e-200}, {1e-200, 0.5 - 1e-200}};
  const double vt = cramers_v(tiny);
  CHECK(std::isfinite(vt));
  CHECK(vt == doctest::Approx(1.0));
}

TEST_CASE("MultiwayTable flattening") {
  MultiwayTable t({2, 3, 4});
  CHECK(t.cells() == 24);
  CHECK(t.flat_index({0, 0, 1}) == 1);
  CHECK(t.flat_index({0, 1, 0}) == 4);
  CHECK(t.flat_index({1, 0, 0}) == 12);
  for (std::size_t i = 0; i < t.cells(); ++i) CHECK(t.flat_index(t.tuple_of(i)) == i);
  t.add({1, 2, 3});
  t.add({1, 2, 3}, 2);
  t.add({0, 0, 0});
  CHECK(t.total() == 4);
  CHECK(t.occupied().size() == 2);
  CHECK(t.occupied().at(23) == 3);
  CHECK_THROWS_AS(t.add({2, 0, 0}), DomainError);
  CHECK_THROWS_AS(t.add({0, 0}), ShapeMismatch);
  CHECK_THROWS_AS(MultiwayTable({3, 0}), DomainError);

  const auto c = t.corpus();
  CHECK(c.K() == 24);
  CHECK(c.S() == 1);
}

TEST_CASE("pair joints agree with direct marginals") {
  MultiwayTable t({3, 2, 4, 2});
  Rng rng(Seed{77});
  const auto p = rng.dirichlet(std::vector<double>(t.cells(), 0.7));
  const auto joints = t.all_pair_joints(p);
  const auto order = t.pair_order();
  REQUIRE(order.size() == 6);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto [j, jp] = order[k];
    const auto direct = t.pair_joint(p, j, jp);
    const auto mj = t.marginal(p, j), mjp = t.marginal(p, jp);
    for (int a = 0; a < t.levels()[j]; ++a) {
      double row = 0.0;
      for (int b = 0; b < t.levels()[jp]; ++b) {
        CHECK(std::fabs(joints[k][a][b] - direct[a][b]) < 1e-12);
        row += joints[k][a][b];
      }
      CHECK(std::fabs(row - mj[a]) < 1e-12);
    }
    for (int b = 0; b < t.levels()[jp]; ++b) {
      double col = 0.0;
      for (int a = 0; a < t.levels()[j]; ++a) col += joints[k][a][b];
      CHECK(std::fabs(col - mjp[b]) < 1e-12);
    }
    // transposed pair gives the same V
    auto tr = t.pair_joint(p, jp, j);
    CHECK(cramers_v(tr) == cramers_v(direct));
  }
}

TEST_CASE("observation CSV parsing") {
  const auto csv = parse_csv("pos_1,pos_2\na,2\nc,10\na,2\n", "obs.csv");
  const auto obs = observations_from_csv(csv, std::nullopt, "obs.csv");
  CHECK(obs.alphabets[0] == std::vector<std::string>{"a", "c"});
  CHECK(obs.alphabets[1] == std::vector<std::string>{"2", "10"});
  CHECK(obs.table.total() == 3);
  CHECK(obs.table.occupied().at(obs.table.flat_index({0, 0})) == 2);

  const std::vector<std::vector<std::string>> alpha{{"a", "c", "g", "t"}, {"2", "10", "11"}};
  const auto declared = observations_from_csv(csv, alpha);
  CHECK(declared.table.cells() == 12);

  auto bad = parse_csv("pos_1,pos_2\na,2\nac,3\n");
  try {
    observations_from_csv(bad, std::nullopt, "obs.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(observations_from_csv(parse_csv("pos_1,pos_2\nx,2\n"), alpha), ParseError);
  CHECK_THROWS_AS(observations_from_csv(parse_csv("pos_2,pos_1\nx,2\n")), ParseError);

  const auto single = observations_from_csv(parse_csv("pos_1\n1\n2\n"));
  CHECK(single.table.pair_order().empty());
}

TEST_CASE("posterior V: independent positions") {
  const auto csv = synthetic_observations(SyntheticKind::Independent, 2, 4, 500, Seed{11});
  const auto obs = observations_from_csv(csv);
  const auto s = table_posterior_cramers_v(obs.table, kDefaultPrior, budget(4000), Seed{3});
  REQUIRE(s.pairs.size() == 1);
  const auto& r = s.at(1, 0).rho;
  MESSAGE("independent: mean " << r.mean << " q025 " << r.q025 << " q975 " << r.q975);
  CHECK(r.mean < 0.15);
  CHECK(r.q025 >= 0.0);
  CHECK(r.q025 < 0.1);
  CHECK(r.q975 <= 1.0);
}

TEST_CASE("posterior V: copied position") {
  const auto csv = synthetic_observations(SyntheticKind::Copy, 3, 4, 200, Seed{12});
  const auto obs = observations_from_csv(csv);
  const auto s = table_posterior_cramers_v(obs.table, kDefaultPrior, budget(3000), Seed{4});
  REQUIRE(s.pairs.size() == 3);
  MESSAGE("copy: " << s.at(0, 1).rho.mean << " others " << s.at(0, 2).rho.mean << ", " << s.at(1, 2).rho.mean);
  CHECK(s.at(0, 1).rho.mean > 0.8);
  CHECK(s.at(0, 2).rho.mean < 0.3);
  for (const auto& p : s.pairs) {
    CHECK(p.rho.q025 >= 0.0);
    CHECK(p.rho.q975 <= 1.0);
    CHECK(p.rho.q025 <= p.rho.mean);
    CHECK(p.rho.mean <= p.rho.q975);
  }
  CHECK_THROWS_AS(s.at(1, 1), DomainError);
}

TEST_CASE("posterior V: one repeated tuple and the promoter-sized table") {
  MultiwayTable t({4, 4, 4});
  t.add({1, 2, 3}, 30);
  const auto s = table_posterior_cramers_v(t, kDefaultPrior, budget(2000), Seed{5});
  for (const auto& p : s.pairs) {
    MESSAGE("repeated tuple pair " << p.j << "," << p.jp << ": " << p.rho.mean);
    CHECK(p.rho.mean > 0.4);
    CHECK(p.rho.q025 >= 0.0);
    CHECK(p.rho.q975 <= 1.0);
  }

  CHECK_THROWS_AS(table_posterior_cramers_v(MultiwayTable({2, 2}), kDefaultPrior, budget(100), Seed{1}), DomainError);

  // 4^7 cells, 53 observations: mostly empty cells
  const auto csv = synthetic_observations(SyntheticKind::Promoter, 7, 4, 53, Seed{13});
  const auto obs = observations_from_csv(csv);
  CHECK(obs.table.total() == 53);
  const auto big = table_posterior_cramers_v(obs.table, kDefaultPrior, budget(300), Seed{6}, 100);
  CHECK(big.pairs.size() == 21);
  for (const auto& p : big.pairs) {
    CHECK(p.rho.q025 >= 0.0);
    CHECK(p.rho.q975 <= 1.0);
  }
}
