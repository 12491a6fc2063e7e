#include "phprior/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "phprior/errors.hpp"

namespace phprior {

double cramers_v(const std::vector<std::vector<double>>& joint) {
  const std::size_t d = joint.size();
  if (d == 0) throw DomainError("cramers_v: empty table");
  const std::size_t dp = joint[0].size();
  if (std::min(d, dp) < 2) throw DomainError("cramers_v: both positions need at least two levels");
  std::vector<double> row(d, 0.0), col(dp, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    if (joint[c].size() != dp) throw ShapeMismatch("cramers_v: ragged table");
    for (std::size_t e = 0; e < dp; ++e) {
      const double x = joint[c][e];
      if (!(x >= 0.0)) throw DomainError("cramers_v: negative or NaN entry");
      row[c] += x;
      col[e] += x;
      total += x;
    }
  }
  if (std::fabs(total - 1.0) > 1e-9) throw DomainError("cramers_v: entries must sum to 1");
  for (double m : row) {
    if (!(m > 0.0)) throw DomainError("cramers_v: zero row marginal");
  }
  for (double m : col) {
    if (!(m > 0.0)) throw DomainError("cramers_v: zero column marginal");
  }
  // (x - p q)^2 / (p q) = (x/p - q)(x/q - p): no underflow in p q, and the
  // sorted sum makes the result bitwise symmetric under transposition
  std::vector<double> terms;
  terms.reserve(d * dp);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t e = 0; e < dp; ++e) {
      const double x = joint[c][e];
      terms.push_back((x / row[c] - col[e]) * (x / col[e] - row[c]));
    }
  }
  std::sort(terms.begin(), terms.end());
  double chi = 0.0;
  for (double t : terms) chi += t;
  const double v = std::sqrt(chi / static_cast<double>(std::min(d, dp) - 1));
  return std::min(v, 1.0);
}

// ---------------------------------------------------------------------------
// MultiwayTable

MultiwayTable::MultiwayTable(std::vector<int> levels) : levels_(std::move(levels)) {
  strides_.assign(levels_.size(), 1);
  for (std::size_t j = levels_.size(); j-- > 0;) {
    if (levels_[j] < 1) throw DomainError("MultiwayTable: every position needs at least one level");
    strides_[j] = cells_;
    if (cells_ > (std::size_t{1} << 40) / static_cast<std::size_t>(levels_[j])) {
      throw SizeBudgetExceeded("MultiwayTable: too many cells");
    }
    cells_ *= static_cast<std::size_t>(levels_[j]);
  }
}

std::size_t MultiwayTable::flat_index(const std::vector<int>& tuple) const {
  if (tuple.size() != levels_.size()) throw ShapeMismatch("MultiwayTable: tuple length differs from positions");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < tuple.size(); ++j) {
    if (tuple[j] < 0 || tuple[j] >= levels_[j]) throw DomainError("MultiwayTable: level index out of range");
    idx += static_cast<std::size_t>(tuple[j]) * strides_[j];
  }
  return idx;
}

std::vector<int> MultiwayTable::tuple_of(std::size_t index) const {
  if (index >= cells_) throw DomainError("MultiwayTable: cell index out of range");
  std::vector<int> t(levels_.size());
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    t[j] = static_cast<int>(index / strides_[j]);
    index %= strides_[j];
  }
  return t;
}

void MultiwayTable::add(const std::vector<int>& tuple, std::int64_t count) {
  if (count < 0) throw DomainError("MultiwayTable: negative count");
  if (count == 0) return;
  occupied_[flat_index(tuple)] += count;
  total_ += count;
}

Corpus MultiwayTable::corpus() const {
  if (cells_ > 50000000) throw SizeBudgetExceeded("MultiwayTable: too many cells for a dense fit");
  std::vector<std::int64_t> row(cells_, 0);
  for (const auto& [i, n] : occupied_) row[i] = n;
  return Corpus::single(std::move(row));
}

std::vector<double> MultiwayTable::marginal(const std::vector<double>& cell_probs, int j) const {
  if (cell_probs.size() != cells_) throw ShapeMismatch("MultiwayTable: probability vector length differs from cells");
  if (j < 0 || j >= positions()) throw DomainError("MultiwayTable: position out of range");
  std::vector<double> m(levels_[j], 0.0);
  for (std::size_t i = 0; i < cells_; ++i) m[(i / strides_[j]) % levels_[j]] += cell_probs[i];
  return m;
}

std::vector<std::vector<double>> MultiwayTable::pair_joint(const std::vector<double>& cell_probs, int j, int jp) const {
  if (cell_probs.size() != cells_) throw ShapeMismatch("MultiwayTable: probability vector length differs from cells");
  if (j < 0 || jp < 0 || j >= positions() || jp >= positions() || j == jp) {
    throw DomainError("MultiwayTable: need two distinct positions");
  }
  std::vector<std::vector<double>> t(levels_[j], std::vector<double>(levels_[jp], 0.0));
  for (std::size_t i = 0; i < cells_; ++i) {
    t[(i / strides_[j]) % levels_[j]][(i / strides_[jp]) % levels_[jp]] += cell_probs[i];
  }
  return t;
}

std::vector<std::pair<int, int>> MultiwayTable::pair_order() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < positions(); ++j) {
    for (int jp = j + 1; jp < positions(); ++jp) out.emplace_back(j, jp);
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> MultiwayTable::all_pair_joints(const std::vector<double>& cell_probs) const {
  if (cell_probs.size() != cells_) throw ShapeMismatch("MultiwayTable: probability vector length differs from cells");
  const auto pairs = pair_order();
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& [j, jp] : pairs) out.emplace_back(levels_[j], std::vector<double>(levels_[jp], 0.0));
  std::vector<int> t(levels_.size(), 0);
  for (std::size_t i = 0; i < cells_; ++i) {
    for (std::size_t p = 0; p < pairs.size(); ++p) out[p][t[pairs[p].first]][t[pairs[p].second]] += cell_probs[i];
    // odometer over the tuple, last position fastest
    for (std::size_t j = levels_.size(); j-- > 0;) {
      if (++t[j] < levels_[j]) break;
      t[j] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// posterior association

const PairAssociation& CramersVSummary::at(int j, int jp) const {
  if (j == jp) throw DomainError("CramersVSummary: the diagonal is not stored");
  if (j > jp) std::swap(j, jp);
  for (const auto& p : pairs) {
    if (p.j == j && p.jp == jp) return p;
  }
  throw DomainError("CramersVSummary: unknown position pair");
}

CramersVSummary table_posterior_cramers_v(const MultiwayTable& table, const PochhammerParams& prior,
                                          const McmcBudget& budget, Seed seed, std::size_t max_draws) {
  if (table.total() == 0) throw DomainError("table_posterior_cramers_v: empty table");
  budget.validate();
  const Corpus corpus = table.corpus();
  MwgOptions opts;
  opts.iterations = budget.iterations;
  opts.burn_in = budget.burn_in;
  opts.stepsize = budget.stepsize;
  opts.adapt = budget.adapt;
  opts.seed = seed;
  const auto chain = mwg_sample(corpus, prior, opts);

  CramersVSummary out;
  const auto rates = chain.acceptance_rates();
  for (double r : rates) out.acceptance += r / static_cast<double>(rates.size());
  const auto pairs = table.pair_order();
  if (pairs.empty()) return out;

  const std::size_t T = chain.draws.size();
  const std::size_t step = std::max<std::size_t>(1, (T + std::max<std::size_t>(max_draws, 1) - 1) / std::max<std::size_t>(max_draws, 1));
  std::vector<std::vector<double>> rho(pairs.size());
  const double N = static_cast<double>(table.total());
  std::vector<double> probs(table.cells());
  for (std::size_t t = 0; t < T; t += step) {
    const auto& alpha = chain.draws[t];
    double A = 0.0;
    for (double a : alpha) A += a;
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = alpha[i] / (N + A);
    for (const auto& [i, n] : table.occupied()) probs[i] = (static_cast<double>(n) + alpha[i]) / (N + A);
    const auto joints = table.all_pair_joints(probs);
    for (std::size_t p = 0; p < pairs.size(); ++p) rho[p].push_back(cramers_v(joints[p]));
  }
  out.draws = rho.front().size();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    PairAssociation a;
    a.j = pairs[p].first;
    a.jp = pairs[p].second;
    double s = 0.0;
    for (double v : rho[p]) s += v;
    a.rho.mean = s / static_cast<double>(rho[p].size());
    a.rho.q025 = empirical_quantile(rho[p], 0.025);
    a.rho.q975 = empirical_quantile(rho[p], 0.975);
    out.pairs.push_back(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// observation files

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_integer(const std::string& s, long long& v) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

ObservationSet observations_from_csv(const CsvTable& csv, const std::optional<std::vector<std::vector<std::string>>>& alphabets,
                                     const std::string& source) {
  const std::size_t p = csv.header.size();
  for (std::size_t j = 0; j < p; ++j) {
    if (trim(csv.header[j]) != "pos_" + std::to_string(j + 1)) {
      throw ParseError(source + ": header column " + std::to_string(j + 1) + " must be named pos_" + std::to_string(j + 1));
    }
  }
  auto line_of = [&](std::size_t r) { return csv.lines.empty() ? r + 2 : csv.lines[r]; };
  ObservationSet out;
  if (alphabets) {
    if (alphabets->size() != p) throw ParseError(source + ": alphabet count differs from the number of positions");
    out.alphabets = *alphabets;
  } else {
    out.alphabets.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      std::set<std::string> symbols;
      for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto f = trim(csv.rows[r][j]);
        long long v = 0;
        if (f.empty() || (f.size() > 1 && !is_integer(f, v))) {
          throw ParseError(source + ": line " + std::to_string(line_of(r)) + ": level '" + f +
                           "' is neither an integer nor a single character");
        }
        symbols.insert(f);
      }
      std::vector<std::string> alpha(symbols.begin(), symbols.end());
      long long a = 0, b = 0;
      const bool numeric = std::all_of(alpha.begin(), alpha.end(), [&](const std::string& s) { return is_integer(s, a); });
      if (numeric) {
        std::sort(alpha.begin(), alpha.end(), [&](const std::string& x, const std::string& y) {
          is_integer(x, a);
          is_integer(y, b);
          return a < b;
        });
      }
      if (alpha.empty()) throw ParseError(source + ": cannot infer an alphabet from zero observations");
      out.alphabets[j] = std::move(alpha);
    }
  }
  std::vector<int> levels;
  std::vector<std::map<std::string, int>> index(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (out.alphabets[j].empty()) throw ParseError(source + ": empty alphabet at position " + std::to_string(j + 1));
    for (std::size_t l = 0; l < out.alphabets[j].size(); ++l) {
      if (!index[j].emplace(out.alphabets[j][l], static_cast<int>(l)).second) {
        throw ParseError(source + ": duplicate symbol in the alphabet of position " + std::to_string(j + 1));
      }
    }
    levels.push_back(static_cast<int>(out.alphabets[j].size()));
  }
  out.table = MultiwayTable(levels);
  std::vector<int> tuple(p);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto f = trim(csv.rows[r][j]);
      const auto it = index[j].find(f);
      if (it == index[j].end()) {
        throw ParseError(source + ": line " + std::to_string(line_of(r)) + ": level '" + f + "' not in the alphabet of pos_" +
                         std::to_string(j + 1));
      }
      tuple[j] = it->second;
    }
    out.table.add(tuple);
  }
  return out;
}

CsvTable synthetic_observations(SyntheticKind kind, int p, int d, std::size_t n, Seed seed) {
  if (p < 1 || d < 2) throw DomainError("synthetic_observations: need p >= 1 and d >= 2");
  if (kind == SyntheticKind::Copy && p < 2) throw DomainError("synthetic_observations: copy needs p >= 2");
  Rng rng(seed);
  auto symbol = [&](int level) { return d == 4 ? std::string(1, "acgt"[level]) : std::to_string(level); };
  auto draw = [&](const std::vector<double>& probs) {
    double u = rng.uniform(), acc = 0.0;
    for (std::size_t l = 0; l < probs.size(); ++l) {
      acc += probs[l];
      if (u < acc) return static_cast<int>(l);
    }
    return static_cast<int>(probs.size()) - 1;
  };
  const std::vector<double> ones(d, 2.0);
  std::vector<std::vector<double>> margins;
  for (int j = 0; j < p; ++j) margins.push_back(rng.dirichlet(ones));
  // class-specific margins for the promoter-like generator
  std::vector<std::vector<std::vector<double>>> by_class(2);
  const std::vector<double> peaked(d, 0.3);
  for (int c = 0; c < 2; ++c) {
    for (int j = 0; j < p; ++j) by_class[c].push_back(rng.dirichlet(peaked));
  }

  CsvTable t;
  for (int j = 0; j < p; ++j) t.header.push_back("pos_" + std::to_string(j + 1));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> lv(p);
    const int cls = rng.uniform() < 0.5 ? 0 : 1;
    for (int j = 0; j < p; ++j) {
      if (kind == SyntheticKind::Promoter && j < 3) {
        lv[j] = draw(by_class[cls][j]);
      } else if (kind == SyntheticKind::Copy && j == 1) {
        lv[j] = lv[0];
      } else {
        lv[j] = draw(margins[j]);
      }
    }
    std::vector<std::string> row;
    for (int l : lv) row.push_back(symbol(l));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace phprior
