#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phprior/dm.hpp"
#include "phprior/harness.hpp"
#include "phprior/io.hpp"
#include "phprior/pochhammer.hpp"

namespace phprior {

// Cramér's V of a d x d' joint probability matrix, with the squared numerator
//   rho^2 = sum (p_cc' - p_c p_c')^2 / (p_c p_c') / (min(d, d') - 1).
// DomainError on zero marginals, negative entries, a total away from 1, or
// min(d, d') < 2.
double cramers_v(const std::vector<std::vector<double>>& joint);

// Counts over the cells of a p-way table with d_j levels at position j.
// Cells are flattened row-major over positions in input order (the last
// position varies fastest). Only occupied cells are stored.
class MultiwayTable {
 public:
  explicit MultiwayTable(std::vector<int> levels);

  void add(const std::vector<int>& tuple, std::int64_t count = 1);

  int positions() const { return static_cast<int>(levels_.size()); }
  const std::vector<int>& levels() const { return levels_; }
  std::size_t cells() const { return cells_; }
  std::int64_t total() const { return total_; }
  const std::map<std::size_t, std::int64_t>& occupied() const { return occupied_; }

  std::size_t flat_index(const std::vector<int>& tuple) const;
  std::vector<int> tuple_of(std::size_t index) const;

  // One document over all cells, for the Dirichlet-multinomial fit.
  Corpus corpus() const;

  // Marginals of a full cell-probability vector.
  std::vector<double> marginal(const std::vector<double>& cell_probs, int j) const;
  std::vector<std::vector<double>> pair_joint(const std::vector<double>& cell_probs, int j, int jp) const;
  // Every pair (j < j') in one pass; index of (j, j') follows pair_order().
  std::vector<std::vector<std::vector<double>>> all_pair_joints(const std::vector<double>& cell_probs) const;
  std::vector<std::pair<int, int>> pair_order() const;

 private:
  std::vector<int> levels_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 1;
  std::int64_t total_ = 0;
  std::map<std::size_t, std::int64_t> occupied_;
};

struct PairAssociation {
  int j = 0;  // 0-based positions, j < jp
  int jp = 0;
  Summary rho;
};

struct CramersVSummary {
  std::vector<PairAssociation> pairs;
  std::size_t draws = 0;
  double acceptance = 0.0;
  // Symmetric lookup; DomainError for j == jp or unknown positions.
  const PairAssociation& at(int j, int jp) const;
};

// Heterogeneous DM fit over the flattened cells, then rho per retained draw
// from the smoothed cell probabilities (n + alpha)/(N + A). At most max_draws
// evenly spaced draws are used.
CramersVSummary table_posterior_cramers_v(const MultiwayTable& table, const PochhammerParams& prior,
                                          const McmcBudget& budget, Seed seed, std::size_t max_draws = 2000);

// ---------------------------------------------------------------------------
// Observation files: one row per tuple, columns pos_1..pos_p, integer or
// single-character levels.

struct ObservationSet {
  std::vector<std::vector<std::string>> alphabets;  // per position, in level order
  MultiwayTable table{std::vector<int>{}};
};

// Alphabets per position, or inferred (sorted distinct symbols; integers
// sorted numerically) when not given. ParseError names the offending line.
ObservationSet observations_from_csv(const CsvTable& csv, const std::optional<std::vector<std::vector<std::string>>>& alphabets = std::nullopt,
                                     const std::string& source = "input");

enum class SyntheticKind {
  Independent,  // independent positions with random marginals
  Copy,         // position 2 repeats position 1, the rest independent
  Promoter,     // two latent classes driving the first three positions
};
// p positions over the alphabet {a, c, g, t} (d = 4) or 0..d-1 otherwise.
CsvTable synthetic_observations(SyntheticKind kind, int p, int d, std::size_t n, Seed seed);

}  // namespace phprior
