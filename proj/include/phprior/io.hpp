#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "phprior/dm.hpp"
#include "phprior/harness.hpp"
#include "phprior/pochhammer.hpp"

namespace phprior {

inline constexpr const char* kVersion = "0.1.0";
// Version string recorded in every output: library version and RNG stream version.
std::string version_string();

// Writes to a temporary file in the same directory, then renames over `path`.
// IoError if the directory does not exist or is not writable.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Shortest decimal form that round-trips ("nan", "inf", "-inf" otherwise).
std::string format_double(double x);

// Comma-separated table with a mandatory header row. Lines starting with '#'
// before the header are comments (used for the config echo).
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;
};

// RFC 4180 quoting; ParseError naming the line on ragged rows or bad quotes.
CsvTable parse_csv(const std::string& text, const std::string& source = "input");
std::string to_csv(const CsvTable& table);

// One document per row, one category per column; non-negative integers.
Corpus parse_counts_csv(const std::string& text, const std::string& source = "input");

// CSV of a curve: x column then one column per header.
CsvTable curve_table(const Curve& curve, const std::string& x_name);

// Prior parameters from {"m", "a", "b", "c", "d"}; a and c may be numbers or
// exact strings such as "3/2".
PochhammerParams prior_from_json(const nlohmann::json& j, const PochhammerParams& defaults = kDefaultPrior);
nlohmann::json to_json(const PochhammerParams& p);

// {"seed", "replicates", "threads", "mcmc": {...}, "settings": [...], "methods": [...]}
// Methods are names (see MethodSpec::named) or objects
// {"name", "kind": "dm" | "ph-h" | "ph-d", "alpha" | "alpha": "1/K", "prior": {...}}.
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& config);

// Columns: method, setting, abs_mean, abs_se, cov_mean, cov_se, seconds,
// abs_sd, cov_sd, replicates, failures.
CsvTable report_table(const BenchmarkReport& report);
nlohmann::json to_json(const BenchmarkReport& report);

}  // namespace phprior
