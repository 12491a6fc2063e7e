#include "phprior/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "phprior/errors.hpp"
#include "phprior/rng.hpp"

namespace phprior {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return std::string("phprior ") + kVersion + " (rng v" + std::to_string(kRngVersion) + ")"; }

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()) + "_" +
                              std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::size_t line = 1, i = 0;
  const std::size_t n = text.size();
  auto fail = [&](std::size_t at, const std::string& msg) {
    throw ParseError(source + ": line " + std::to_string(at) + ": " + msg);
  };
  while (i < n) {
    const std::size_t row_line = line;
    // comment lines before the header
    if (t.header.empty() && text[i] == '#') {
      const auto end = text.find('\n', i);
      std::string c = text.substr(i + 1, (end == std::string::npos ? n : end) - i - 1);
      if (!c.empty() && c.back() == '\r') c.pop_back();
      if (!c.empty() && c.front() == ' ') c.erase(0, 1);
      t.comments.push_back(c);
      i = end == std::string::npos ? n : end + 1;
      ++line;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, was_quoted = false;
    for (;;) {
      if (i >= n) {
        if (quoted) fail(row_line, "unterminated quoted field");
        fields.push_back(field);
        break;
      }
      const char ch = text[i++];
      if (quoted) {
        if (ch == '"') {
          if (i < n && text[i] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line;
          field += ch;
        }
        continue;
      }
      if (ch == '"') {
        if (!field.empty() || was_quoted) fail(row_line, "quote inside an unquoted field");
        quoted = was_quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && i < n && text[i] == '\n') ++i;
        ++line;
        fields.push_back(std::move(field));
        break;
      } else {
        if (was_quoted) fail(row_line, "text after a closing quote");
        field += ch;
      }
    }
    // skip blank lines
    if (fields.size() == 1 && fields[0].empty() && !was_quoted) continue;
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      fail(row_line, "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(row_line);
  }
  if (t.header.empty()) throw ParseError(source + ": missing header row");
  return t;
}

namespace {

std::string quote(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += quote(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (const auto& c : table.comments) {
    std::istringstream lines(c);
    for (std::string l; std::getline(lines, l);) out += "# " + l + "\n";
  }
  append_row(out, table.header);
  for (const auto& r : table.rows) append_row(out, r);
  return out;
}

Corpus parse_counts_csv(const std::string& text, const std::string& source) {
  const auto t = parse_csv(text, source);
  if (t.rows.empty()) throw ParseError(source + ": no documents");
  std::vector<std::vector<std::int64_t>> counts;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::int64_t> row;
    for (const auto& f : t.rows[r]) {
      std::int64_t v = 0;
      const char* b = f.data();
      const char* e = f.data() + f.size();
      while (b < e && *b == ' ') ++b;
      while (e > b && e[-1] == ' ') --e;
      const auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc() || res.ptr != e || v < 0) {
        throw ParseError(source + ": line " + std::to_string(t.lines[r]) + ": '" + f +
                         "' is not a non-negative integer count");
      }
      row.push_back(v);
    }
    counts.push_back(std::move(row));
  }
  return Corpus(std::move(counts));
}

CsvTable curve_table(const Curve& curve, const std::string& x_name) {
  CsvTable t;
  t.header.push_back(x_name);
  for (const auto& h : curve.headers) t.header.push_back(h);
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    std::vector<std::string> row{format_double(curve.x[i])};
    for (const auto& col : curve.columns) row.push_back(format_double(col[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Scalar scalar_from_json(const json& j, const char* what) {
  if (j.is_string()) return Scalar::parse(j.get<std::string>());
  if (j.is_number_integer()) return Scalar::integer(j.get<std::int64_t>());
  if (j.is_number()) return Scalar(j.get<double>());
  throw ParseError(std::string("'") + what + "' must be a number or a string such as \"3/2\"");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ParseError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

PochhammerParams prior_from_json(const json& j, const PochhammerParams& defaults) {
  if (!j.is_object()) throw ParseError("prior must be a JSON object");
  reject_unknown(j, {"m", "a", "b", "c", "d"}, "prior");
  PochhammerParams p = defaults;
  p.m = get_or(j, "m", p.m);
  p.b = get_or(j, "b", p.b);
  p.d = get_or(j, "d", p.d);
  if (j.contains("a")) p.a = scalar_from_json(j["a"], "a");
  if (j.contains("c")) p.c = scalar_from_json(j["c"], "c");
  p.validate();
  return p;
}

json to_json(const PochhammerParams& p) {
  return {{"m", p.m}, {"a", p.a.to_string()}, {"b", p.b}, {"c", p.c.to_string()}, {"d", p.d}};
}

BenchmarkConfig benchmark_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("benchmark config must be a JSON object");
  reject_unknown(j, {"seed", "replicates", "threads", "mcmc", "settings", "methods"}, "benchmark config");
  BenchmarkConfig c;
  const Seed seed{get_or<std::uint64_t>(j, "seed", 20240601)};
  const auto replicates = get_or<std::size_t>(j, "replicates", 20);
  c.threads = get_or<unsigned>(j, "threads", 0);
  if (j.contains("mcmc")) {
    const auto& m = j["mcmc"];
    reject_unknown(m, {"iterations", "burn_in", "stepsize", "adapt"}, "mcmc");
    c.budget.iterations = get_or(m, "iterations", c.budget.iterations);
    c.budget.burn_in = get_or(m, "burn_in", c.budget.iterations / 5);
    if (m.contains("stepsize") && m["stepsize"].is_string()) {
      if (m["stepsize"] != "adapt") throw ParseError("mcmc.stepsize must be a number or \"adapt\"");
      c.budget.adapt = true;
    } else {
      c.budget.stepsize = get_or(m, "stepsize", c.budget.stepsize);
      c.budget.adapt = get_or(m, "adapt", c.budget.adapt);
    }
  }
  if (!j.contains("settings") || !j["settings"].is_array()) throw ParseError("benchmark config needs a 'settings' array");
  for (const auto& s : j["settings"]) {
    reject_unknown(s, {"scenario", "setting", "K", "S", "N", "N_min", "N_max", "q", "replicates"}, "setting");
    const int scenario = get_or(s, "scenario", 0);
    if (scenario < 1 || scenario > 3) throw ParseError("setting.scenario must be 1, 2 or 3");
    const int setting = get_or(s, "setting", 1);
    ScenarioConfig sc;
    sc.scenario = static_cast<Scenario>(scenario);
    sc.setting = setting;
    sc.S = scenario == 1 ? 1 : 50;
    sc.K = get_or(s, "K", sc.K);
    sc.S = get_or(s, "S", sc.S);
    sc.N = get_or(s, "N", sc.N);
    sc.N_min = get_or(s, "N_min", sc.N_min);
    sc.N_max = get_or(s, "N_max", sc.N_max);
    if (s.contains("q")) sc.q = get_or<int>(s, "q", 0);
    sc.replicates = get_or(s, "replicates", replicates);
    sc.seed = seed;
    sc.validate();
    c.settings.push_back(sc);
  }
  if (!j.contains("methods") || !j["methods"].is_array()) throw ParseError("benchmark config needs a 'methods' array");
  for (const auto& m : j["methods"]) {
    if (m.is_string()) {
      c.methods.push_back(MethodSpec::named(m.get<std::string>()));
      continue;
    }
    reject_unknown(m, {"name", "kind", "alpha", "prior"}, "method");
    MethodSpec spec;
    spec.name = get_or<std::string>(m, "name", "");
    const auto kind = get_or<std::string>(m, "kind", "");
    if (kind == "dm") {
      spec.kind = MethodKind::FixedAlphaDM;
      if (m.contains("alpha") && m["alpha"].is_string()) {
        if (m["alpha"] != "1/K") throw ParseError("method.alpha must be a number or \"1/K\"");
        spec.alpha_inverse_K = true;
      } else {
        spec.alpha = get_or(m, "alpha", 1.0);
      }
    } else if (kind == "ph-h" || kind == "ph-d") {
      spec.kind = kind == "ph-h" ? MethodKind::PHHomogeneous : MethodKind::PHHeterogeneous;
      spec.prior = prior_from_json(m.value("prior", json::object()));
    } else {
      throw ParseError("method.kind must be \"dm\", \"ph-h\" or \"ph-d\"");
    }
    c.methods.push_back(spec);
  }
  c.validate();
  return c;
}

json to_json(const BenchmarkConfig& config) {
  json j;
  // settings share the top-level seed when read from a config
  j["seed"] = config.settings.empty() ? std::uint64_t{20240601} : config.settings.front().seed.value;
  j["threads"] = config.threads;
  j["mcmc"] = {{"iterations", config.budget.iterations},
               {"burn_in", config.budget.burn_in},
               {"stepsize", config.budget.stepsize},
               {"adapt", config.budget.adapt}};
  j["settings"] = json::array();
  for (const auto& s : config.settings) {
    json e = {{"scenario", static_cast<int>(s.scenario)},
              {"setting", s.setting},
              {"K", s.K},
              {"S", s.S},
              {"replicates", s.replicates}};
    if (s.scenario == Scenario::SingleDoc) {
      e["N"] = s.N;
    } else {
      e["N_min"] = s.N_min;
      e["N_max"] = s.N_max;
    }
    if (s.scenario == Scenario::MultiDocStructuralZeros) e["q"] = s.zero_percent();
    j["settings"].push_back(e);
  }
  j["methods"] = json::array();
  for (const auto& m : config.methods) {
    json e = {{"name", m.name}};
    if (m.kind == MethodKind::FixedAlphaDM) {
      e["kind"] = "dm";
      e["alpha"] = m.alpha_inverse_K ? json("1/K") : json(m.alpha);
    } else {
      e["kind"] = m.kind == MethodKind::PHHomogeneous ? "ph-h" : "ph-d";
      e["prior"] = to_json(m.prior);
    }
    j["methods"].push_back(e);
  }
  return j;
}

CsvTable report_table(const BenchmarkReport& report) {
  CsvTable t;
  t.header = {"method", "setting", "abs_mean", "abs_se", "cov_mean", "cov_se", "seconds",
              "abs_sd", "cov_sd", "replicates", "failures"};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.method, r.setting, format_double(r.abs_mean), format_double(r.abs_se), format_double(r.cov_mean),
                      format_double(r.cov_se), format_double(r.seconds), format_double(r.abs_sd),
                      format_double(r.cov_sd), std::to_string(r.replicates), std::to_string(r.failures)});
  }
  return t;
}

json to_json(const BenchmarkReport& report) {
  json rows = json::array();
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  for (const auto& r : report.rows) {
    json cells = json::array();
    for (const auto& c : r.cells) {
      json e = {{"replicate", c.replicate}, {"seed", c.seed}, {"abs", num(c.abs)}, {"cov", num(c.cov)},
                {"acceptance", num(c.acceptance)}, {"seconds", c.seconds}};
      if (!c.error.empty()) e["error"] = c.error;
      cells.push_back(e);
    }
    rows.push_back({{"method", r.method},
                    {"setting", r.setting},
                    {"replicates", r.replicates},
                    {"failures", r.failures},
                    {"abs_mean", num(r.abs_mean)},
                    {"abs_sd", num(r.abs_sd)},
                    {"abs_se", num(r.abs_se)},
                    {"cov_mean", num(r.cov_mean)},
                    {"cov_sd", num(r.cov_sd)},
                    {"cov_se", num(r.cov_se)},
                    {"seconds", r.seconds},
                    {"cells", cells}});
  }
  return {{"version", version_string()}, {"seconds", report.seconds}, {"rows", rows}};
}

}  // namespace phprior
