#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "phprior/io.hpp"

using namespace phprior;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "phprior_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& env = "") {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = "cd " + workdir().string() + " && " + env + " " + PHPRIOR_CLI + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out);
  r.err = read_text(err);
  return r;
}

void write(const std::string& name, const std::string& text) { atomic_write(workdir() / name, text); }

}  // namespace

TEST_CASE("version and usage") {
  const auto v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find(version_string()) != std::string::npos);
  CHECK(run("").code != 0);
  CHECK(run("density --bogus").code != 0);
}

TEST_CASE("density curve integrates to its cdf range") {
  const auto r = run("density --m 0 --a 1 --b 2 --c 1 --grid linear --from 0 --to 40 --points 4001");
  REQUIRE(r.code == 0);
  const auto t = parse_csv(r.out);
  CHECK(t.comments.size() >= 2);
  CHECK(t.comments[1].rfind("config ", 0) == 0);
  double area = 0.0;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const double dx = std::stod(t.rows[i][0]) - std::stod(t.rows[i - 1][0]);
    area += 0.5 * dx * (std::stod(t.rows[i][1]) + std::stod(t.rows[i - 1][1]));
  }
  const double range = std::stod(t.rows.back()[2]) - std::stod(t.rows.front()[2]);
  CHECK(area == doctest::Approx(range).epsilon(1e-4));

  CHECK(run("density --out missing_dir/x.csv").code != 0);
  CHECK(run("density --b 1").code != 0);
  CHECK(run("density --figure fig9").code != 0);
}

TEST_CASE("fig1 writes seven curve files") {
  fs::create_directories(workdir() / "fig1");
  const auto r = run("density --figure fig1 --out fig1");
  REQUIRE(r.code == 0);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(workdir() / "fig1")) ++files;
  CHECK(files == 7);
}

TEST_CASE("fit dispatch") {
  write("k1.csv", "only\n4\n");
  auto r = run("fit --counts k1.csv");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["method"] == "prior");
  CHECK(j["note"].get<std::string>().find("posterior equals the prior") != std::string::npos);

  write("one.csv", "a,b,c\n3,0,2\n");
  r = run("fit --counts one.csv");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["method"] == "exact");
  double total = 0.0;
  for (double p : j["pi_mean"][0]) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

  write("multi.csv", "a,b,c,d\n3,0,2,1\n0,1,5,0\n2,2,0,0\n");
  r = run("fit --counts multi.csv --mode homogeneous --iterations 1500");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("notice") != std::string::npos);
  CHECK(json::parse(r.out)["method"] == "mcmc");

  r = run("fit --counts multi.csv --mode heterogeneous --m 0 --b 2 --iterations 1500");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  for (double t : j["pi_mean_totals"]) CHECK(t == doctest::Approx(1.0).epsilon(1e-12));

  write("collide.csv", "a,b,c,d\n3,0,2,1\n");
  r = run("fit --counts collide.csv --a 1 --c 4");
  CHECK(r.code != 0);
  CHECK(r.err.find("perturb a") != std::string::npos);

  write("bad.csv", "a,b\n1,2\n1,x\n");
  r = run("fit --counts bad.csv");
  CHECK(r.code != 0);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("outputs are byte-reproducible and echo the config") {
  write("multi2.csv", "a,b,c\n3,0,2\n0,1,5\n");
  const auto a = run("fit --counts multi2.csv --mode heterogeneous --iterations 1000 --chain c1.csv");
  const auto b = run("fit --counts multi2.csv --mode heterogeneous --iterations 1000 --chain c2.csv");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(read_text(workdir() / "c1.csv") == read_text(workdir() / "c2.csv"));
  const auto j = json::parse(a.out);
  CHECK(j["config"]["mcmc"]["seed"] == 20240601);

  const auto ext = run("density --points 3", "PHPRIOR_PRECISION=extended:256");
  REQUIRE(ext.code == 0);
  CHECK(ext.out.find("extended") != std::string::npos);
}

TEST_CASE("benchmark") {
  auto r = run("benchmark --scenario 2 --setting 1 --methods ph1d --replicates 2 --K 20 --S 5 --iterations 500");
  REQUIRE(r.code == 0);
  const auto t = parse_csv(r.out);
  CHECK(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "ph1d");
  CHECK(run("benchmark --scenario 2 --methods dm1,dm1 --replicates 1").code != 0);
  CHECK(run("benchmark --scenario 2 --methods nope --replicates 1").code != 0);

  write("bench.json", R"({"seed": 3, "replicates": 2, "mcmc": {"iterations": 400},
                          "settings": [{"scenario": 1, "setting": 1, "K": 20}], "methods": ["dm1", "ph1h"]})");
  r = run("benchmark --config bench.json --json report.json");
  REQUIRE(r.code == 0);
  CHECK(parse_csv(r.out).rows.size() == 2);
  const auto rep = json::parse(read_text(workdir() / "report.json"));
  CHECK(rep.contains("config"));
}

TEST_CASE("table") {
  REQUIRE(run("table --generate independent --positions 3 --n 500 --seed 9 --out ind.csv").code == 0);
  auto r = run("table --observations ind.csv --iterations 3000");
  REQUIRE(r.code == 0);
  auto t = parse_csv(r.out);
  CHECK(t.header == std::vector<std::string>{"j", "j_prime", "mean", "q025", "q975"});
  CHECK(t.rows.size() == 3);
  for (const auto& row : t.rows) CHECK(std::stod(row[2]) < 0.15);

  write("single.csv", "pos_1\na\nc\na\n");
  r = run("table --observations single.csv --iterations 200");
  REQUIRE(r.code == 0);
  t = parse_csv(r.out);
  CHECK(t.rows.empty());

  write("malformed.csv", "pos_1,pos_2\na,c\nc\n");
  r = run("table --observations malformed.csv");
  CHECK(r.code != 0);
  CHECK(r.err.find("line 3") != std::string::npos);

  write("alpha.json", R"([["a", "c"], ["a"]])");
  CHECK(run("table --observations ind.csv --alphabets alpha.json").code != 0);
}

TEST_CASE("nb-generate, esf, yule") {
  auto r = run("nb-generate --draws 2000 --max-bin 10");
  REQUIRE(r.code == 0);
  const auto t = parse_csv(r.out);
  CHECK(t.rows.size() == 11);
  bool zero_note = false;
  for (const auto& c : t.comments) zero_note = zero_note || c.rfind("zero_fraction", 0) == 0;
  CHECK(zero_note);

  r = run("esf --partition '[[1, 3], [2, 1]]'");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["alpha"]["n"] == 5);
  CHECK(j["alpha"]["q025"].get<double>() < j["alpha"]["median"].get<double>());
  CHECK(run("esf --partition '[[1, -3]]'").code != 0);

  r = run("yule --counts 1,1,2,5");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  // the likelihood's own decay makes the mean finite even with b = 2
  CHECK(j["alpha"]["mean"].get<double>() > j["alpha"]["q025"].get<double>());
  CHECK(j["alpha"]["mean"].get<double>() < j["alpha"]["q975"].get<double>());
  CHECK(run("yule --counts 0").code != 0);
}
