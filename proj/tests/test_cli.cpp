#include <doctest.h>

#include "mpoc/cli.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace mpoc;
using Json = nlohmann::ordered_json;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
  std::vector<Json> records;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.exit_code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    r.records.push_back(Json::parse(line));
  }
  return r;
}

// Temporary file that cleans up after itself.
class TempFile {
 public:
  explicit TempFile(const std::string& contents, const char* suffix = ".json") {
    static int counter = 0;
    path_ = "/tmp/mpoc_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + suffix;
    std::ofstream f(path_);
    f << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Scoped environment variable override.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    const char* old = std::getenv(name);
    if (old != nullptr) {
      had_old_ = true;
      old_ = old;
    }
    if (value != nullptr)
      ::setenv(name, value, 1);
    else
      ::unsetenv(name);
  }
  ~EnvGuard() {
    if (had_old_)
      ::setenv(name_.c_str(), old_.c_str(), 1);
    else
      ::unsetenv(name_.c_str());
  }

 private:
  std::string name_;
  std::string old_;
  bool had_old_ = false;
};

const char* kQuadraticDoc = R"({
  "n": 2,
  "Q": [[2, 0], [0, 2]],
  "c": [-2, -4],
  "r": 0
})";

}  // namespace

TEST_CASE("classify reports the certificate and the verdict exit code") {
  SUBCASE("saddle origin: stationary, exit 0") {
    CliRun r = run({"classify", "--problem", "saddle", "--x", "0,0"});
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.records.size() == 1);
    const Json& rec = r.records[0];
    CHECK(rec["command"] == "classify");
    CHECK(rec["problem"] == "saddle");
    CHECK(rec["certificate"]["is_t_stationary"].get<bool>());
    CHECK(rec["report"]["t_index"].get<int>() == 1);
    CHECK(rec["report"]["classification"] == "NONDEGENERATE_SADDLE");
  }
  SUBCASE("non-stationary point: exit 2 with a null report") {
    CliRun r = run({"classify", "--problem", "saddle", "--x", "0.5,0"});
    CHECK(r.exit_code == 2);
    REQUIRE(r.records.size() == 1);
    CHECK_FALSE(r.records[0]["certificate"]["is_t_stationary"].get<bool>());
    CHECK(r.records[0]["report"].is_null());
  }
  SUBCASE("unknown problems list the catalog") {
    CliRun r = run({"classify", "--problem", "nonsense", "--x", "0,0"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("available") != std::string::npos);
  }
  SUBCASE("malformed point text is a usage error") {
    CliRun r = run({"classify", "--problem", "saddle", "--x", "0,zebra"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("zebra") != std::string::npos);
  }
}

TEST_CASE("classify accepts problem files") {
  SUBCASE("well-formed file") {
    TempFile file(R"({
      "n": 2,
      "quadratic_f": {"Q": [[2, 0], [0, 2]], "c": [2, -2], "r": 2},
      "coordinate_F1": [0],
      "coordinate_F2": [1]
    })");
    CliRun r = run({"classify", "--problem", file.path(), "--x", "-1,0"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.records[0]["problem"] == file.path());
    CHECK(r.records[0]["report"]["classification"] == "NONDEGENERATE_LOCAL_MIN");
  }
  SUBCASE("malformed file names the offending location") {
    TempFile file(R"({"n": 2, "quadratic_f": {"Q": [[1, 0]]}})");
    CliRun r = run({"classify", "--problem", file.path(), "--x", "0,0"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("problem file") != std::string::npos);
  }
}

TEST_CASE("regularize emits one iterate record per parameter, then the trace") {
  CliRun r = run({"regularize", "--problem", "saddle", "--x0", "-0.9,0.05"});
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.records.size() >= 3);

  double prev_t = 10.0;
  for (size_t i = 0; i + 1 < r.records.size(); ++i) {
    const Json& rec = r.records[i];
    CHECK(rec["command"] == "regularize");
    CHECK(rec["event"] == "iterate");
    const double t = rec["t"].get<double>();
    CHECK(t < prev_t);
    prev_t = t;
    CHECK(rec["point"]["converged"].get<bool>());
  }

  const Json& last = r.records.back();
  CHECK(last["event"] == "certificate");
  CHECK(last["trace"]["converged"].get<bool>());
  CHECK(last["trace"].contains("recovered_multipliers"));
  CHECK_FALSE(last["trace"].contains("iterates"));
  CHECK(last["trace"]["limit_point"][0].get<double>() == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("regularize requires a start specification") {
  CliRun r = run({"regularize", "--problem", "saddle"});
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("--x0 or --multistart") != std::string::npos);
}

TEST_CASE("multistart runs are deterministic for a fixed seed") {
  const std::vector<std::string> args = {"regularize", "--problem", "saddle",
                                         "--multistart", "4", "--seed", "7"};
  CliRun a = run(args);
  CliRun b = run(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  const Json& summary = a.records.back();
  CHECK(summary["event"] == "summary");
  CHECK(summary["starts"].get<int>() == 4);
  CHECK(summary["converged"].get<int>() == 4);
  CHECK(summary["seed"].get<long long>() == 7);

  // One multistart record per start, each with its own start point and trace.
  REQUIRE(a.records.size() == 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.records[i]["event"] == "multistart");
    CHECK(a.records[i]["index"].get<int>() == i);
    CHECK(a.records[i]["trace"]["converged"].get<bool>());
  }

  CliRun c = run({"regularize", "--problem", "saddle", "--multistart", "4",
                  "--seed", "8"});
  CHECK(c.out != a.out);  // a different seed draws different starts
}

TEST_CASE("MPOC_SEED overrides the seed flag") {
  SUBCASE("valid override") {
    CliRun direct = run({"regularize", "--problem", "saddle", "--multistart", "2",
                         "--seed", "777"});
    EnvGuard guard("MPOC_SEED", "777");
    CliRun via_env = run({"regularize", "--problem", "saddle", "--multistart", "2",
                          "--seed", "42"});
    CHECK(via_env.out == direct.out);
    CHECK(via_env.records.back()["seed"].get<long long>() == 777);
  }
  SUBCASE("garbage in the variable is an error") {
    EnvGuard guard("MPOC_SEED", "not_a_number");
    CliRun r = run({"regularize", "--problem", "saddle", "--multistart", "2"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("MPOC_SEED") != std::string::npos);
  }
  SUBCASE("empty variable falls back to the flag") {
    CliRun direct = run({"regularize", "--problem", "saddle", "--multistart", "2",
                         "--seed", "5"});
    EnvGuard guard("MPOC_SEED", "");
    CliRun r = run({"regularize", "--problem", "saddle", "--multistart", "2",
                    "--seed", "5"});
    CHECK(r.out == direct.out);
  }
}

TEST_CASE("scno evaluates all three stationarity notions") {
  TempFile objective(kQuadraticDoc);

  SUBCASE("M-stationary branch point: exit 0 with an audit") {
    CliRun r = run({"scno", "--f", objective.path(), "--s", "1", "--x", "1,0"});
    REQUIRE(r.exit_code == 0);
    const Json& rec = r.records[0];
    CHECK(rec["m_stationary"].get<bool>());
    CHECK(rec["t_stationary"].get<bool>());
    CHECK(rec["y"][1].get<double>() == 1.0);  // canonical completion
    CHECK(rec["audit"]["case"] == "CASE1");
  }
  SUBCASE("non-stationary x: exit 2 and no audit") {
    CliRun r = run({"scno", "--f", objective.path(), "--s", "1", "--x", "0.5,0"});
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.records[0]["t_stationary"].get<bool>());
    CHECK(r.records[0]["audit"].is_null());
  }
  SUBCASE("explicit y is honored") {
    CliRun r = run({"scno", "--f", objective.path(), "--s", "1", "--x", "0,0", "--y",
                    "1,0"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.records[0]["y"][0].get<double>() == 1.0);
    CHECK(r.records[0]["t_stationary"].get<bool>());
    CHECK_FALSE(r.records[0]["s_stationary"].get<bool>());
  }
  SUBCASE("dimension mismatches are reported") {
    CliRun r = run({"scno", "--f", objective.path(), "--s", "1", "--x", "1,0,0"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("dimension") != std::string::npos);
  }
}

TEST_CASE("landscape sweeps emit the report and optional files") {
  TempFile csv("", ".csv");
  TempFile svg("", ".svg");
  CliRun r = run({"landscape", "--problem", "saddle", "--box", "-2,2,-2,2", "--res",
                  "201", "--levels", "0.5:3.0:0.5", "--csv", csv.path(), "--svg",
                  svg.path()});
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.records.size() == 1);
  const Json& rec = r.records[0];
  CHECK(rec["command"] == "landscape");
  CHECK(rec["resolution"].get<int>() == 201);
  CHECK(rec["report"]["levels"].size() == 6);
  // Catalog entries supply their stationary values automatically.
  CHECK(rec["report"]["stationary_values"].size() == 3);

  std::ifstream csv_in(csv.path());
  std::string header;
  REQUIRE(std::getline(csv_in, header));
  CHECK(header == "level,betti0");
  int rows = 0;
  std::string line;
  while (std::getline(csv_in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);

  std::ifstream svg_in(svg.path());
  std::stringstream svg_text;
  svg_text << svg_in.rdbuf();
  CHECK(svg_text.str().find("<svg") != std::string::npos);
}

TEST_CASE("level ranges follow the lo:hi:step grammar") {
  SUBCASE("the default sweep has 57 levels") {
    CliRun r = run({"landscape", "--problem", "saddle", "--box", "-2,2,-2,2", "--res",
                    "101", "--levels", "0.2:3.0:0.05"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.records[0]["report"]["levels"].size() == 57);
  }
  SUBCASE("malformed ranges are rejected") {
    CliRun r = run({"landscape", "--problem", "saddle", "--box", "-2,2,-2,2",
                    "--levels", "3.0:0.2:0.05"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("lo <= hi") != std::string::npos);
  }
}

TEST_CASE("catalog lists the built-in problems") {
  CliRun r = run({"catalog"});
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.records.size() >= 3);
  bool saw_saddle = false;
  for (const Json& rec : r.records) {
    CHECK(rec["command"] == "catalog");
    if (rec["name"] == "saddle") {
      saw_saddle = true;
      CHECK(rec["n"].get<int>() == 2);
      CHECK(rec["pairs"].get<int>() == 1);
      CHECK(rec["stationary_points"].size() == 3);
    }
  }
  CHECK(saw_saddle);

  CliRun single = run({"catalog", "--name", "instability"});
  REQUIRE(single.exit_code == 0);
  REQUIRE(single.records.size() == 1);
  CHECK(single.records[0]["name"] == "instability");
}

TEST_CASE("the selftest fixture suite passes end to end") {
  CliRun r = run({"selftest"});
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.records.size() >= 2);
  const Json& summary = r.records.back();
  CHECK(summary["event"] == "summary");
  CHECK(summary["failed"].get<int>() == 0);
  CHECK(summary["total"].get<int>() == static_cast<int>(r.records.size()) - 1);
  for (size_t i = 0; i + 1 < r.records.size(); ++i) {
    CHECK(r.records[i]["passed"].get<bool>());
  }
}

TEST_CASE("usage errors do not reach the record stream") {
  CliRun r = run({"frobnicate"});
  CHECK(r.exit_code == 1);
  CHECK(r.records.empty());

  CliRun missing = run({"classify", "--problem", "saddle"});
  CHECK(missing.exit_code == 1);  // --x is required
}
