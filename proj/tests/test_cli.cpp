// Runs the command-line tool as a subprocess: golden outputs, manifests and
// exit codes. SMDP_UPDATE_GOLDEN=1 rewrites the golden files.
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = SMDP_CLI_PATH;
const fs::path kSource = SMDP_SOURCE_DIR;

constexpr double kGoldenRelTol = 1e-9;

struct Run {
  int exit_code = -1;
  std::string err;
  fs::path out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("smdp_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& args, const std::string& name, const std::string& env = "") {
  Run r;
  r.out = scratch(name);
  const fs::path err = r.out / "stderr.txt";
  const std::string cmd = env + " " + kCli.string() + " " + args + " --out " + r.out.string() + " > " +
                          (r.out / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string config(const std::string& name) { return "--config " + (kSource / "configs" / name).string(); }

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch("configs") / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

bool numeric(const std::string& s, double& x) {
  char* end = nullptr;
  x = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

// Cell-by-cell comparison; numbers within a relative tolerance.
void compare_csv(const std::string& actual, const fs::path& golden) {
  if (const char* update = std::getenv("SMDP_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    std::ofstream(golden) << actual;
    return;
  }
  REQUIRE(fs::exists(golden));
  std::istringstream a(actual);
  std::istringstream g(slurp(golden));
  std::string la;
  std::string lg;
  int line = 0;
  while (true) {
    const bool ha = static_cast<bool>(std::getline(a, la));
    const bool hg = static_cast<bool>(std::getline(g, lg));
    REQUIRE(ha == hg);
    if (!ha) break;
    ++line;
    const auto ca = split(la, ',');
    const auto cg = split(lg, ',');
    REQUIRE(ca.size() == cg.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
      double x = 0;
      double y = 0;
      if (numeric(ca[i], x) && numeric(cg[i], y)) {
        INFO("line " << line << " column " << i);
        CHECK(std::abs(x - y) <= kGoldenRelTol * std::max(1.0, std::abs(y)));
      } else {
        INFO("line " << line << " column " << i);
        CHECK(ca[i] == cg[i]);
      }
    }
  }
}

}  // namespace

TEST_CASE("solve matches the golden table and writes a manifest") {
  const auto r = run("solve " + config("fig3_low_exponential.json") + " --threads 1", "solve");
  REQUIRE(r.exit_code == 0);
  compare_csv(slurp(r.out / "solve.csv"), kSource / "tests/golden/fig3_low_exponential.solve.csv");

  const auto manifest = json::parse(slurp(r.out / "manifest.json"));
  CHECK(manifest["command"] == "solve");
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["tool_version"].get<std::string>().size() > 0);
  CHECK(manifest["duration_seconds"].get<double>() >= 0.0);
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest["thresholds"].contains("all"));
  const auto doc = json::parse(slurp(r.out / "solve.json"));
  CHECK(doc["config_hash"] == manifest["config_hash"]);
  CHECK(slurp(r.out / "stdout.txt").find("solve: all threshold") != std::string::npos);
}

TEST_CASE("sweep matches the golden table regardless of threads") {
  const auto one = run("sweep " + config("sweep_b10.json") + " --threads 1", "sweep1");
  const auto four = run("sweep " + config("sweep_b10.json"), "sweep4", "SMDP_THREADS=4");
  REQUIRE(one.exit_code == 0);
  REQUIRE(four.exit_code == 0);
  CHECK(slurp(one.out / "sweep.csv") == slurp(four.out / "sweep.csv"));
  compare_csv(slurp(one.out / "sweep.csv"), kSource / "tests/golden/sweep_b10.sweep.csv");
}

TEST_CASE("overrides change the config hash") {
  const auto base = run("solve " + config("equal_actions.json"), "base");
  const auto tuned = run("solve " + config("equal_actions.json") + " --gamma 0.1", "tuned");
  REQUIRE(base.exit_code == 0);
  REQUIRE(tuned.exit_code == 0);
  const auto h1 = json::parse(slurp(base.out / "manifest.json"))["config_hash"];
  const auto h2 = json::parse(slurp(tuned.out / "manifest.json"))["config_hash"];
  CHECK(h1 != h2);
  CHECK(slurp(tuned.out / "solve.csv").rfind("# config_hash=" + h2.get<std::string>(), 0) == 0);
}

TEST_CASE("exit codes") {
  SUBCASE("malformed JSON") {
    const auto p = write_config("broken.json", "{\n  \"schema\": 1,\n  \"lambda\": 9,,\n}\n");
    const auto r = run("solve --config " + p.string(), "broken");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("unknown field") {
    const auto p = write_config("unknown.json",
                                R"({"schema": 1, "lambda": 9, "buffer_size": 10, "lambada": 1,
  "action_a": {"mu": 9, "p": 0.25}, "action_b": {"mu": 12, "p": 0.42}})");
    const auto r = run("check --config " + p.string(), "unknown");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("/lambada") != std::string::npos);
  }
  SUBCASE("validation error") {
    const auto p = write_config("rates.json", R"({"schema": 1, "lambda": 9, "buffer_size": 10,
  "action_a": {"mu": 12, "p": 0.25}, "action_b": {"mu": 9, "p": 0.42}})");
    CHECK(run("solve --config " + p.string(), "rates").exit_code == 3);
  }
  SUBCASE("missing file") { CHECK(run("solve --config /nonexistent.json", "missing").exit_code == 3); }
  SUBCASE("proven property fails") {
    const auto r = run("check " + config("forced_violation.json"), "violation");
    CHECK(r.exit_code == 1);
    const auto manifest = json::parse(slurp(r.out / "manifest.json"));
    CHECK(manifest["status"] == "structural check failed");
    CHECK(slurp(r.out / "check.csv").find("concave,V,0,1;2;3") != std::string::npos);
  }
  SUBCASE("iteration cap") {
    const auto p = write_config("cap.json", R"({"schema": 1, "lambda": 9, "buffer_size": 10,
  "action_a": {"mu": 9, "p": 0.25}, "action_b": {"mu": 12, "p": 0.42}, "solver": {"max_iter": 3}})");
    const auto r = run("solve --config " + p.string(), "cap");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("3 sweeps") != std::string::npos);
  }
  SUBCASE("passing check") { CHECK(run("check " + config("fig3_high_exponential.json"), "pass").exit_code == 0); }
}
