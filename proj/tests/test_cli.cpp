#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FRACLAP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  auto p = fs::temp_directory_path() / "fraclap-cli-test";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("solve --mesh interval:8 --s 1.5 --f cospix") == 2);
  CHECK(run("solve --mesh interval:8 --s 0 --f cospix") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("eig --mesh interval:8 --s 0.5 --k zero") == 2);
}

TEST_CASE("domain errors exit with 1") {
  const auto dir = scratch();
  const std::string out = " --out " + (dir / "u.csv").string();
  CHECK(run("solve --mesh interval:0 --s 0.5 --f cospix" + out) == 1);
  CHECK(run("solve --mesh interval:8 --s 0.5 --f nosuch" + out) == 1);
  CHECK(run("solve --mesh square:2 --s 0.5 --f file:/nonexistent" + out) == 1);
  CHECK(run("pv --mesh interval:8 --s 0.5 --phi quadratic --at 0") == 1);
  CHECK_FALSE(fs::exists(dir / "u.csv"));
  // a malformed config is a usage error
  std::ofstream(dir / "bad.json") << "{\"s_grid\": [0.5], \"checks\": [\"nope\"]}";
  CHECK(run("sweep --config " + (dir / "bad.json").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("solve writes one row per vertex") {
  const auto dir = scratch();
  const auto out = dir / "u.csv";
  REQUIRE(run("solve --mesh interval:64 --s 0.5 --f cospix --derivative --out " + out.string()) == 0);
  const std::string csv = slurp(out);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 66);
  CHECK(csv.rfind("vertex,x,u,w\r\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("other subcommands") {
  const auto dir = scratch();
  CHECK(run("--threads 2 assemble --mesh square:2 --s 0.5 --weight log --out " + (dir / "a.mtx").string()) == 0);
  CHECK(slurp(dir / "a.mtx").rfind("%%MatrixMarket", 0) == 0);
  CHECK(run("eig --mesh square:2 --s 0.5 --k 2") == 0);
  CHECK(run("dlambda --mesh interval:16 --s 0.4 --sigma-ladder 0.1,0.01") == 0);
  CHECK(run("pv --mesh interval:16 --s 0.5 --phi quadratic --at 0.5") == 0);
  std::ofstream(dir / "ok.json") << "{\"mesh\": \"interval:8\", \"s_grid\": [0.4, 0.5], \"checks\": [\"poincare\"], \"probes\": 5}";
  CHECK(run("sweep --config " + (dir / "ok.json").string() + " --out " + (dir / "sw").string()) == 0);
  CHECK(fs::exists(dir / "sw" / "poincare.csv"));
  CHECK(fs::exists(dir / "sw" / "manifest.json"));
  fs::remove_all(dir);
}
