#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algebroid/cli.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace algebroid;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run adf(std::vector<std::string> args) {
  ::unsetenv("ADF_WINDOW");
  const auto cwd = fs::current_path();
  fs::current_path(ADF_SOURCE_DIR);
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  fs::current_path(cwd);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct GoldenCase {
  std::string name;
  int exit;
  std::vector<std::string> args;
};

std::vector<GoldenCase> golden_cases() {
  std::ifstream in(fs::path(ADF_SOURCE_DIR) / "tests" / "golden" / "cases.txt");
  std::vector<GoldenCase> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    auto words = split(line);
    out.push_back({words[0], std::stoi(words[1]), {words.begin() + 2, words.end()}});
  }
  return out;
}

fs::path golden_path(const std::string& name) { return fs::path(ADF_SOURCE_DIR) / "tests" / "golden" / (name + ".out"); }

}  // namespace

TEST_CASE("golden outputs are byte-identical") {
  const bool update = std::getenv("ADF_UPDATE_GOLDEN") != nullptr;
  const auto cases = golden_cases();
  REQUIRE(cases.size() == 12);
  for (const auto& g : cases) {
    CAPTURE(g.name);
    auto r = adf(g.args);
    CHECK(r.code == g.exit);
    const auto path = golden_path(g.name);
    if (update) {
      std::ofstream(path, std::ios::binary) << r.out;
      continue;
    }
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in, "missing golden file ", path.string());
    std::ostringstream want;
    want << in.rdbuf();
    CHECK(r.out == want.str());
  }
}

TEST_CASE("exit codes across the catalog") {
  const std::vector<std::pair<std::string, int>> cases = {
      {"verify catalog/heisenberg.adf H", 0},
      {"verify catalog/log.adf Lz", 0},
      {"verify catalog/poisson.adf S", 0},
      {"verify catalog/poisson.adf N", 1},
      {"verify catalog/monopole.adf U", 0},
      {"verify catalog/p1.adf A", 0},
      {"verify catalog/p1.adf E", 0},
      {"verify catalog/unclosed.adf B", 1},
      {"exact catalog/plane.adf closed1", 0},
      {"exact catalog/plane.adf w", 1},
      {"obstruction catalog/torus.adf C vol --window 8,12", 1},
      {"curvature catalog/torus.adf N", 0},
      {"flat catalog/torus.adf C", 0},
      {"flat catalog/torus.adf CA", 1},
      {"chern catalog/torus.adf CA --k 1", 0},
      {"chern catalog/torus.adf N --k 2", 0},
      {"matched catalog/matched.adf M", 0},
      {"twilled catalog/matched.adf P", 0},
      {"compare-total catalog/matched.adf M --degrees 0..2 --window 3,4", 0},
      {"relations catalog/unclosed.adf T B", 1},
      {"normal-form catalog/monopole.adf U dz*x^2*dx", 0},
      {"atiyah catalog/p1.adf --k 0", 0},
      {"atiyah catalog/p1.adf G", 0},
      {"class-compare catalog/p1.adf AL ZL", 0},
      {"class-compare catalog/p1.adf E A", 0},
      {"glue catalog/p1.adf P A", 0},
      {"lambda-check catalog/p1.adf G ZL D", 0},
      {"lambda-check catalog/p1.adf G AL D", 1},
      {"cohomology catalog/plane.adf L --window 3", 3},
      // usage and parse errors
      {"", 2},
      {"frobnicate catalog/p1.adf", 2},
      {"verify", 2},
      {"verify catalog/missing.adf", 2},
      {"verify catalog/p1.adf Nope", 2},
      {"cohomology catalog/plane.adf T --window 3,0", 2},
      {"cohomology catalog/plane.adf T --degrees 2..1", 2},
      {"chern catalog/torus.adf CA --k 3", 2},
      {"atiyah catalog/p1.adf --algebroid flat", 2},
      {"class-compare catalog/p1.adf A ZL", 2},
      {"normal-form catalog/monopole.adf U dz*q", 2},
      {"obstruction catalog/torus.adf CA vol", 2},
  };
  for (const auto& [cmd, code] : cases) {
    CAPTURE(cmd);
    auto r = adf(split(cmd));
    CHECK(r.code == code);
    if (code == 1) {
      const bool witnessed = r.out.find("witness") != std::string::npos || r.out.find("res = ") != std::string::npos;
      CHECK(witnessed);
    }
    if (code == 2) CHECK(!r.err.empty());
  }
}

TEST_CASE("parse errors give exit 2 with located diagnostics") {
  std::ostringstream out, err;
  int code = cli::run_text({"verify"}, "bad.adf", "ring R = poly(Q; x);\nalgebroid L over R {\n  basis e1;\n", out, err);
  CHECK(code == cli::usage);
  CHECK(err.str().find("bad.adf:4:1: error: unbalanced '{'") == 0);

  std::ostringstream jout, jerr;
  code = cli::run_text({"verify", "--json"}, "bad.adf",
                       "ring R = poly(Q; x);\nalgebroid L over R { basis e1, e2; anchor e1 -> 0, e2 -> 0; bracket [e2, e2] "
                       "= e1; }\n",
                       jout, jerr);
  CHECK(code == cli::usage);
  auto j = nlohmann::json::parse(jout.str());
  CHECK(j["status"] == "error");
  REQUIRE(j["diagnostics"].size() == 1);
  CHECK(j["diagnostics"][0]["line"] == 2);
  CHECK(j["diagnostics"][0]["message"] == "bracket of equal basis elements must be zero");
}

TEST_CASE("json: rationals as num/den, forms keyed by 1-based index tuples") {
  auto r = adf(split("exact catalog/plane.adf theta --json"));
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "verified");
  // primitive 1/2 x^2 e2^
  CHECK(j["primitive"]["degree"] == 1);
  CHECK(j["primitive"]["coefficients"]["2"]["2,0"] == "1/2");

  auto c = adf(split("class-compare catalog/p1.adf A Z --json"));
  CHECK(c.code == 1);
  auto k = nlohmann::json::parse(c.out);
  CHECK(k["status"] == "refuted");
  CHECK(k["residue"] == "res = 1");
}

TEST_CASE("identical input gives identical output") {
  for (const char* cmd : {"twilled catalog/matched.adf M --json", "relations catalog/monopole.adf T B",
                          "compare-total catalog/matched.adf P --window 3,4"}) {
    auto a = adf(split(cmd));
    auto b = adf(split(cmd));
    CHECK(a.out == b.out);
    CHECK(a.code == b.code);
  }
}

TEST_CASE("ADF_WINDOW sets the default window") {
  const auto cwd = fs::current_path();
  fs::current_path(ADF_SOURCE_DIR);
  ::setenv("ADF_WINDOW", "3,4", 1);
  std::ostringstream out, err;
  int code = cli::run(split("cohomology catalog/plane.adf T --json"), out, err);
  ::unsetenv("ADF_WINDOW");
  fs::current_path(cwd);
  CHECK(code == 0);
  CHECK(nlohmann::json::parse(out.str())["window"] == "D=3,W=4");
}
