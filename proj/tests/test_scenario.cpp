#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "error.hpp"
#include "scenario.hpp"

using namespace adiasim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFermiJson = R"json({
  "system": "fermi_ulam",
  "profile": "2 + 0.5*sin(tau)",
  "eps": 0.01,
  "horizon": 0.5,
  "initial": {"x": 1.0, "v": 1.5707963267948966}
})json";

fs::path temp_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / "adiasim_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST_CASE("minimal config loads with defaults") {
  const ScenarioConfig cfg = load_config_json(kFermiJson);
  CHECK(cfg.system == SystemKind::fermi_ulam);
  CHECK(cfg.eps == 0.01);
  CHECK(cfg.horizon == 0.5);
  CHECK(cfg.sample_points == 10000);
  CHECK(cfg.sample_stride == 1);
  CHECK(cfg.metrics.empty());
  CHECK(cfg.fermi.x == 1.0);
}

TEST_CASE("config validation errors") {
  // eps out of range
  CHECK_THROWS_WITH_AS(
      load_config_json(R"json({"system":"fermi_ulam","profile":"1","eps":0.9,
                           "initial":{"x":0.5,"v":1.0}})json"),
      doctest::Contains("eps out of range"), Error);
  // missing profile
  CHECK_THROWS_WITH_AS(
      load_config_json(R"json({"system":"fermi_ulam","eps":0.1,"initial":{"x":0.5,"v":1.0}})json"),
      doctest::Contains("profile"), Error);
  // unknown key (strict mode)
  CHECK_THROWS_WITH_AS(
      load_config_json(R"json({"system":"fermi_ulam","profile":"1","eps":0.1,"bogus":1,
                           "initial":{"x":0.5,"v":1.0}})json"),
      doctest::Contains("bogus"), Error);
  // unknown key inside initial
  CHECK_THROWS_AS(
      load_config_json(R"json({"system":"fermi_ulam","profile":"1","eps":0.1,
                           "initial":{"x":0.5,"v":1.0,"q":2}})json"),
      Error);
  // piston must not carry a profile
  CHECK_THROWS_AS(
      load_config_json(R"json({"system":"piston","profile":"1","eps":0.1,
                           "initial":{"L":2,"X":1,"particles":[{"side":"left","x":0.5,"p":1}]}})json"),
      Error);
  // malformed JSON
  CHECK_THROWS_AS(load_config_json("{not json"), Error);
  // non-unit ray direction
  CHECK_THROWS_WITH_AS(
      load_config_json(R"json({"system":"waveguide","profile":"1","eps":0.1,
                           "initial":{"x":0,"y":0.5,"px":1.0,"py":1.0}})json"),
      doctest::Contains("unit length"), Error);
  // particle on the wrong side
  CHECK_THROWS_AS(
      load_config_json(R"json({"system":"piston","eps":0.1,
                           "initial":{"L":2,"X":1,"particles":[{"side":"left","x":1.5,"p":1}]}})json"),
      Error);
  // P and P_check together
  CHECK_THROWS_AS(
      load_config_json(R"json({"system":"piston","eps":0.1,
                           "initial":{"L":2,"X":1,"P":1,"P_check":0.1,
                                      "particles":[{"side":"left","x":0.5,"p":1}]}})json"),
      Error);
}

TEST_CASE("piston initial builders") {
  const ScenarioConfig cfg = load_config_json(R"json({
    "system":"piston","eps":0.1,
    "initial":{"L":2,"X":1,"P_check":0.4,
               "particles":[{"side":"left","x":0.5,"p":1}],
               "random":{"left":2,"right":3,"p_min":0.5,"p_max":1.5}}})json");
  const PistonSystem a = make_piston_system(cfg, 0.1, 42);
  CHECK(a.P == doctest::Approx(4.0)); // P_check / eps
  CHECK(a.particles.size() == 6);
  int left = 0, right = 0;
  for (const PistonParticle& q : a.particles) {
    if (q.side == Side::left) {
      ++left;
      CHECK(q.x >= 0.0);
      CHECK(q.x <= a.X);
    } else {
      ++right;
      CHECK(q.x >= a.X);
      CHECK(q.x <= a.L);
    }
    CHECK(std::abs(q.p) >= 0.5);
    CHECK(std::abs(q.p) <= 1.5);
  }
  CHECK(left == 3);
  CHECK(right == 3);

  // Same seed reproduces, different seed varies.
  const PistonSystem b = make_piston_system(cfg, 0.1, 42);
  const PistonSystem c = make_piston_system(cfg, 0.1, 43);
  CHECK(a.particles[3].x == b.particles[3].x);
  CHECK(a.particles[3].x != c.particles[3].x);
}

TEST_CASE("simulate command writes deterministic artifacts") {
  const ScenarioConfig cfg = load_config_json(kFermiJson);
  const fs::path d1 = temp_dir("sim1");
  const fs::path d2 = temp_dir("sim2");
  const RunReport r1 = run_command(cfg, "simulate", d1.string(), 1, 0);
  const RunReport r2 = run_command(cfg, "simulate", d2.string(), 1, 0);

  CHECK(r1.summary == r2.summary);
  CHECK(r1.json == r2.json);
  CHECK(slurp((d1 / "series.csv").string()) == slurp((d2 / "series.csv").string()));
  CHECK(slurp((d1 / "events.csv").string()) == slurp((d2 / "events.csv").string()));
  CHECK(slurp((d1 / "report.json").string()) == r1.json);

  const std::string head = slurp((d1 / "series.csv").string()).substr(0, 22);
  CHECK(head == "t,x,v,I,I_hat,E,phi\n0,");
}

TEST_CASE("sweep command emits report and per-eps series") {
  ScenarioConfig cfg = load_config_json(kFermiJson);
  cfg.eps_grid = {0.03, 0.015, 0.006, 0.003};
  cfg.sample_points = 500;
  const fs::path dir = temp_dir("sweep");
  const RunReport rep = run_command(cfg, "sweep", dir.string(), 2, 0);
  CHECK(rep.summary.find("sweep fermi_ulam") == 0);
  CHECK(rep.summary.find("all_pass=true") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "eps_0.003" / "series.csv"));
  CHECK(rep.json.find("\"raw_action_dev\"") != std::string::npos);
  CHECK(rep.json.find("\"slope\"") != std::string::npos);
}

TEST_CASE("classify command") {
  const ScenarioConfig cfg = load_config_json(R"json({
    "system":"waveguide",
    "profile":"2 - 0.5*exp(-(tau-3)^2) - 0.5*exp(-(tau+3)^2)",
    "eps":0.02, "horizon":8.0,
    "initial":{"x":0,"y":1.0,"px":0.5035067496485706,"py":0.8639912922352468}})json");
  const fs::path dir = temp_dir("classify");
  const RunReport rep = run_command(cfg, "classify", dir.string(), 1, 0);
  CHECK(rep.summary.find("case=resonator") != std::string::npos);
  CHECK(rep.json.find("\"resonator\"") != std::string::npos);
  CHECK(rep.json.find("\"humps\"") != std::string::npos);
}

TEST_CASE("compare-effective command") {
  const ScenarioConfig cfg = load_config_json(R"json({
    "system":"piston","eps":0.05,"horizon":1.0,"sample_points":1000,
    "initial":{"L":2,"X":0.9,
               "particles":[{"side":"left","x":0.37,"p":1.0},
                            {"side":"right","x":1.61,"p":-1.31}]}})json");
  const fs::path dir = temp_dir("cmp");
  const RunReport rep = run_command(cfg, "compare-effective", dir.string(), 1, 0);
  CHECK(fs::exists(dir / "compare.csv"));
  CHECK(rep.summary.find("sup_dev=") != std::string::npos);
  const std::string head = slurp((dir / "compare.csv").string()).substr(0, 23);
  CHECK(head == "t,X_exact,X_effective\n0");
}

TEST_CASE("unknown command is rejected") {
  const ScenarioConfig cfg = load_config_json(kFermiJson);
  CHECK_THROWS_AS(run_command(cfg, "frobnicate", temp_dir("bad").string(), 1, 0), Error);
}
