#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "vg/config.hpp"
#include "vg/dispatch.hpp"

namespace fs = std::filesystem;
using namespace vg;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("vgs_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string error_of(const std::string& command, const std::map<std::string, std::string>& flags,
                     const std::optional<fs::path>& file = std::nullopt) {
  try {
    parse_config(command, flags, file);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "vgs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults resolve every key") {
    const RunConfig c = parse_config("solve", {});
    CHECK(c.command == "solve");
    CHECK(c.model.is_classical());
    CHECK(c.p == 2.0);
    for (const auto& k : config_keys()) CHECK(c.resolved.count(k.key) == 1);
    CHECK(c.resolved.at("model.c") == "inf");
  }

  TEST_CASE("inf token and finite c") {
    CHECK(std::isinf(parse_config("solve", {{"model.c", "inf"}}).model.c));
    CHECK(parse_config("solve", {{"model.c", "1.5"}}).model.c == 1.5);
    CHECK(error_of("solve", {{"model.c", "abc"}}).find("model.c") != std::string::npos);
    CHECK_FALSE(error_of("solve", {{"model.c", "-1"}}).empty());
  }

  TEST_CASE("flags override the file, the file overrides defaults") {
    const fs::path dir = scratch_dir("precedence");
    {
      std::ofstream out(dir / "run.cfg");
      out << "# comment\n\ncasimir.p = 2\ntargets.m1 = 3\n";
    }
    const RunConfig from_file = parse_config("solve", {}, dir / "run.cfg");
    CHECK(from_file.p == 2.0);
    CHECK(from_file.m1 == 3.0);
    const RunConfig both = parse_config("solve", {{"casimir.p", "3"}}, dir / "run.cfg");
    CHECK(both.p == 3.0);
    CHECK(both.m1 == 3.0);
    CHECK(both.resolved.at("casimir.p") == "3");

    const char* argv[] = {"vgs", "solve", "--config", nullptr, "--p", "3"};
    const std::string cfg = (dir / "run.cfg").string();
    argv[3] = cfg.c_str();
    CHECK(parse_config(6, argv).p == 3.0);
  }

  TEST_CASE("unknown keys are rejected with their location") {
    const fs::path dir = scratch_dir("unknown");
    {
      std::ofstream out(dir / "bad.cfg");
      out << "casimir.p = 2\ncasimir.q = 4\n";
    }
    const std::string msg = error_of("solve", {}, dir / "bad.cfg");
    CHECK(msg.find("casimir.q") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
    CHECK(error_of("solve", {{"casimir.q", "4"}}).find("casimir.q") != std::string::npos);

    const char* argv[] = {"vgs", "solve", "--bogus", "1"};
    CHECK_THROWS_AS(parse_config(4, argv), ConfigError);
    const char* argv2[] = {"vgs", "nonsense"};
    CHECK_THROWS_AS(parse_config(2, argv2), ConfigError);
  }

  TEST_CASE("precondition messages name key, value and condition") {
    const std::string msg = error_of("solve", {{"casimir.p", "1.2"}});
    CHECK(msg.find("casimir.p") != std::string::npos);
    CHECK(msg.find("1.2") != std::string::npos);
    CHECK(msg.find("p > 3/2") != std::string::npos);
    CHECK_FALSE(error_of("solve", {{"grids.n", "abc"}}).empty());
    CHECK_FALSE(error_of("solve", {{"grids.n", "10"}}).empty());
    CHECK_FALSE(error_of("solve", {{"targets.m1", "-1"}}).empty());
    CHECK_FALSE(error_of("bootstrap", {{"bootstrap.q0", "1.6"}}).empty());
  }

  TEST_CASE("required keys per command") {
    CHECK(error_of("verify", {}).find("verify.input") != std::string::npos);
    CHECK_FALSE(error_of("scan", {}).empty());
    CHECK_FALSE(error_of("scan", {{"scan.from", "-2"}}).empty());
    CHECK_NOTHROW(parse_config("scan", {{"scan.from", "-2"}, {"scan.to", "-0.5"}}));
  }

  TEST_CASE("delta list and families parse") {
    const RunConfig c = parse_config("stability", {{"dynamics.delta", "0.05,0.1"}, {"kj.families", "box,gaussian"}});
    CHECK(c.delta == std::vector<double>{0.05, 0.1});
    CHECK(c.kj_families.size() == 2);
    CHECK_FALSE(error_of("stability", {{"dynamics.delta", "0.05,x"}}).empty());
  }

  TEST_CASE("exit codes") {
    const fs::path dir = scratch_dir("exit");
    CHECK(run({"solve", "--n", "512", "--out", (dir / "ok").string()}) == kExitOk);
    CHECK(summary(dir / "ok")["status"] == "ok");
    CHECK(run({"solve", "--p", "1.2", "--out", (dir / "cfg").string()}) == kExitConfig);
    CHECK(run({"solve", "--tol", "1e-17", "--n", "512", "--out", (dir / "num").string()}) == kExitNumerical);
    const auto s = summary(dir / "num");
    CHECK(s["status"] == "numerical_failure");
    CHECK(s["exit_code"] == 1);
    CHECK(s.contains("error"));
  }

  TEST_CASE("solve then verify") {
    const fs::path dir = scratch_dir("verify");
    CHECK(dispatch(parse_config("solve", {{"grids.n", "1024"}, {"output.directory", (dir / "solve").string()}})) ==
          kExitOk);
    CHECK(fs::exists(dir / "solve" / "profiles" / "phi.csv"));
    CHECK(fs::exists(dir / "solve" / "profiles" / "rho.csv"));
    CHECK(dispatch(parse_config("verify", {{"verify.input", (dir / "solve").string()},
                                           {"output.directory", (dir / "verify").string()}})) == kExitOk);
    const auto ids = summary(dir / "verify")["result"]["identities"];
    for (const char* key : {"virial", "mf", "el1", "el2", "muj", "lambda", "inegatif", "potential_routes", "max_abs"})
      CHECK_MESSAGE(ids.contains(key), key);
    CHECK(ids["max_abs"].get<double>() < 1e-4);

    // verify refuses a directory that holds no successful solve
    CHECK(dispatch(parse_config("verify", {{"verify.input", (dir / "verify").string()},
                                           {"output.directory", (dir / "verify2").string()}})) == kExitConfig);
  }

  TEST_CASE("scan writes one row per step") {
    const fs::path dir = scratch_dir("scan");
    CHECK(dispatch(parse_config("scan", {{"scan.param", "mu"},
                                         {"scan.from", "-2"},
                                         {"scan.to", "-0.5"},
                                         {"scan.steps", "16"},
                                         {"grids.n", "512"},
                                         {"output.directory", dir.string()}})) == kExitOk);
    CHECK(line_count(dir / "profiles" / "scan.csv") == 17);
  }

  TEST_CASE("reruns are byte identical") {
    const fs::path dir = scratch_dir("repro");
    const RunConfig c = parse_config("evolve", {{"grids.n", "512"},
                                                {"dynamics.n_particles", "2000"},
                                                {"dynamics.t_end", "1"},
                                                {"dynamics.seed", "7"},
                                                {"output.directory", dir.string()}});
    REQUIRE(dispatch(c) == kExitOk);
    const std::string s1 = slurp(dir / "summary.json"), d1 = slurp(dir / "diagnostics.csv");
    REQUIRE(dispatch(c) == kExitOk);
    CHECK(slurp(dir / "summary.json") == s1);
    CHECK(slurp(dir / "diagnostics.csv") == d1);
    CHECK(summary(dir)["seed"] == 7);
  }
}
