#include "effdim/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace effdim;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "effdim_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_json(const fs::path &dir, const json &doc) {
  const auto p = dir / "config.json";
  std::ofstream(p) << doc.dump();
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args, std::string *err = nullptr) {
  args.insert(args.begin(), "effdim_lab");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), e);
  if (err) *err = e.str();
  return code;
}

const json kTails = {{"p", {1, 2}}, {"t", {1.0, 2.0}}, {"n_mc", 20000}};

} // namespace

TEST_CASE("cli: every subcommand is registered") {
  CHECK(cli_commands() ==
        std::vector<std::string>{"approx", "cover", "gaussian-check", "tails", "effdim", "mle", "rates", "schedule"});
}

TEST_CASE("cli: success writes csv and config echo") {
  const auto dir = scratch("ok");
  const auto cfg = write_json(dir, kTails);
  CHECK(run({"tails", "--config", cfg.string(), "--out", (dir / "out").string(), "--emit-gnuplot"}) == kExitOk);
  const std::string csv = slurp(dir / "out" / "tails.csv");
  CHECK(csv.rfind("p,t,mc_prob", 0) == 0);
  CHECK(fs::exists(dir / "out" / "tails.gp"));
  const json echo = json::parse(slurp(dir / "out" / "tails.config.json"));
  CHECK(echo["command"] == "tails");
  CHECK(echo["seed"] == 1);
  CHECK(echo["n_mc"] == 20000);
}

TEST_CASE("cli: config errors exit 2") {
  const auto dir = scratch("config");
  std::string err;
  json bad = kTails;
  bad["typo"] = 1;
  CHECK(run({"tails", "--config", write_json(dir, bad).string(), "--out", dir.string()}, &err) == kExitConfig);
  CHECK(err.find("unknown key \"typo\"") != std::string::npos);

  bad = kTails;
  bad["n_mc"] = -3;
  CHECK(run({"tails", "--config", write_json(dir, bad).string(), "--out", dir.string()}) == kExitConfig);

  CHECK(run({"tails", "--config", write_json(dir, kTails).string()}) == kExitConfig); // no output path
  CHECK(run({"tails", "--config", (dir / "missing.json").string(), "--out", dir.string()}) == kExitConfig);

  std::ofstream(dir / "broken.json") << "{\"p\": [1,";
  CHECK(run({"tails", "--config", (dir / "broken.json").string(), "--out", dir.string()}) == kExitConfig);

  CHECK(run({"schedule", "--config", write_json(dir, kTails).string(), "--out", dir.string()}) == kExitConfig);
  CHECK(run({"nonsense"}) == kExitConfig);
  CHECK(run({"tails", "--config", write_json(dir, kTails).string(), "--threads", "0"}) == kExitConfig);
  CHECK(run({"--help"}) == kExitOk);
}

TEST_CASE("cli: runtime errors exit 1") {
  const auto dir = scratch("runtime");
  // R^2 <= p leaves the outside bound undefined
  const json cfg = {{"profile", {{"decay", "exp"}, {"mu", 1.0}, {"theta", 0.2}, {"d", 6}}},
                    {"R", {1.0}},
                    {"r", 0.1},
                    {"n_mc", 1000}};
  std::string err;
  CHECK(run({"gaussian-check", "--config", write_json(dir, cfg).string(), "--out", dir.string()}, &err) ==
        kExitRuntime);
  CHECK(err.find("R^2 > p") != std::string::npos);
}

TEST_CASE("cli: seed override and echo round trip") {
  const auto dir = scratch("echo");
  const auto cfg = write_json(dir, kTails);
  REQUIRE(run({"tails", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "42"}) == kExitOk);
  const json echo = json::parse(slurp(dir / "a" / "tails.config.json"));
  CHECK(echo["seed"] == 42);
  // the echo alone reproduces the run
  json again = echo;
  again["output_path"] = (dir / "b").string();
  REQUIRE(run({"tails", "--config", write_json(dir, again).string()}) == kExitOk);
  CHECK(slurp(dir / "a" / "tails.csv") == slurp(dir / "b" / "tails.csv"));
  REQUIRE(run({"tails", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "43"}) == kExitOk);
  CHECK(slurp(dir / "a" / "tails.csv") != slurp(dir / "c" / "tails.csv"));
}
