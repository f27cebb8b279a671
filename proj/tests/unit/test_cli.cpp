#include <doctest.h>

#include <filesystem>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "magfiber/cli.hpp"
#include "magfiber/io.hpp"

using namespace magfiber;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("magfiber_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"theta0", "--no-such-flag"}).code == kExitUsage);
  CHECK(run({"check", "--suite", "other"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("invalid parameters exit 1 with the offending name") {
  const auto r = run({"beta", "--a", "0", "--out", scratch("bad").string()});
  CHECK(r.code == kExitError);
  CHECK(r.err.find("a") != std::string::npos);
  CHECK(run({"theta0", "--config", "/nonexistent/cfg.txt"}).code == kExitError);
}

TEST_CASE("theta0 writes a manifest that reproduces the run") {
  const auto dir = scratch("theta0");
  const auto first = run({"theta0", "--out", dir.string()});
  REQUIRE(first.code == kExitOk);
  const auto manifest = dir / "manifest.json";
  REQUIRE(fs::exists(manifest));
  const auto doc = json::parse(read_file(manifest));
  CHECK(doc.at("subcommand") == "theta0");
  const double v1 = doc.at("results").at("theta0").get<double>();
  CHECK(v1 > 0.5);
  CHECK(v1 < 1.0);

  fs::copy_file(manifest, dir.string() + ".json", fs::copy_options::overwrite_existing);
  const auto second = run({"theta0", "--manifest", dir.string() + ".json"});
  REQUIRE(second.code == kExitOk);
  const auto doc2 = json::parse(read_file(manifest));
  CHECK(doc2.at("results").at("theta0").get<double>() == v1);
  CHECK(doc2.at("inputs").size() == 1);
  fs::remove(dir.string() + ".json");
  fs::remove_all(dir);
}

TEST_CASE("lambda writes its report and sigma curve") {
  const auto dir = scratch("lambda");
  const auto r = run({"lambda", "--alpha", "90", "--gamma", "0", "--a", "-0.5", "--degrees", "--spacing", "0.1",
                      "--L1", "20", "--L2", "12", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "sigma_curve.csv"));
  const auto rep = json::parse(read_file(dir / "report.json"));
  for (const char* key : {"lambda", "tau_star", "classification", "beta_a", "zeta_nu0", "bound_rhs", "bound_margin",
                          "tolerances", "grid", "versions"})
    CHECK(rep.contains(key));
  CHECK(rep.at("tau_star").get<double>() == 0.0);
  const auto curve = parse_csv(read_file(dir / "sigma_curve.csv"));
  CHECK(curve.header == std::vector<std::string>{"tau", "sigma", "sigma_ess"});
  CHECK(curve.rows.size() >= 3);
  fs::remove_all(dir);
}

TEST_CASE("sweep grids") {
  RunConfig cfg;
  cfg.alpha = {1.0, 1.0, 2.0};
  cfg.gamma = {0.5};
  cfg.a = {-0.5, 0.5};
  int dups = 0;
  const auto cells = sweep_cells(cfg, &dups);
  CHECK(cells.size() == 4);
  CHECK(dups == 2);
  CHECK(cells.front().alpha == 1.0);
  CHECK(cells.front().a == -0.5);

  const auto empty = run({"sweep", "--out", scratch("sweep").string()});
  CHECK(empty.code == kExitError);
}

TEST_CASE("band1d writes a reloadable table") {
  const auto dir = scratch("band");
  const auto r = run({"band1d", "--a", "-0.5", "--xi-min", "-4", "--xi-max", "4", "--xi-steps", "32", "--out",
                      dir.string()});
  REQUIRE(r.code == kExitOk);
  const auto t = parse_csv(read_file(dir / "band1d.csv"));
  CHECK(t.rows.size() == 33);
  fs::remove_all(dir);
}

TEST_CASE("subcommand list") {
  const auto& s = subcommands();
  CHECK(s.size() == 10);
  CHECK(std::find(s.begin(), s.end(), "sigma-ess") != s.end());
}
