#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "efk/errors.hpp"
#include "efk/io.hpp"
#include "efk/strip.hpp"

using namespace efk;
using namespace efk::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "efk_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& cmd, const std::string& text, const fs::path& out) {
  std::ostringstream log;
  return run_command(cmd, Config::parse(text), out, log);
}

nlohmann::json manifest(const fs::path& out) { return nlohmann::json::parse(read_file(out / "manifest.json")); }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = Config::parse("# comment\nbeta = sqrt(8)  # trailing\nbetas = 2, 3,4\nname = cubic\n");
  CHECK(c.require_number("beta") == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
  CHECK(c.get_numbers("betas") == std::vector<double>{2, 3, 4});
  CHECK(c.get_string("name", "") == "cubic");
  CHECK(c.get_number("missing", 7.0) == 7.0);
  CHECK(std::isinf(parse_number("-inf", "k")));
  CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), Error);
  CHECK_THROWS_AS(parse_number("sqrt(-1)", "k"), Error);
  CHECK_THROWS_AS(parse_number("3x", "k"), Error);
  CHECK_THROWS_AS(c.require_known({"beta", "betas"}), Error);
  CHECK_NOTHROW(c.require_known({"beta", "betas", "name"}));
}

TEST_CASE("paths resolve against the config directory") {
  const auto c = Config::parse("field = sub/f.json\nabs = /tmp/x.json\n", "/data/run");
  CHECK(c.get_path("field") == fs::path("/data/run/sub/f.json"));
  CHECK(c.get_path("abs") == fs::path("/tmp/x.json"));
}

TEST_CASE("exit codes for bad configurations") {
  const auto out = scratch("exit");
  CHECK(run("sweep", "beta = \n", out / "empty") == kExitConfig);
  CHECK(run("analyze", "beta = 3\ngamma = 0.1\n", out / "both") == kExitConfig);
  CHECK(run("analyze", "bogus = 1\n", out / "unknown") == kExitConfig);
  CHECK_FALSE(fs::exists(out / "unknown" / "manifest.json"));
  CHECK(run("nonsense", "", out / "cmd") == kExitConfig);
  // beta = 10 on a half width far below the tail length.
  CHECK(run("kink1d", "beta = 10\nmethod = variational\nhalf_width = 5\nnodes = 201\n", out / "small") ==
        kExitNoConvergence);
  CHECK(manifest(out / "small")["exit_code"] == kExitNoConvergence);
}

TEST_CASE("gamma and beta give identical bounds") {
  const auto out = scratch("gamma");
  // gamma = 1/8 corresponds to beta = sqrt(8).
  REQUIRE(run("analyze", "gamma = 0.125\n", out / "g") == kExitOk);
  REQUIRE(run("analyze", "beta = sqrt(8)\n", out / "b") == kExitOk);
  CHECK(read_file(out / "g" / "bounds.json") == read_file(out / "b" / "bounds.json"));
}

TEST_CASE("single-beta sweep reproduces kink1d") {
  const auto out = scratch("sweep");
  const std::string cfg = "beta = 3\nmethod = variational\nhalf_width = 20\nnodes = 801\n";
  REQUIRE(run("kink1d", cfg, out / "k") == kExitOk);
  REQUIRE(run("sweep", cfg, out / "s") == kExitOk);
  CHECK(read_file(out / "k" / "profile.csv") == read_file(out / "s" / "beta_000" / "profile.csv"));
  const auto rows = parse_csv(read_file(out / "s" / "sweep.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "3");
}

TEST_CASE("manifest lists every output") {
  const auto out = scratch("manifest");
  REQUIRE(run("kink1d", "beta = 3\nmethod = both\nhalf_width = 20\nnodes = 801\n", out) == kExitOk);
  const auto m = manifest(out);
  CHECK(m["tool"] == "efk");
  CHECK(m["command"] == "kink1d");
  CHECK(m["config"]["beta"] == "3");
  CHECK(m["exit_code"] == 0);
  std::vector<std::string> on_disk;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    on_disk.push_back(fs::relative(e.path(), out).generic_string());
  }
  std::sort(on_disk.begin(), on_disk.end());
  CHECK(m["files"].get<std::vector<std::string>>() == on_disk);
  for (const char* f : {"agreement.json", "profile_variational.csv", "profile_shooting.csv", "profile.svg"}) {
    CHECK(std::find(on_disk.begin(), on_disk.end(), f) != on_disk.end());
  }
}

TEST_CASE("solve is deterministic") {
  const auto out = scratch("det");
  const std::string cfg =
      "beta = sqrt(8)\nbc_bottom = -1\nbc_top = 1\ntransverse_sizes = 8\naxial_nodes = 129\nhalf_length = 12\n"
      "init = noisy_ramp\nseed = 3\namplitude = 0.1\n";
  REQUIRE(run("solve", cfg, out / "a") == kExitOk);
  REQUIRE(run("solve", cfg, out / "b") == kExitOk);
  const auto files = manifest(out / "a")["files"].get<std::vector<std::string>>();
  CHECK(files.size() > 5);
  for (const auto& f : files) {
    if (f == "manifest.json") continue;
    CHECK_MESSAGE(read_file(out / "a" / f) == read_file(out / "b" / f), f);
  }
}

TEST_CASE("csv quoting round trip") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CsvTable t({"name", "value"});
  t.row(std::vector<std::string>{"a,b", "x\"y"});
  t.row(std::vector<double>{1.5, -INFINITY});
  const auto rows = parse_csv(t.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == std::vector<std::string>{"a,b", "x\"y"});
  CHECK(rows[2] == std::vector<std::string>{"1.5", "-inf"});
}

TEST_CASE("field write and read round trip") {
  const auto out = scratch("field");
  const StripGrid g({4, 5}, {0.5, 0.25}, 9, 2.0);
  SolutionField f{g, Field(g.size()), Field(g.size()), 3.0, 1.0, -1.0, 1.0, {1e-3, 1e-9}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.u[i] = std::sin(0.1 * double(i)) / 3.0;
    f.v[i] = -1.0 / double(i + 1);
  }
  write_field(out, "f", f);
  const auto back = read_field(out / "f.json");
  CHECK(back.grid == g);
  CHECK(back.u == f.u);
  CHECK(back.v == f.v);
  CHECK(back.beta == 3.0);
  CHECK(back.lambda == 1.0);
  CHECK(back.bc_bottom == -1.0);
  CHECK(back.residual() == 1e-9);
}
