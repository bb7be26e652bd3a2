#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "bubblesim/commands.hpp"
#include "bubblesim/simulation.hpp"
#include "support.hpp"

using namespace bubblesim;

namespace {

struct Workspace {
  testing::TempDir dir;
  std::filesystem::path catalog = dir / "catalog.jsonl";
  std::filesystem::path config = dir / "config.json";

  explicit Workspace(const std::string& config_json = R"({"n_iterations": 3})") {
    save_catalog(testing::fixture_catalog(), catalog);
    testing::write_file(config, config_json);
  }

  RunArgs run_args(const std::string& out) const { return {config, catalog, dir / out, {}}; }
};

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("run writes a complete run directory") {
  Workspace ws;
  std::ostringstream out, err;
  const auto outcome = cmd_run(ws.run_args("run"), out, err);
  REQUIRE(outcome.exit_code == kExitOk);
  const auto run_dir = ws.dir / "run";
  for (const char* f : {"config.json", "profiles.jsonl", "records.jsonl", "slates.jsonl",
                        "metrics.csv", "summary.csv"}) {
    CHECK(std::filesystem::exists(run_dir / f));
  }
  CHECK_FALSE(std::filesystem::exists(run_dir / kIncompleteMarker));
  // Comment line, header, then n_iterations rows per level.
  CHECK(count_lines(testing::read_file(run_dir / "summary.csv")) == 2 + 3 * 3);
  // Header plus one line per iteration.
  CHECK(count_lines(out.str()) == 1 + 3);
  CHECK(out.str().find("H_l1") != std::string::npos);
  CHECK(out.str().find("sat") != std::string::npos);
}

TEST_CASE("rerunning gives byte-identical metrics") {
  Workspace ws;
  std::ostringstream out, err;
  REQUIRE(cmd_run(ws.run_args("a"), out, err).exit_code == kExitOk);
  REQUIRE(cmd_run(ws.run_args("b"), out, err).exit_code == kExitOk);
  CHECK(testing::read_file(ws.dir / "a" / "metrics.csv") ==
        testing::read_file(ws.dir / "b" / "metrics.csv"));
  CHECK(testing::read_file(ws.dir / "a" / "records.jsonl") ==
        testing::read_file(ws.dir / "b" / "records.jsonl"));
}

TEST_CASE("usage errors exit 1") {
  Workspace ws;
  std::ostringstream out, err;
  RunArgs missing = ws.run_args("x");
  missing.config = ws.dir / "nope.json";
  CHECK(cmd_run(missing, out, err).exit_code == kExitUsage);

  testing::write_file(ws.dir / "bad.json", R"({"cscmr": 33})");
  RunArgs bad = ws.run_args("y");
  bad.config = ws.dir / "bad.json";
  CHECK(cmd_run(bad, out, err).exit_code == kExitUsage);

  RunArgs backend = ws.run_args("z");
  backend.backend = "oracle";
  CHECK(cmd_run(backend, out, err).exit_code == kExitUsage);

  SweepArgs sweep{ws.run_args("s"), "colour", {"a"}, {1}};
  CHECK(cmd_sweep(sweep, out, err).exit_code == kExitUsage);
  sweep.axis = "cscmr";
  sweep.seeds.clear();
  CHECK(cmd_sweep(sweep, out, err).exit_code == kExitUsage);

  FixtureArgs fixture;
  fixture.shape = "0,1,1";
  fixture.out = ws.dir / "f.jsonl";
  CHECK(cmd_fixture(fixture, out, err).exit_code == kExitUsage);
}

TEST_CASE("simulation failures exit 2 and leave the sentinel") {
  Workspace ws(R"({"n_iterations": 3000})");
  std::ostringstream out, err;
  const auto outcome = cmd_run(ws.run_args("fail"), out, err);
  CHECK(outcome.exit_code == kExitFailure);
  CHECK(std::filesystem::exists(ws.dir / "fail" / kIncompleteMarker));
  CHECK(err.str().find("error") != std::string::npos);
}

TEST_CASE("sweep writes one directory per value and seed") {
  Workspace ws(R"({"n_iterations": 2})");
  std::ostringstream out, err;
  SweepArgs sweep{ws.run_args("sweep"), "cscmr", {"0", "25", "50", "75", "100"}, {1, 2}};
  REQUIRE(cmd_sweep(sweep, out, err).exit_code == kExitOk);
  std::size_t dirs = 0;
  for (const auto& axis_dir : std::filesystem::directory_iterator(ws.dir / "sweep")) {
    if (!axis_dir.is_directory()) continue;
    for (const auto& seed_dir : std::filesystem::directory_iterator(axis_dir.path())) {
      dirs += std::filesystem::exists(seed_dir.path() / "records.jsonl");
    }
  }
  CHECK(dirs == 10);
  CHECK(count_lines(testing::read_file(ws.dir / "sweep" / "sweep_summary.csv")) ==
        1 + 5 * 2 * 2);
  CHECK_FALSE(std::filesystem::exists(ws.dir / "sweep" / kIncompleteMarker));
}

TEST_CASE("metrics recomputation reproduces the run") {
  Workspace ws;
  std::ostringstream out, err;
  REQUIRE(cmd_run(ws.run_args("run"), out, err).exit_code == kExitOk);
  const auto run_dir = ws.dir / "run";

  MetricsArgs same;
  same.run_dir = run_dir;
  REQUIRE(cmd_metrics(same, out, err).exit_code == kExitOk);
  CHECK(testing::read_file(run_dir / "metrics_recomputed.csv") ==
        testing::read_file(run_dir / "metrics.csv"));

  MetricsArgs flipped = same;
  flipped.window = "cumulative";
  flipped.out = run_dir / "cumulative.csv";
  std::ostringstream flipped_out;
  REQUIRE(cmd_metrics(flipped, flipped_out, err).exit_code == kExitOk);
  const std::string cum = testing::read_file(run_dir / "cumulative.csv");
  CHECK(cum.starts_with("# window=cumulative"));
  CHECK(cum != testing::read_file(run_dir / "metrics.csv"));
  CHECK(flipped_out.str().find("window=cumulative") != std::string::npos);

  MetricsArgs bad_window = same;
  bad_window.window = "weekly";
  CHECK(cmd_metrics(bad_window, out, err).exit_code == kExitUsage);
}

TEST_CASE("truncated records exit 2 with a line diagnostic") {
  Workspace ws;
  std::ostringstream out, err;
  REQUIRE(cmd_run(ws.run_args("run"), out, err).exit_code == kExitOk);
  const auto records = ws.dir / "run" / "records.jsonl";
  std::string text = testing::read_file(records);
  text.resize(text.size() / 2);
  testing::write_file(records, text);
  MetricsArgs args;
  args.run_dir = ws.dir / "run";
  std::ostringstream diag;
  CHECK(cmd_metrics(args, out, diag).exit_code == kExitFailure);
  CHECK(diag.str().find("records.jsonl:") != std::string::npos);
}

TEST_CASE("fixture and ecdf commands") {
  Workspace ws;
  std::ostringstream out, err;
  FixtureArgs fixture;
  fixture.seed = 1;
  fixture.n_items = 10;
  fixture.shape = "2,2,2";
  fixture.out = ws.dir / "small.jsonl";
  REQUIRE(cmd_fixture(fixture, out, err).exit_code == kExitOk);
  CHECK(load_catalog(fixture.out) == generate_fixture(1, 10, FixtureShape{2, 2, 2}));

  REQUIRE(cmd_run(ws.run_args("run"), out, err).exit_code == kExitOk);
  EcdfArgs ecdf;
  ecdf.run_dir = ws.dir / "run";
  ecdf.feature = "gender";
  ecdf.out = ws.dir / "ecdf.csv";
  REQUIRE(cmd_ecdf(ecdf, out, err).exit_code == kExitOk);
  const std::string csv = testing::read_file(ecdf.out);
  CHECK(csv.find("group,value,cumulative") != std::string::npos);
  ecdf.feature = "height";
  CHECK(cmd_ecdf(ecdf, out, err).exit_code == kExitUsage);
}

TEST_CASE("command-line parse errors exit 1") {
  const std::string cli = BUBBLESIM_CLI;
  CHECK(WEXITSTATUS(std::system((cli + " run --bogus >/dev/null 2>&1").c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((cli + " >/dev/null 2>&1").c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((cli + " --help >/dev/null 2>&1").c_str())) == 0);
}
