// Command-line front end: run, sweep, metrics, fixture, ecdf.
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bubblesim/commands.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

constexpr const char* kEnvHelp =
    "LLM backend: the API key is read from the environment variable named by\n"
    "llm.api_key_env in the config (default BUBBLESIM_API_KEY). It is never\n"
    "written to the run directory. BUBBLESIM_LOG_LEVEL sets log verbosity\n"
    "(trace, debug, info, warn, error).";

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("BUBBLESIM_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
  spdlog::set_default_logger(spdlog::default_logger());

  CLI::App app{"Closed-loop recommender / user-agent filter-bubble simulator"};
  app.footer(kEnvHelp);
  app.require_subcommand(1);

  bubblesim::RunArgs run_args;
  std::string backend;
  auto* run = app.add_subcommand("run", "Run one simulation and write a run directory");
  run->add_option("--config", run_args.config, "Simulation config (JSON)")->required();
  run->add_option("--catalog", run_args.catalog, "Item catalog (JSONL)")->required();
  run->add_option("--out", run_args.out, "Output run directory")->required();
  run->add_option("--backend", backend, "Override agent backend: rule, llm, transcript");

  bubblesim::SweepArgs sweep_args;
  std::string sweep_backend, values, seeds;
  auto* sweep = app.add_subcommand("sweep", "Run one simulation per (axis value, seed)");
  sweep->add_option("--config", sweep_args.base.config, "Base config (JSON)")->required();
  sweep->add_option("--catalog", sweep_args.base.catalog, "Item catalog (JSONL)")->required();
  sweep->add_option("--out", sweep_args.base.out, "Output directory")->required();
  sweep->add_option("--axis", sweep_args.axis,
                    "cscmr, weight_strategy, motivation_kind or model_kind")
      ->required();
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("--seeds", seeds, "Comma-separated seeds")->required();
  sweep->add_option("--backend", sweep_backend, "Override agent backend");

  bubblesim::MetricsArgs metrics_args;
  std::string window, watched;
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a run directory");
  metrics->add_option("--run-dir", metrics_args.run_dir, "Run directory")->required();
  metrics->add_option("--window", window, "per_iteration or cumulative");
  metrics->add_option("--watched", watched, "positive_only or all_shown");
  metrics->add_option("--out", metrics_args.out, "Output CSV path");

  bubblesim::FixtureArgs fixture_args;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic catalog (JSONL)");
  fixture->add_option("--seed", fixture_args.seed, "RNG seed");
  fixture->add_option("--n-items", fixture_args.n_items, "Number of items");
  fixture->add_option("--shape", fixture_args.shape,
                      "level1_count,avg_children_l1,avg_children_l2");
  fixture->add_option("--out", fixture_args.out, "Output JSONL path")->required();

  bubblesim::EcdfArgs ecdf_args;
  auto* ecdf = app.add_subcommand("ecdf", "Export per-demographic ECDF data from a run");
  ecdf->add_option("--run-dir", ecdf_args.run_dir, "Run directory")->required();
  ecdf->add_option("--feature", ecdf_args.feature, "age, gender, city_level, phone_price");
  ecdf->add_option("--value", ecdf_args.value, "entropy or coverage");
  ecdf->add_option("--level", ecdf_args.level, "Category level 1-3");
  ecdf->add_option("--out", ecdf_args.out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bubblesim::kExitUsage;
  }

  bubblesim::CommandOutcome outcome;
  if (*run) {
    if (!backend.empty()) run_args.backend = backend;
    outcome = bubblesim::cmd_run(run_args, std::cout, std::cerr);
  } else if (*sweep) {
    if (!sweep_backend.empty()) sweep_args.base.backend = sweep_backend;
    sweep_args.values = split_csv(values);
    for (const auto& s : split_csv(seeds)) {
      try {
        sweep_args.seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        std::cerr << "error: bad seed '" << s << "'\n";
        return bubblesim::kExitUsage;
      }
    }
    outcome = bubblesim::cmd_sweep(sweep_args, std::cout, std::cerr);
  } else if (*metrics) {
    if (!window.empty()) metrics_args.window = window;
    if (!watched.empty()) metrics_args.watched = watched;
    outcome = bubblesim::cmd_metrics(metrics_args, std::cout, std::cerr);
  } else if (*fixture) {
    outcome = bubblesim::cmd_fixture(fixture_args, std::cout, std::cerr);
  } else if (*ecdf) {
    outcome = bubblesim::cmd_ecdf(ecdf_args, std::cout, std::cerr);
  }
  return outcome.exit_code;
}
