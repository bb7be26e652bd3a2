#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bubblesim {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
};

struct RunArgs {
  std::filesystem::path config;
  std::filesystem::path catalog;
  std::filesystem::path out;
  std::optional<std::string> backend;
};

struct SweepArgs {
  RunArgs base;
  std::string axis;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
};

struct MetricsArgs {
  std::filesystem::path run_dir;
  std::optional<std::string> window;   // override the run's metric window
  std::optional<std::string> watched;  // override the run's watched mode
  std::filesystem::path out;           // default: <run_dir>/metrics_recomputed.csv
};

struct FixtureArgs {
  std::uint64_t seed = 7;
  std::size_t n_items = 4000;
  std::string shape = "21,2.62,4.22";
  std::filesystem::path out;
};

struct EcdfArgs {
  std::filesystem::path run_dir;
  std::string feature = "age";
  std::string value = "entropy";  // or "coverage"
  int level = 1;
  std::filesystem::path out;
};

// Human-readable progress goes to `out`, diagnostics to `err`.
CommandOutcome cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
CommandOutcome cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
CommandOutcome cmd_metrics(const MetricsArgs& args, std::ostream& out, std::ostream& err);
CommandOutcome cmd_fixture(const FixtureArgs& args, std::ostream& out, std::ostream& err);
// Per-user metric (mean over iterations) ECDF per demographic group:
// group,value,cumulative.
CommandOutcome cmd_ecdf(const EcdfArgs& args, std::ostream& out, std::ostream& err);

}  // namespace bubblesim
