#include "bubblesim/commands.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "bubblesim/simulation.hpp"

namespace bubblesim {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SimulationConfig load_run_config(const RunArgs& args) {
  SimulationConfig config;
  try {
    config = load_config(args.config);
    if (args.backend) {
      config.agent_backend = parse_agent_backend(*args.backend);
      config.validate();
    }
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return config;
}

Catalog load_input_catalog(const fs::path& path) {
  try {
    return load_catalog(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void print_summary_table(std::ostream& out, const RunLog& log) {
  out << fmt::format("{:>4}  {:>8}  {:>8}  {:>8}  {:>6}  {:>6}  {:>6}  {:>6}\n", "iter",
                     "H_l1", "H_l2", "H_l3", "sat", "bub_l1", "bub_l2", "bub_l3");
  for (const auto& m : log.metrics) {
    out << fmt::format("{:>4}  {:>8.4f}  {:>8.4f}  {:>8.4f}  {:>6.3f}  {:>6.3f}  {:>6.3f}  {:>6.3f}\n",
                       m.iteration, m.mean_entropy[0], m.mean_entropy[1], m.mean_entropy[2],
                       m.mean_satisfaction, m.bubble_proportion[0], m.bubble_proportion[1],
                       m.bubble_proportion[2]);
  }
}

template <typename Body>
CommandOutcome guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return {kExitUsage, {}};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return {kExitFailure, {}};
  }
}

}  // namespace

CommandOutcome cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> CommandOutcome {
    auto config = load_run_config(args);
    const auto catalog = load_input_catalog(args.catalog);
    fs::create_directories(args.out);
    const auto marker = args.out / kIncompleteMarker;
    write_text(marker, "run in progress or failed\n");
    if (config.agent_backend == AgentBackend::kLlm && config.transcript_dir.empty()) {
      config.transcript_dir = (args.out / "transcripts").string();
    }
    const auto log = run(config, catalog);
    write_run_dir(log, args.out);
    fs::remove(marker);
    print_summary_table(out, log);
    return {kExitOk,
            {args.out / "config.json", args.out / "profiles.jsonl", args.out / "records.jsonl",
             args.out / "slates.jsonl", args.out / "metrics.csv", args.out / "summary.csv"}};
  });
}

CommandOutcome cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> CommandOutcome {
    const auto config = load_run_config(args.base);
    SweepAxis axis;
    try {
      axis = parse_sweep_axis(args.axis);
      if (args.values.empty()) throw std::invalid_argument("--values is empty");
      if (args.seeds.empty()) throw std::invalid_argument("--seeds is empty");
      for (const auto& v : args.values) apply_axis(config, axis, v);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    const auto catalog = load_input_catalog(args.base.catalog);
    fs::create_directories(args.base.out);
    const auto marker = args.base.out / kIncompleteMarker;
    write_text(marker, "sweep in progress or failed\n");
    const auto report = run_sweep(config, axis, args.values, args.seeds, catalog, args.base.out);
    {
      std::ofstream f(args.base.out / "sweep_summary.csv", std::ios::binary | std::ios::trunc);
      write_sweep_summary(f, report);
    }
    {
      std::ofstream f(args.base.out / "sweep_aggregate.csv", std::ios::binary | std::ios::trunc);
      write_sweep_aggregate(f, report);
    }
    std::size_t failed = 0;
    for (const auto& r : report.runs) {
      out << fmt::format("{}={} seed={}: {}\n", to_string(axis), r.value, r.seed,
                         r.ok ? fmt::format("final H_l1={:.4f} sat={:.3f}",
                                            r.metrics.back().mean_entropy[0],
                                            r.metrics.back().mean_satisfaction)
                              : "FAILED: " + r.error);
      failed += r.ok ? 0 : 1;
    }
    if (failed > 0) {
      err << fmt::format("{} of {} runs failed\n", failed, report.runs.size());
      return {kExitFailure, {args.base.out / "sweep_summary.csv"}};
    }
    fs::remove(marker);
    return {kExitOk, {args.base.out / "sweep_summary.csv", args.base.out / "sweep_aggregate.csv"}};
  });
}

CommandOutcome cmd_metrics(const MetricsArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> CommandOutcome {
    const auto run = load_run_dir(args.run_dir);
    MetricOptions options = run.config.metrics;
    try {
      if (args.window) options.window = parse_metric_window(*args.window);
      if (args.watched) options.watched = parse_watched_mode(*args.watched);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    const auto metrics = recompute_metrics(run, options);
    std::ostringstream metrics_csv, summary_csv;
    write_metrics_csv(metrics_csv, metrics, options);
    write_summary_csv(summary_csv, metrics, options);

    const auto out_path = args.out.empty() ? args.run_dir / "metrics_recomputed.csv" : args.out;
    auto summary_path = out_path;
    summary_path.replace_filename(out_path.stem().string() + "_summary.csv");
    write_text(out_path, metrics_csv.str());
    write_text(summary_path, summary_csv.str());

    const bool same_options = options.window == run.config.metrics.window &&
                              options.watched == run.config.metrics.watched;
    if (same_options) {
      if (read_file(args.run_dir / "metrics.csv") != metrics_csv.str()) {
        err << "error: recomputed metrics differ from the run's metrics.csv\n";
        return {kExitFailure, {out_path, summary_path}};
      }
      out << "recomputed metrics match metrics.csv\n";
    } else {
      out << fmt::format(
          "recomputed with window={} watched={} (run used window={} watched={}); "
          "see the header line of {}\n",
          to_string(options.window), to_string(options.watched),
          to_string(run.config.metrics.window), to_string(run.config.metrics.watched),
          out_path.string());
    }
    return {kExitOk, {out_path, summary_path}};
  });
}

CommandOutcome cmd_fixture(const FixtureArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> CommandOutcome {
    FixtureShape shape;
    try {
      shape = parse_shape(args.shape);
      if (args.n_items == 0) throw std::invalid_argument("n_items must be positive");
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    const auto catalog = generate_fixture(args.seed, args.n_items, shape);
    if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
    save_catalog(catalog, args.out);
    const auto stats = hierarchy_stats(catalog);
    out << fmt::format("wrote {} items to {}: categories {}/{}/{}, avg children {:.2f}/{:.2f}\n",
                       catalog.size(), args.out.string(), stats.unique_counts[0],
                       stats.unique_counts[1], stats.unique_counts[2], stats.avg_children[0],
                       stats.avg_children[1]);
    return {kExitOk, {args.out}};
  });
}

CommandOutcome cmd_ecdf(const EcdfArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> CommandOutcome {
    DemographicFeature feature;
    try {
      feature = parse_demographic_feature(args.feature);
      if (args.value != "entropy" && args.value != "coverage") {
        throw std::invalid_argument(fmt::format("unknown value kind '{}'", args.value));
      }
      if (args.level < 1 || args.level > kNumLevels) {
        throw std::invalid_argument("level must be 1, 2 or 3");
      }
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    const auto run = load_run_dir(args.run_dir);
    const auto metrics = recompute_metrics(run, run.config.metrics);
    std::vector<double> values(run.profiles.size(), 0.0);
    std::vector<std::string> groups;
    for (const auto& p : run.profiles) groups.push_back(demographic_group(p, feature));
    for (const auto& m : metrics) {
      for (std::size_t u = 0; u < m.users.size(); ++u) {
        const auto& lm = m.users[u].levels[args.level - 1];
        values[u] += args.value == "entropy" ? lm.entropy : lm.coverage;
      }
    }
    for (auto& v : values) v /= static_cast<double>(metrics.size());
    const auto expected = demographic_groups(feature);
    const auto ecdf = demographic_ecdf(values, groups, expected);
    const auto path = args.out.empty()
                          ? args.run_dir / fmt::format("ecdf_{}_{}_l{}.csv", args.feature,
                                                       args.value, args.level)
                          : args.out;
    std::ostringstream csv;
    csv << "group,value,cumulative\n";
    for (const auto& [group, points] : ecdf) {
      for (const auto& pt : points) csv << fmt::format("{},{},{}\n", group, pt.value, pt.cumulative);
    }
    write_text(path, csv.str());
    out << fmt::format("wrote {} groups to {}\n", ecdf.size(), path.string());
    return {kExitOk, {path}};
  });
}

}  // namespace bubblesim
