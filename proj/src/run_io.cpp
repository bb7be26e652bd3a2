#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "bubblesim/simulation.hpp"

namespace bubblesim {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

ojson record_to_json(const FeedbackRecord& r,
                     const std::array<std::string, kNumLevels>& path) {
  ojson j;
  j["iteration"] = r.iteration;
  j["user_id"] = r.user_id;
  j["item_id"] = r.item_id;
  j["feedback"] = std::string(feedback_label(r.feedback));
  j["explanation"] = r.explanation;
  j["category_l1"] = path[0];
  j["category_l2"] = path[1];
  j["category_l3"] = path[2];
  return j;
}

FeedbackRecord record_from_json(const nlohmann::json& j) {
  FeedbackRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.user_id = j.at("user_id").get<std::string>();
  r.item_id = j.at("item_id").get<std::string>();
  const auto label = j.at("feedback").get<std::string>();
  const auto t = parse_feedback_label(label);
  if (!t) throw std::invalid_argument(fmt::format("unknown feedback '{}'", label));
  r.feedback = *t;
  r.explanation = j.at("explanation").get<std::string>();
  return r;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

// Calls `fn(json, line_no)` for each non-empty line; wraps failures with
// the file and line.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunDirError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(nlohmann::json::parse(line), line_no);
    } catch (const std::exception& e) {
      throw RunDirError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
}

}  // namespace

void write_run_dir(const RunLog& log, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto j = config_to_json(log.config);
    j["catalog_level_totals"] = log.categories.level_totals;
    open_out(dir / "config.json") << j.dump(2) << '\n';
  }
  save_profiles(log.profiles, dir / "profiles.jsonl");
  {
    auto out = open_out(dir / "records.jsonl");
    for (const auto& r : log.records) {
      out << record_to_json(r, log.categories.item_categories.at(r.item_id)).dump() << '\n';
    }
  }
  {
    auto out = open_out(dir / "slates.jsonl");
    for (const auto& s : log.slates) {
      ojson j;
      j["iteration"] = s.iteration;
      j["user_id"] = s.user_id;
      j["item_ids"] = s.item_ids;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, log.metrics, log.config.metrics);
  }
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(out, log.metrics, log.config.metrics);
  }
}

PersistedRun load_run_dir(const fs::path& dir) {
  PersistedRun run;
  {
    const auto path = dir / "config.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunDirError(fmt::format("cannot open '{}'", path.string()));
    try {
      const auto j = nlohmann::json::parse(in);
      run.config = config_from_json(j);
      run.categories.level_totals =
          j.at("catalog_level_totals").get<std::array<std::size_t, kNumLevels>>();
    } catch (const std::exception& e) {
      throw RunDirError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  try {
    run.profiles = load_profiles(dir / "profiles.jsonl");
  } catch (const std::exception& e) {
    throw RunDirError(e.what());
  }
  for_each_jsonl(dir / "records.jsonl", [&](const nlohmann::json& j, std::size_t) {
    auto r = record_from_json(j);
    std::array<std::string, kNumLevels> path{j.at("category_l1").get<std::string>(),
                                             j.at("category_l2").get<std::string>(),
                                             j.at("category_l3").get<std::string>()};
    const auto [it, inserted] = run.categories.item_categories.emplace(r.item_id, path);
    if (!inserted && it->second != path) {
      throw std::invalid_argument(
          fmt::format("item {} recorded with two category paths", r.item_id));
    }
    run.records.push_back(std::move(r));
  });
  for_each_jsonl(dir / "slates.jsonl", [&](const nlohmann::json& j, std::size_t) {
    run.slates.push_back({j.at("iteration").get<int>(), j.at("user_id").get<std::string>(),
                          j.at("item_ids").get<std::vector<std::string>>()});
  });
  std::vector<std::string> user_ids;
  for (const auto& p : run.profiles) user_ids.push_back(p.user_id);
  const auto problems = audit_run(run.records, run.slates, user_ids,
                                  run.config.items_per_iteration, run.config.n_iterations);
  if (!problems.empty()) {
    throw RunDirError(fmt::format("{}: inconsistent log: {}{}", dir.string(), problems.front(),
                                  problems.size() > 1
                                      ? fmt::format(" (+{} more)", problems.size() - 1)
                                      : ""));
  }
  return run;
}

std::vector<IterationMetrics> recompute_metrics(const PersistedRun& run,
                                                const MetricOptions& options) {
  std::vector<std::string> user_ids;
  for (const auto& p : run.profiles) user_ids.push_back(p.user_id);
  return compute_metrics(user_ids, run.categories, run.records, run.config.n_iterations,
                         options);
}

}  // namespace bubblesim
