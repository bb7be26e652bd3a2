#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bubblesim/agents.hpp"
#include "bubblesim/catalog.hpp"
#include "bubblesim/metrics.hpp"
#include "bubblesim/personas.hpp"
#include "bubblesim/recommender.hpp"

namespace bubblesim {

enum class AgentBackend { kRule, kLlm, kTranscript };

std::string_view to_string(AgentBackend b);
AgentBackend parse_agent_backend(std::string_view text);

struct TrainingConfig {
  std::size_t dim = 16;
  double learning_rate = 0.05;
  double l2 = 1e-4;
  int epochs_per_iteration = 5;
  double init_std = 0.1;
  LabelMode label_mode = LabelMode::kLabelFlip;
  // Train on every sample so far rather than only the latest iteration.
  bool cumulative_samples = true;
};

struct LlmConfig {
  ChatEndpoint endpoint;
  int retries = 3;
  int initial_backoff_ms = 500;
  bool dump_transcripts = true;
};

struct SimulationConfig {
  std::size_t n_users = 20;
  std::size_t items_per_iteration = 5;
  int n_iterations = 20;
  ModelKind model_kind = ModelKind::kMf;
  WeightStrategy weight_strategy = WeightStrategy::kDefault;
  int cscmr = 50;
  MotivationKind motivation_kind = MotivationKind::kGratification;
  AgentBackend agent_backend = AgentBackend::kRule;
  std::uint64_t seed = 1;
  TrainingConfig training;
  MetricOptions metrics;
  std::size_t history_window = AgentHistory::kDefaultWindow;
  // Upper bound on concurrently running user sessions within an iteration.
  std::size_t max_in_flight = 4;
  LlmConfig llm;
  // LLM backend: where transcripts are written. Transcript backend: where
  // they are read from.
  std::string transcript_dir;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

nlohmann::ordered_json config_to_json(const SimulationConfig& config);
// Unknown keys are rejected; missing keys keep their defaults.
SimulationConfig config_from_json(const nlohmann::json& j);
SimulationConfig load_config(const std::filesystem::path& path);

struct Slate {
  int iteration = 0;
  std::string user_id;
  std::vector<std::string> item_ids;

  bool operator==(const Slate&) const = default;
};

struct RunLog {
  SimulationConfig config;
  CategoryIndex categories;
  std::vector<UserProfile> profiles;
  std::vector<FeedbackRecord> records;  // iteration, user, slate order
  std::vector<Slate> slates;            // iteration, user order
  std::vector<IterationMetrics> metrics;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds the agent the config asks for.
std::unique_ptr<FeedbackAgent> make_agent(const SimulationConfig& config);

// Runs the closed loop. With `agent` null the backend is built from the
// config. Agent failures and candidate exhaustion surface as SimulationError.
RunLog run(const SimulationConfig& config, const Catalog& catalog,
           FeedbackAgent* agent = nullptr);

// Invariant violations found in a log; empty when the log is sound.
std::vector<std::string> audit_run(std::span<const FeedbackRecord> records,
                                   std::span<const Slate> slates,
                                   std::span<const std::string> user_ids,
                                   std::size_t items_per_iteration, int n_iterations);

// ---------------------------------------------------------------------------
// Run directory: config.json, profiles.jsonl, records.jsonl, slates.jsonl,
// metrics.csv, summary.csv and, for LLM runs, transcripts/.

inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

void write_run_dir(const RunLog& log, const std::filesystem::path& dir);

// One records.jsonl line, including the item's category path.
nlohmann::ordered_json record_to_json(const FeedbackRecord& r,
                                      const std::array<std::string, kNumLevels>& path);
FeedbackRecord record_from_json(const nlohmann::json& j);

// Thrown for unreadable or inconsistent run directories; carries the file
// and line of the first bad record where applicable.
class RunDirError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything needed to recompute metrics from a persisted run.
struct PersistedRun {
  SimulationConfig config;
  // Level totals from config.json; item paths recovered from the records.
  CategoryIndex categories;
  std::vector<UserProfile> profiles;
  std::vector<FeedbackRecord> records;
  std::vector<Slate> slates;
};

PersistedRun load_run_dir(const std::filesystem::path& dir);

std::vector<IterationMetrics> recompute_metrics(const PersistedRun& run,
                                                const MetricOptions& options);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { kCscmr, kWeightStrategy, kMotivationKind, kModelKind };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view text);

// Copy of `base` with `axis` set to `value` (validated).
SimulationConfig apply_axis(SimulationConfig base, SweepAxis axis, const std::string& value);

struct SweepRun {
  std::string value;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<IterationMetrics> metrics;
};

struct SweepReport {
  SweepAxis axis;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRun> runs;  // value-major, then seed
};

// One run per (value, seed). When `out_dir` is set each run is written to
// out_dir/<axis>=<value>/seed=<seed>/. Failed runs are recorded in the
// report and the sweep continues.
SweepReport run_sweep(const SimulationConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values,
                      const std::vector<std::uint64_t>& seeds, const Catalog& catalog,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// axis,value,seed,iteration,mean_entropy_l1..3,mean_satisfaction,
// bubble_proportion_l1..3; one row per successful (value, seed, iteration).
void write_sweep_summary(std::ostream& out, const SweepReport& report);
// Seed-averaged trajectories: axis,value,iteration,n_seeds,mean_entropy_l1..3,
// mean_satisfaction,bubble_proportion_l1..3.
void write_sweep_aggregate(std::ostream& out, const SweepReport& report);

}  // namespace bubblesim
