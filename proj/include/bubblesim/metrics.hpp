#pragma once

#include <array>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bubblesim/catalog.hpp"
#include "bubblesim/feedback.hpp"
#include "bubblesim/personas.hpp"

namespace bubblesim {

// Category name -> number of watched videos in it.
using CategoryCounts = std::map<std::string, std::size_t>;

enum class BubbleStatus { kIn, kOut };

// Which records feed coverage, entropy and bubble status at iteration i.
enum class MetricWindow { kPerIteration, kCumulative };
// Which shown videos count as watched.
enum class WatchedMode { kPositiveOnly, kAllShown };

std::string_view to_string(BubbleStatus s);
std::string_view to_string(MetricWindow w);
std::string_view to_string(WatchedMode m);
MetricWindow parse_metric_window(std::string_view text);
WatchedMode parse_watched_mode(std::string_view text);

double coverage(std::size_t n_seen, std::size_t n_total);
// Shannon entropy in nats; 0 for empty counts.
double entropy(const CategoryCounts& counts);
// Fraction of records with a positive feedback type. Throws on empty input.
double satisfaction(std::span<const FeedbackRecord> records);

// Midpoint of the two middle order statistics for even sizes.
double median(std::vector<double> values);
// "in" iff count < median(counts), strictly.
std::vector<BubbleStatus> bubble_status(std::span<const std::size_t> distinct_counts);
double bubble_proportion(std::span<const BubbleStatus> statuses);

struct EcdfPoint {
  double value;
  double cumulative;  // fraction of the group with value <= this value
  bool operator==(const EcdfPoint&) const = default;
};

// Right-continuous ECDF per group, one point per distinct value. Names in
// `expected_groups` with no members are omitted with a log line.
std::map<std::string, std::vector<EcdfPoint>> demographic_ecdf(
    std::span<const double> values, std::span<const std::string> groups,
    std::span<const std::string> expected_groups = {});

enum class DemographicFeature { kAge, kGender, kCityLevel, kPhonePrice };
DemographicFeature parse_demographic_feature(std::string_view text);
std::string demographic_group(const UserProfile& profile, DemographicFeature feature);
std::vector<std::string> demographic_groups(DemographicFeature feature);

// ---------------------------------------------------------------------------
// Run-level metrics

struct LevelMetrics {
  double coverage = 0.0;
  double entropy = 0.0;
  std::size_t distinct = 0;
  BubbleStatus status = BubbleStatus::kOut;
};

struct UserMetrics {
  std::string user_id;
  double satisfaction = 0.0;
  std::array<LevelMetrics, kNumLevels> levels;
};

struct IterationMetrics {
  int iteration = 0;
  std::vector<UserMetrics> users;
  std::array<double, kNumLevels> mean_coverage{};
  std::array<double, kNumLevels> mean_entropy{};
  std::array<double, kNumLevels> bubble_proportion{};
  double mean_satisfaction = 0.0;
};

struct MetricOptions {
  MetricWindow window = MetricWindow::kPerIteration;
  WatchedMode watched = WatchedMode::kPositiveOnly;
};

// Everything the metrics need to know about the catalog.
struct CategoryIndex {
  std::array<std::size_t, kNumLevels> level_totals{};
  std::map<std::string, std::array<std::string, kNumLevels>> item_categories;

  static CategoryIndex from(const Catalog& catalog);
};

// Metrics for one iteration from the run's records (any order; records of
// later iterations are ignored). Users are reported in `user_ids` order and
// each must have at least one record in `iteration`.
IterationMetrics compute_iteration_metrics(const std::vector<std::string>& user_ids,
                                           const CategoryIndex& categories,
                                           std::span<const FeedbackRecord> records,
                                           int iteration, const MetricOptions& options);

std::vector<IterationMetrics> compute_metrics(const std::vector<std::string>& user_ids,
                                              const CategoryIndex& categories,
                                              std::span<const FeedbackRecord> records,
                                              int n_iterations,
                                              const MetricOptions& options);

// CSV writers. Both start with a "# window=... watched=..." comment line.
void write_metrics_csv(std::ostream& out, std::span<const IterationMetrics> metrics,
                       const MetricOptions& options);
void write_summary_csv(std::ostream& out, std::span<const IterationMetrics> metrics,
                       const MetricOptions& options);

}  // namespace bubblesim
