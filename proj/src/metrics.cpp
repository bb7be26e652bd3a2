#include "bubblesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

namespace bubblesim {

std::string_view to_string(BubbleStatus s) { return s == BubbleStatus::kIn ? "in" : "out"; }

std::string_view to_string(MetricWindow w) {
  return w == MetricWindow::kPerIteration ? "per_iteration" : "cumulative";
}

std::string_view to_string(WatchedMode m) {
  return m == WatchedMode::kPositiveOnly ? "positive_only" : "all_shown";
}

MetricWindow parse_metric_window(std::string_view text) {
  if (text == "per_iteration") return MetricWindow::kPerIteration;
  if (text == "cumulative") return MetricWindow::kCumulative;
  throw std::invalid_argument(fmt::format("unknown metric window '{}'", text));
}

WatchedMode parse_watched_mode(std::string_view text) {
  if (text == "positive_only") return WatchedMode::kPositiveOnly;
  if (text == "all_shown") return WatchedMode::kAllShown;
  throw std::invalid_argument(fmt::format("unknown watched mode '{}'", text));
}

double coverage(std::size_t n_seen, std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("coverage: no categories at this level");
  if (n_seen > n_total) throw std::invalid_argument("coverage: n_seen > n_total");
  return static_cast<double>(n_seen) / static_cast<double>(n_total);
}

double entropy(const CategoryCounts& counts) {
  std::size_t n = 0;
  for (const auto& [name, c] : counts) n += c;
  if (n == 0) return 0.0;
  double h = 0.0;
  for (const auto& [name, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double satisfaction(std::span<const FeedbackRecord> records) {
  if (records.empty()) throw std::invalid_argument("satisfaction: no records");
  const auto positive = std::count_if(records.begin(), records.end(),
                                      [](const auto& r) { return is_positive(r.feedback); });
  return static_cast<double>(positive) / static_cast<double>(records.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<BubbleStatus> bubble_status(std::span<const std::size_t> counts) {
  if (counts.empty()) throw std::invalid_argument("bubble_status: no users");
  std::vector<double> as_double(counts.begin(), counts.end());
  const double m = median(as_double);
  std::vector<BubbleStatus> out;
  out.reserve(counts.size());
  for (const auto c : counts) {
    out.push_back(static_cast<double>(c) < m ? BubbleStatus::kIn : BubbleStatus::kOut);
  }
  return out;
}

double bubble_proportion(std::span<const BubbleStatus> statuses) {
  if (statuses.empty()) throw std::invalid_argument("bubble_proportion: no users");
  const auto in = std::count(statuses.begin(), statuses.end(), BubbleStatus::kIn);
  return static_cast<double>(in) / static_cast<double>(statuses.size());
}

std::map<std::string, std::vector<EcdfPoint>> demographic_ecdf(
    std::span<const double> values, std::span<const std::string> groups,
    std::span<const std::string> expected_groups) {
  if (values.size() != groups.size()) {
    throw std::invalid_argument("demographic_ecdf: one group per value required");
  }
  std::map<std::string, std::vector<double>> by_group;
  for (std::size_t i = 0; i < values.size(); ++i) by_group[groups[i]].push_back(values[i]);
  for (const auto& g : expected_groups) {
    if (!by_group.contains(g)) spdlog::info("ECDF: group '{}' is empty; omitted", g);
  }
  std::map<std::string, std::vector<EcdfPoint>> out;
  for (auto& [group, vals] : by_group) {
    std::sort(vals.begin(), vals.end());
    const double n = static_cast<double>(vals.size());
    auto& points = out[group];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;
      points.push_back({vals[i], static_cast<double>(i + 1) / n});
    }
  }
  return out;
}

DemographicFeature parse_demographic_feature(std::string_view text) {
  if (text == "age") return DemographicFeature::kAge;
  if (text == "gender") return DemographicFeature::kGender;
  if (text == "city_level") return DemographicFeature::kCityLevel;
  if (text == "phone_price") return DemographicFeature::kPhonePrice;
  throw std::invalid_argument(fmt::format("unknown demographic feature '{}'", text));
}

std::string demographic_group(const UserProfile& p, DemographicFeature feature) {
  switch (feature) {
    case DemographicFeature::kAge:
      if (p.age < 25) return "16-24";
      if (p.age < 35) return "25-34";
      if (p.age < 45) return "35-44";
      return "45-60";
    case DemographicFeature::kGender: return std::string(to_string(p.gender));
    case DemographicFeature::kCityLevel: return fmt::format("tier {}", p.city_level);
    case DemographicFeature::kPhonePrice: return std::string(phone_band_label(p.phone_band));
  }
  throw std::invalid_argument("unknown demographic feature");
}

std::vector<std::string> demographic_groups(DemographicFeature feature) {
  switch (feature) {
    case DemographicFeature::kAge: return {"16-24", "25-34", "35-44", "45-60"};
    case DemographicFeature::kGender: return {"female", "male"};
    case DemographicFeature::kCityLevel: return {"tier 1", "tier 2", "tier 3", "tier 4"};
    case DemographicFeature::kPhonePrice: {
      std::vector<std::string> out;
      for (int b = 0; b < kNumPhoneBands; ++b) out.emplace_back(phone_band_label(b));
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

CategoryIndex CategoryIndex::from(const Catalog& catalog) {
  CategoryIndex idx;
  for (int level = 1; level <= kNumLevels; ++level) {
    idx.level_totals[level - 1] = catalog.hierarchy().size(level);
  }
  for (const auto& item : catalog.items()) {
    idx.item_categories[item.item_id] = {item.category_l1, item.category_l2,
                                         item.category_l3};
  }
  return idx;
}

IterationMetrics compute_iteration_metrics(const std::vector<std::string>& user_ids,
                                           const CategoryIndex& categories,
                                           std::span<const FeedbackRecord> records,
                                           int iteration, const MetricOptions& options) {
  if (user_ids.empty()) throw std::invalid_argument("metrics: no users");
  std::map<std::string, std::size_t> slot;
  for (std::size_t u = 0; u < user_ids.size(); ++u) slot.emplace(user_ids[u], u);

  const std::size_t n_users = user_ids.size();
  std::vector<std::vector<FeedbackRecord>> current(n_users);
  std::vector<std::array<CategoryCounts, kNumLevels>> watched(n_users);
  for (const auto& r : records) {
    if (r.iteration > iteration) continue;
    const auto s = slot.find(r.user_id);
    if (s == slot.end()) {
      throw std::invalid_argument(fmt::format("metrics: unknown user '{}'", r.user_id));
    }
    const std::size_t u = s->second;
    if (r.iteration == iteration) current[u].push_back(r);
    const bool in_window =
        r.iteration == iteration || options.window == MetricWindow::kCumulative;
    const bool counts_as_watched =
        options.watched == WatchedMode::kAllShown || is_positive(r.feedback);
    if (!in_window || !counts_as_watched) continue;
    const auto cats = categories.item_categories.find(r.item_id);
    if (cats == categories.item_categories.end()) {
      throw std::invalid_argument(fmt::format("metrics: unknown item '{}'", r.item_id));
    }
    for (int l = 0; l < kNumLevels; ++l) ++watched[u][l][cats->second[l]];
  }

  IterationMetrics out;
  out.iteration = iteration;
  out.users.resize(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    if (current[u].empty()) {
      throw std::invalid_argument(fmt::format("metrics: user '{}' has no records in iteration {}",
                                              user_ids[u], iteration));
    }
    auto& um = out.users[u];
    um.user_id = user_ids[u];
    um.satisfaction = satisfaction(current[u]);
    for (int l = 0; l < kNumLevels; ++l) {
      auto& lm = um.levels[l];
      lm.distinct = watched[u][l].size();
      lm.coverage = coverage(lm.distinct, categories.level_totals[l]);
      lm.entropy = entropy(watched[u][l]);
    }
  }
  const double n = static_cast<double>(n_users);
  for (int l = 0; l < kNumLevels; ++l) {
    std::vector<std::size_t> distinct;
    distinct.reserve(n_users);
    double cov = 0.0, ent = 0.0;
    for (const auto& um : out.users) {
      distinct.push_back(um.levels[l].distinct);
      cov += um.levels[l].coverage;
      ent += um.levels[l].entropy;
    }
    const auto statuses = bubble_status(distinct);
    for (std::size_t u = 0; u < n_users; ++u) out.users[u].levels[l].status = statuses[u];
    out.mean_coverage[l] = cov / n;
    out.mean_entropy[l] = ent / n;
    out.bubble_proportion[l] = bubble_proportion(statuses);
  }
  double sat = 0.0;
  for (const auto& um : out.users) sat += um.satisfaction;
  out.mean_satisfaction = sat / n;
  return out;
}

std::vector<IterationMetrics> compute_metrics(const std::vector<std::string>& user_ids,
                                              const CategoryIndex& categories,
                                              std::span<const FeedbackRecord> records,
                                              int n_iterations,
                                              const MetricOptions& options) {
  std::vector<IterationMetrics> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n_iterations)));
  for (int i = 0; i < n_iterations; ++i) {
    out.push_back(compute_iteration_metrics(user_ids, categories, records, i, options));
  }
  return out;
}

namespace {

void write_flag_line(std::ostream& out, const MetricOptions& options) {
  out << "# window=" << to_string(options.window)
      << " watched=" << to_string(options.watched) << '\n';
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const IterationMetrics> metrics,
                       const MetricOptions& options) {
  write_flag_line(out, options);
  out << "iteration,user_id,level,coverage,entropy,satisfaction,bubble_status\n";
  for (const auto& it : metrics) {
    for (const auto& um : it.users) {
      for (int l = 0; l < kNumLevels; ++l) {
        const auto& lm = um.levels[l];
        out << fmt::format("{},{},{},{},{},{},{}\n", it.iteration, um.user_id, l + 1,
                           lm.coverage, lm.entropy, um.satisfaction, to_string(lm.status));
      }
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const IterationMetrics> metrics,
                       const MetricOptions& options) {
  write_flag_line(out, options);
  out << "iteration,level,mean_coverage,mean_entropy,mean_satisfaction,bubble_proportion\n";
  for (const auto& it : metrics) {
    for (int l = 0; l < kNumLevels; ++l) {
      out << fmt::format("{},{},{},{},{},{}\n", it.iteration, l + 1, it.mean_coverage[l],
                         it.mean_entropy[l], it.mean_satisfaction, it.bubble_proportion[l]);
    }
  }
}

}  // namespace bubblesim
