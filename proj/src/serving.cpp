#include "bubblesim/serving.hpp"

#include <algorithm>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

namespace bubblesim {

std::vector<std::size_t> recommend(std::span<const double> scores,
                                   const Catalog& catalog, std::size_t k,
                                   const ItemSet& exclusions) {
  if (k == 0) throw std::invalid_argument("recommend: k must be >= 1");
  if (scores.size() != catalog.size()) {
    throw std::invalid_argument("recommend: one score per catalog item required");
  }
  std::vector<std::size_t> candidates;
  candidates.reserve(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!exclusions.contains(i)) candidates.push_back(i);
  }
  if (candidates.size() < k) {
    throw InsufficientCandidates(fmt::format(
        "recommend: {} candidates left, {} requested", candidates.size(), k));
  }
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return catalog.item(a).item_id < catalog.item(b).item_id;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);
  candidates.resize(k);
  return candidates;
}

std::vector<std::size_t> recommend(const MfModel& model, std::size_t user,
                                   std::size_t k, const ItemSet& exclusions,
                                   const Catalog& catalog) {
  if (user >= model.n_users) {
    throw std::out_of_range(fmt::format("user index {} >= {}", user, model.n_users));
  }
  if (model.n_items != catalog.size()) {
    throw std::invalid_argument("recommend: model and catalog sizes differ");
  }
  std::vector<double> scores(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) scores[i] = mf_logit(model, user, i);
  return recommend(scores, catalog, k, exclusions);
}

std::size_t aligned_count(int percent, std::size_t k) {
  const std::size_t num = static_cast<std::size_t>(percent) * k;
  std::size_t q = num / 100;
  const std::size_t r = num % 100;
  if (r > 50 || (r == 50 && q % 2 == 1)) ++q;
  return q;
}

bool is_valid_cscmr(int percent) {
  return percent == 0 || percent == 25 || percent == 50 || percent == 75 ||
         percent == 100;
}

std::vector<std::size_t> cold_start_slate(const UserProfile& profile,
                                          const Catalog& catalog, int cscmr,
                                          std::size_t k, Rng& rng) {
  if (!is_valid_cscmr(cscmr)) {
    throw std::invalid_argument(
        fmt::format("cscmr must be one of 0, 25, 50, 75, 100 (got {})", cscmr));
  }
  if (catalog.size() < k) {
    throw InsufficientCandidates(
        fmt::format("cold start: catalog has {} items, slate needs {}", catalog.size(), k));
  }
  const auto& interests = profile.initial_interests;
  std::vector<std::size_t> aligned, other;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& l1 = catalog.item(i).category_l1;
    if (std::find(interests.begin(), interests.end(), l1) != interests.end()) {
      aligned.push_back(i);
    } else {
      other.push_back(i);
    }
  }
  std::size_t want_aligned = aligned_count(cscmr, k);
  std::size_t want_other = k - want_aligned;
  if (aligned.size() < want_aligned) {
    spdlog::warn("cold start for {}: only {} aligned items for {} slots; backfilling",
                 profile.user_id, aligned.size(), want_aligned);
    want_other += want_aligned - aligned.size();
    want_aligned = aligned.size();
  } else if (other.size() < want_other) {
    spdlog::warn("cold start for {}: only {} non-aligned items for {} slots; backfilling",
                 profile.user_id, other.size(), want_other);
    want_aligned += want_other - other.size();
    want_other = other.size();
  }
  auto slate = rng.sample(std::move(aligned), want_aligned);
  const auto rest = rng.sample(std::move(other), want_other);
  slate.insert(slate.end(), rest.begin(), rest.end());
  rng.shuffle(slate);
  return slate;
}

}  // namespace bubblesim
