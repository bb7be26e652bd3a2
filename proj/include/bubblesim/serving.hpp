#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "bubblesim/catalog.hpp"
#include "bubblesim/models.hpp"
#include "bubblesim/personas.hpp"
#include "bubblesim/rng.hpp"

namespace bubblesim {

class InsufficientCandidates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ItemSet = std::unordered_set<std::size_t>;

// Top-k catalog indices by descending score, ties broken by ascending
// item_id. `scores` has one entry per catalog item.
std::vector<std::size_t> recommend(std::span<const double> scores,
                                   const Catalog& catalog, std::size_t k,
                                   const ItemSet& exclusions);

std::vector<std::size_t> recommend(const MfModel& model, std::size_t user,
                                   std::size_t k, const ItemSet& exclusions,
                                   const Catalog& catalog);

// round(percent / 100 * k) with ties to even, computed exactly.
std::size_t aligned_count(int percent, std::size_t k);

bool is_valid_cscmr(int percent);

// First-iteration slate: aligned_count(cscmr, k) items whose level-1 category
// is one of the user's initial interests, the rest from other items, both
// drawn without replacement and returned in shuffled order. A short pool is
// backfilled from the other one with a warning.
std::vector<std::size_t> cold_start_slate(const UserProfile& profile,
                                          const Catalog& catalog, int cscmr,
                                          std::size_t k, Rng& rng);

}  // namespace bubblesim
