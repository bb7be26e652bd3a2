#include "bubblesim/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "bubblesim/rng.hpp"

namespace bubblesim {

namespace {

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void fill_normal(std::vector<double>& v, double stddev, Rng& rng) {
  for (auto& x : v) x = rng.normal(0.0, stddev);
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// MF

MfModel MfModel::zeros(std::size_t n_users, std::size_t n_items, std::size_t dim) {
  MfModel m;
  m.n_users = n_users;
  m.n_items = n_items;
  m.dim = dim;
  m.user_bias.assign(n_users, 0.0);
  m.item_bias.assign(n_items, 0.0);
  m.user_factors.assign(n_users * dim, 0.0);
  m.item_factors.assign(n_items * dim, 0.0);
  return m;
}

MfModel MfModel::random(std::size_t n_users, std::size_t n_items, std::size_t dim,
                        double init_std, std::uint64_t seed) {
  auto m = zeros(n_users, n_items, dim);
  Rng rng(derive_seed(seed, "mf-init"));
  fill_normal(m.user_factors, init_std, rng);
  fill_normal(m.item_factors, init_std, rng);
  return m;
}

bool MfModel::all_finite() const {
  return std::isfinite(global_bias) && finite_all(user_bias) && finite_all(item_bias) &&
         finite_all(user_factors) && finite_all(item_factors);
}

double mf_logit(const MfModel& m, std::size_t user, std::size_t item) {
  const auto p = m.user_vec(user);
  const auto q = m.item_vec(item);
  double dot = 0.0;
  for (std::size_t f = 0; f < m.dim; ++f) dot += p[f] * q[f];
  return m.global_bias + m.user_bias[user] + m.item_bias[item] + dot;
}

double predict_mf(const MfModel& m, std::size_t user, std::size_t item) {
  if (user >= m.n_users) {
    throw std::out_of_range(fmt::format("user index {} >= {}", user, m.n_users));
  }
  if (item >= m.n_items) {
    throw std::out_of_range(fmt::format("item index {} >= {}", item, m.n_items));
  }
  return sigmoid(mf_logit(m, user, item));
}

// ---------------------------------------------------------------------------
// Feature vocabulary

const std::array<std::string, FeatureVocabulary::kNumFields>&
FeatureVocabulary::field_names() {
  static const std::array<std::string, kNumFields> names = {
      "user", "item", "gender", "city_level", "phone_price",
      "category_l1", "category_l2", "category_l3"};
  return names;
}

FeatureVocabulary::FeatureVocabulary(const std::vector<UserProfile>& users,
                                     const Catalog& catalog) {
  for (const auto& u : users) values_[0].push_back(u.user_id);
  for (const auto& item : catalog.items()) values_[1].push_back(item.item_id);
  values_[2] = {std::string(to_string(Gender::kFemale)),
                std::string(to_string(Gender::kMale))};
  for (int c = 1; c <= kNumCityLevels; ++c) values_[3].push_back(std::to_string(c));
  for (int b = 0; b < kNumPhoneBands; ++b) {
    values_[4].emplace_back(phone_band_label(b));
  }
  for (int level = 1; level <= kNumLevels; ++level) {
    const auto& names = catalog.hierarchy().names(level);
    values_[4 + level].assign(names.begin(), names.end());
  }
  build_offsets();
}

FeatureVocabulary::FeatureVocabulary(
    std::array<std::vector<std::string>, kNumFields> values)
    : values_(std::move(values)) {
  build_offsets();
}

void FeatureVocabulary::build_offsets() {
  FeatureIndex next = 0;
  for (std::size_t f = 0; f < kNumFields; ++f) {
    offsets_[f] = next;
    lookup_[f].clear();
    for (std::size_t k = 0; k < values_[f].size(); ++k) {
      if (!lookup_[f].emplace(values_[f][k], next + static_cast<FeatureIndex>(k)).second) {
        throw std::invalid_argument(fmt::format(
            "duplicate value '{}' in feature field {}", values_[f][k], field_names()[f]));
      }
    }
    next += static_cast<FeatureIndex>(values_[f].size());
  }
  size_ = next;
}

FeatureIndex FeatureVocabulary::index(std::size_t field, const std::string& value) const {
  const auto& table = lookup_.at(field);
  const auto it = table.find(value);
  if (it == table.end()) {
    throw std::out_of_range(
        fmt::format("'{}' not in feature field {}", value, field_names().at(field)));
  }
  return it->second;
}

std::vector<FeatureIndex> FeatureVocabulary::features(const UserProfile& user,
                                                      const VideoItem& item) const {
  return {index(0, user.user_id),
          index(1, item.item_id),
          index(2, std::string(to_string(user.gender))),
          index(3, std::to_string(user.city_level)),
          index(4, std::string(phone_band_label(user.phone_band))),
          index(5, item.category_l1),
          index(6, item.category_l2),
          index(7, item.category_l3)};
}

// ---------------------------------------------------------------------------
// FM

FmModel FmModel::zeros(std::size_t n_features, std::size_t dim) {
  FmModel m;
  m.n_features = n_features;
  m.dim = dim;
  m.linear.assign(n_features, 0.0);
  m.factors.assign(n_features * dim, 0.0);
  return m;
}

FmModel FmModel::random(std::size_t n_features, std::size_t dim, double init_std,
                        std::uint64_t seed) {
  auto m = zeros(n_features, dim);
  Rng rng(derive_seed(seed, "fm-init"));
  fill_normal(m.factors, init_std, rng);
  return m;
}

bool FmModel::all_finite() const {
  return std::isfinite(bias) && finite_all(linear) && finite_all(factors);
}

double fm_logit(const FmModel& m, std::span<const FeatureIndex> active) {
  double z = m.bias;
  for (const auto j : active) z += m.linear[j];
  double pair = 0.0;
  for (std::size_t f = 0; f < m.dim; ++f) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto j : active) {
      const double v = m.factors[j * m.dim + f];
      sum += v;
      sum_sq += v * v;
    }
    pair += sum * sum - sum_sq;
  }
  return z + 0.5 * pair;
}

double predict_fm(const FmModel& m, std::span<const FeatureIndex> active) {
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (active[a] >= m.n_features) {
      throw std::out_of_range(
          fmt::format("feature index {} >= {}", active[a], m.n_features));
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (active[a] == active[b]) {
        throw std::invalid_argument(fmt::format("duplicate feature index {}", active[a]));
      }
    }
  }
  return sigmoid(fm_logit(m, active));
}

}  // namespace bubblesim
