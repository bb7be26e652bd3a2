#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bubblesim/catalog.hpp"
#include "bubblesim/personas.hpp"

namespace bubblesim {

using FeatureIndex = std::uint32_t;

double sigmoid(double z);

// Matrix factorisation: score = b + b_u + b_i + <p_u, q_i>.
struct MfModel {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t dim = 0;
  double global_bias = 0.0;
  std::vector<double> user_bias;     // n_users
  std::vector<double> item_bias;     // n_items
  std::vector<double> user_factors;  // n_users x dim, row-major
  std::vector<double> item_factors;  // n_items x dim, row-major

  static MfModel zeros(std::size_t n_users, std::size_t n_items, std::size_t dim);
  // Factors ~ Normal(0, init_std), biases zero.
  static MfModel random(std::size_t n_users, std::size_t n_items, std::size_t dim,
                        double init_std, std::uint64_t seed);

  std::span<double> user_vec(std::size_t u) {
    return {user_factors.data() + u * dim, dim};
  }
  std::span<const double> user_vec(std::size_t u) const {
    return {user_factors.data() + u * dim, dim};
  }
  std::span<double> item_vec(std::size_t i) {
    return {item_factors.data() + i * dim, dim};
  }
  std::span<const double> item_vec(std::size_t i) const {
    return {item_factors.data() + i * dim, dim};
  }

  bool all_finite() const;
  bool operator==(const MfModel&) const = default;
};

// Raw score before the sigmoid. No range checks.
double mf_logit(const MfModel& model, std::size_t user, std::size_t item);
// Throws std::out_of_range for bad indices.
double predict_mf(const MfModel& model, std::size_t user, std::size_t item);

// Maps the categorical fields used by the factorisation machine onto one
// contiguous index space. Field order: user, item, gender, city_level,
// phone_price, category_l1, category_l2, category_l3.
class FeatureVocabulary {
 public:
  static constexpr std::size_t kNumFields = 8;
  static const std::array<std::string, kNumFields>& field_names();

  FeatureVocabulary() = default;
  FeatureVocabulary(const std::vector<UserProfile>& users, const Catalog& catalog);
  // Rebuilds from explicit per-field value lists (checkpoint loading).
  explicit FeatureVocabulary(std::array<std::vector<std::string>, kNumFields> values);

  std::size_t size() const { return size_; }
  const std::vector<std::string>& values(std::size_t field) const {
    return values_.at(field);
  }
  FeatureIndex index(std::size_t field, const std::string& value) const;
  FeatureIndex offset(std::size_t field) const { return offsets_.at(field); }

  // The eight active indices for one (user, item) pair, in field order.
  std::vector<FeatureIndex> features(const UserProfile& user,
                                     const VideoItem& item) const;

  bool operator==(const FeatureVocabulary& o) const { return values_ == o.values_; }

 private:
  void build_offsets();

  std::array<std::vector<std::string>, kNumFields> values_;
  std::array<FeatureIndex, kNumFields> offsets_{};
  std::array<std::unordered_map<std::string, FeatureIndex>, kNumFields> lookup_;
  std::size_t size_ = 0;
};

// Second-order factorisation machine over binary features.
struct FmModel {
  std::size_t n_features = 0;
  std::size_t dim = 0;
  double bias = 0.0;             // w0
  std::vector<double> linear;    // n_features
  std::vector<double> factors;   // n_features x dim, row-major

  static FmModel zeros(std::size_t n_features, std::size_t dim);
  static FmModel random(std::size_t n_features, std::size_t dim, double init_std,
                        std::uint64_t seed);

  std::span<double> factor(std::size_t j) { return {factors.data() + j * dim, dim}; }
  std::span<const double> factor(std::size_t j) const {
    return {factors.data() + j * dim, dim};
  }

  bool all_finite() const;
  bool operator==(const FmModel&) const = default;
};

// Raw score using the O(d m) identity
//   sum_{j<k} <v_j, v_k> = 1/2 sum_f [(sum_j v_jf)^2 - sum_j v_jf^2].
// No validation.
double fm_logit(const FmModel& model, std::span<const FeatureIndex> active);
// Throws std::out_of_range for an index >= n_features and
// std::invalid_argument for a repeated index.
double predict_fm(const FmModel& model, std::span<const FeatureIndex> active);

}  // namespace bubblesim
