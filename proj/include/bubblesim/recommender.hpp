#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bubblesim/models.hpp"
#include "bubblesim/serving.hpp"
#include "bubblesim/training.hpp"

namespace bubblesim {

enum class ModelKind { kMf, kFm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// Checkpoints are JSON with doubles in shortest round-trip form; loading
// reproduces every parameter bit for bit.
nlohmann::ordered_json checkpoint_json(const MfModel& model);
nlohmann::ordered_json checkpoint_json(const FmModel& model,
                                       const FeatureVocabulary& vocabulary);
MfModel mf_from_checkpoint(const nlohmann::json& j);
std::pair<FmModel, FeatureVocabulary> fm_from_checkpoint(const nlohmann::json& j);

// A scoring model bound to one user population and catalog. Users and
// items are addressed by their position in the profile list / catalog.
class Recommender {
 public:
  Recommender(ModelKind kind, const std::vector<UserProfile>& users,
              const Catalog& catalog, std::size_t dim, double init_std,
              std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }

  // Logit for every catalog item; ranking by logit equals ranking by
  // probability.
  std::vector<double> scores(std::size_t user) const;
  double predict(std::size_t user, std::size_t item) const;

  std::vector<std::size_t> recommend(std::size_t user, std::size_t k,
                                     const ItemSet& exclusions,
                                     const Catalog& catalog) const;

  // Fills indices and, for FM, the active feature list.
  void bind(TrainSample& sample, std::size_t user, std::size_t item) const;

  double train(std::span<const TrainSample> samples, const TrainOptions& options);

  const MfModel& mf() const { return std::get<MfModel>(model_); }
  const FmModel& fm() const { return std::get<FmModel>(model_); }
  const FeatureVocabulary& vocabulary() const { return vocabulary_; }

  void save(const std::filesystem::path& path) const;

 private:
  std::vector<FeatureIndex> features(std::size_t user, std::size_t item) const;

  ModelKind kind_;
  std::size_t n_users_;
  std::size_t n_items_;
  std::variant<MfModel, FmModel> model_;
  FeatureVocabulary vocabulary_;
  // Field-ordered halves of the FM feature vector.
  std::vector<std::array<FeatureIndex, 3>> user_fields_;  // gender, city, phone
  std::vector<std::array<FeatureIndex, 3>> item_fields_;  // l1, l2, l3
};

}  // namespace bubblesim
