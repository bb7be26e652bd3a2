#include "bubblesim/recommender.hpp"

#include <fstream>

#include <fmt/core.h>

namespace bubblesim {

using ojson = nlohmann::ordered_json;

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kMf ? "mf" : "fm"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "mf") return ModelKind::kMf;
  if (text == "fm") return ModelKind::kFm;
  throw std::invalid_argument(fmt::format("unknown model kind '{}'", text));
}

ojson checkpoint_json(const MfModel& m) {
  ojson j;
  j["kind"] = "mf";
  j["dim"] = m.dim;
  j["n_users"] = m.n_users;
  j["n_items"] = m.n_items;
  j["global_bias"] = m.global_bias;
  j["user_bias"] = m.user_bias;
  j["item_bias"] = m.item_bias;
  j["user_factors"] = m.user_factors;
  j["item_factors"] = m.item_factors;
  return j;
}

ojson checkpoint_json(const FmModel& m, const FeatureVocabulary& vocab) {
  ojson j;
  j["kind"] = "fm";
  j["dim"] = m.dim;
  j["n_features"] = m.n_features;
  ojson fields;
  for (std::size_t f = 0; f < FeatureVocabulary::kNumFields; ++f) {
    fields[FeatureVocabulary::field_names()[f]] = vocab.values(f);
  }
  j["vocabulary"] = fields;
  j["bias"] = m.bias;
  j["linear"] = m.linear;
  j["factors"] = m.factors;
  return j;
}

namespace {

void expect_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(
        fmt::format("checkpoint: '{}' has {} values, expected {}", what, v.size(), n));
  }
}

}  // namespace

MfModel mf_from_checkpoint(const nlohmann::json& j) {
  if (j.at("kind") != "mf") throw std::invalid_argument("checkpoint is not an MF model");
  MfModel m;
  m.dim = j.at("dim").get<std::size_t>();
  m.n_users = j.at("n_users").get<std::size_t>();
  m.n_items = j.at("n_items").get<std::size_t>();
  m.global_bias = j.at("global_bias").get<double>();
  m.user_bias = j.at("user_bias").get<std::vector<double>>();
  m.item_bias = j.at("item_bias").get<std::vector<double>>();
  m.user_factors = j.at("user_factors").get<std::vector<double>>();
  m.item_factors = j.at("item_factors").get<std::vector<double>>();
  expect_size(m.user_bias, m.n_users, "user_bias");
  expect_size(m.item_bias, m.n_items, "item_bias");
  expect_size(m.user_factors, m.n_users * m.dim, "user_factors");
  expect_size(m.item_factors, m.n_items * m.dim, "item_factors");
  return m;
}

std::pair<FmModel, FeatureVocabulary> fm_from_checkpoint(const nlohmann::json& j) {
  if (j.at("kind") != "fm") throw std::invalid_argument("checkpoint is not an FM model");
  std::array<std::vector<std::string>, FeatureVocabulary::kNumFields> values;
  for (std::size_t f = 0; f < FeatureVocabulary::kNumFields; ++f) {
    values[f] = j.at("vocabulary")
                    .at(FeatureVocabulary::field_names()[f])
                    .get<std::vector<std::string>>();
  }
  FeatureVocabulary vocab(std::move(values));
  FmModel m;
  m.dim = j.at("dim").get<std::size_t>();
  m.n_features = j.at("n_features").get<std::size_t>();
  if (m.n_features != vocab.size()) {
    throw std::invalid_argument("checkpoint: vocabulary size does not match n_features");
  }
  m.bias = j.at("bias").get<double>();
  m.linear = j.at("linear").get<std::vector<double>>();
  m.factors = j.at("factors").get<std::vector<double>>();
  expect_size(m.linear, m.n_features, "linear");
  expect_size(m.factors, m.n_features * m.dim, "factors");
  return {std::move(m), std::move(vocab)};
}

// ---------------------------------------------------------------------------

Recommender::Recommender(ModelKind kind, const std::vector<UserProfile>& users,
                         const Catalog& catalog, std::size_t dim, double init_std,
                         std::uint64_t seed)
    : kind_(kind), n_users_(users.size()), n_items_(catalog.size()) {
  if (kind == ModelKind::kMf) {
    model_ = MfModel::random(n_users_, n_items_, dim, init_std, seed);
    return;
  }
  vocabulary_ = FeatureVocabulary(users, catalog);
  model_ = FmModel::random(vocabulary_.size(), dim, init_std, seed);
  for (const auto& u : users) {
    user_fields_.push_back({vocabulary_.index(2, std::string(to_string(u.gender))),
                            vocabulary_.index(3, std::to_string(u.city_level)),
                            vocabulary_.index(4, std::string(phone_band_label(u.phone_band)))});
  }
  for (const auto& item : catalog.items()) {
    item_fields_.push_back({vocabulary_.index(5, item.category_l1),
                            vocabulary_.index(6, item.category_l2),
                            vocabulary_.index(7, item.category_l3)});
  }
}

std::vector<FeatureIndex> Recommender::features(std::size_t user, std::size_t item) const {
  const auto& uf = user_fields_.at(user);
  const auto& itf = item_fields_.at(item);
  return {vocabulary_.offset(0) + static_cast<FeatureIndex>(user),
          vocabulary_.offset(1) + static_cast<FeatureIndex>(item),
          uf[0], uf[1], uf[2], itf[0], itf[1], itf[2]};
}

std::vector<double> Recommender::scores(std::size_t user) const {
  if (user >= n_users_) {
    throw std::out_of_range(fmt::format("user index {} >= {}", user, n_users_));
  }
  std::vector<double> out(n_items_);
  if (kind_ == ModelKind::kMf) {
    const auto& m = mf();
    for (std::size_t i = 0; i < n_items_; ++i) out[i] = mf_logit(m, user, i);
  } else {
    const auto& m = fm();
    for (std::size_t i = 0; i < n_items_; ++i) out[i] = fm_logit(m, features(user, i));
  }
  return out;
}

double Recommender::predict(std::size_t user, std::size_t item) const {
  if (kind_ == ModelKind::kMf) return predict_mf(mf(), user, item);
  if (user >= n_users_ || item >= n_items_) {
    throw std::out_of_range("Recommender::predict: index out of range");
  }
  return predict_fm(fm(), features(user, item));
}

std::vector<std::size_t> Recommender::recommend(std::size_t user, std::size_t k,
                                                const ItemSet& exclusions,
                                                const Catalog& catalog) const {
  const auto s = scores(user);
  return bubblesim::recommend(s, catalog, k, exclusions);
}

void Recommender::bind(TrainSample& sample, std::size_t user, std::size_t item) const {
  if (user >= n_users_ || item >= n_items_) {
    throw std::out_of_range("Recommender::bind: index out of range");
  }
  sample.user = user;
  sample.item = item;
  if (kind_ == ModelKind::kFm) sample.features = features(user, item);
}

double Recommender::train(std::span<const TrainSample> samples,
                          const TrainOptions& options) {
  return std::visit([&](auto& m) { return bubblesim::train(m, samples, options); }, model_);
}

void Recommender::save(const std::filesystem::path& path) const {
  const auto j = kind_ == ModelKind::kMf ? checkpoint_json(mf())
                                         : checkpoint_json(fm(), vocabulary_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump() << '\n';
}

}  // namespace bubblesim
