#include "bubblesim/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "bubblesim/rng.hpp"

namespace bubblesim {

std::string_view to_string(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::kDefault: return "default";
    case WeightStrategy::kSimple: return "simple";
    case WeightStrategy::kProgressive: return "progressive";
    case WeightStrategy::kReversed: return "reversed";
  }
  return "?";
}

WeightStrategy parse_weight_strategy(std::string_view text) {
  for (auto s : {WeightStrategy::kDefault, WeightStrategy::kSimple,
                 WeightStrategy::kProgressive, WeightStrategy::kReversed}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument(fmt::format("unknown weight strategy '{}'", text));
}

FeedbackWeights FeedbackWeights::of(WeightStrategy s) {
  // Order: watch, like, comment, collect, skip, dislike.
  switch (s) {
    case WeightStrategy::kDefault: return {{1, 2, 2, 2, 0, -1}};
    // Only watch/skip are listed; other positives collapse to watch and
    // dislike collapses to skip.
    case WeightStrategy::kSimple: return {{1, 1, 1, 1, 0, 0}};
    case WeightStrategy::kProgressive: return {{1, 2, 3, 4, -1, -2}};
    case WeightStrategy::kReversed: return {{2, 1, 1, 1, 0, -1}};
  }
  throw std::invalid_argument("unknown weight strategy");
}

std::string_view to_string(LabelMode m) {
  return m == LabelMode::kLiteral ? "literal" : "label-flip";
}

LabelMode parse_label_mode(std::string_view text) {
  if (text == "literal") return LabelMode::kLiteral;
  if (text == "label-flip") return LabelMode::kLabelFlip;
  throw std::invalid_argument(fmt::format("unknown label mode '{}'", text));
}

std::optional<TrainSample> feedback_to_sample(FeedbackType feedback,
                                              const FeedbackWeights& weights,
                                              LabelMode mode) {
  const auto index = static_cast<std::size_t>(feedback);
  if (index >= weights.weight.size()) {
    throw std::invalid_argument("unknown feedback type");
  }
  const double w = weights[feedback];
  if (w == 0.0) return std::nullopt;
  TrainSample s;
  s.source = feedback;
  if (mode == LabelMode::kLiteral || w > 0.0) {
    s.label = 1.0;
    s.weight = w;
  } else {
    s.label = 0.0;
    s.weight = -w;
  }
  return s;
}

double weighted_bce(std::span<const double> predictions,
                    std::span<const TrainSample> samples) {
  if (samples.empty()) throw std::invalid_argument("weighted_bce: empty batch");
  if (predictions.size() != samples.size()) {
    throw std::invalid_argument("weighted_bce: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double p =
        std::clamp(predictions[i], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    const double y = samples[i].label;
    sum += samples[i].weight * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return -sum / static_cast<double>(samples.size());
}

double logit_gradient(double prediction, const TrainSample& sample) {
  if (prediction < kProbabilityEpsilon || prediction > 1.0 - kProbabilityEpsilon) {
    return 0.0;
  }
  return sample.weight * (prediction - sample.label);
}

std::pair<double, MfModel> mf_loss_gradient(const MfModel& model,
                                            std::span<const TrainSample> samples) {
  if (samples.empty()) throw std::invalid_argument("mf_loss_gradient: empty batch");
  auto grad = MfModel::zeros(model.n_users, model.n_items, model.dim);
  std::vector<double> preds;
  preds.reserve(samples.size());
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double p = predict_mf(model, s.user, s.item);
    preds.push_back(p);
    const double g = logit_gradient(p, s) * inv_n;
    grad.global_bias += g;
    grad.user_bias[s.user] += g;
    grad.item_bias[s.item] += g;
    auto gp = grad.user_vec(s.user);
    auto gq = grad.item_vec(s.item);
    const auto pu = model.user_vec(s.user);
    const auto qi = model.item_vec(s.item);
    for (std::size_t f = 0; f < model.dim; ++f) {
      gp[f] += g * qi[f];
      gq[f] += g * pu[f];
    }
  }
  return {weighted_bce(preds, samples), std::move(grad)};
}

std::pair<double, FmModel> fm_loss_gradient(const FmModel& model,
                                            std::span<const TrainSample> samples) {
  if (samples.empty()) throw std::invalid_argument("fm_loss_gradient: empty batch");
  auto grad = FmModel::zeros(model.n_features, model.dim);
  std::vector<double> preds;
  preds.reserve(samples.size());
  std::vector<double> sums(model.dim);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double p = predict_fm(model, s.features);
    preds.push_back(p);
    const double g = logit_gradient(p, s) * inv_n;
    grad.bias += g;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (const auto j : s.features) {
      grad.linear[j] += g;
      const auto v = model.factor(j);
      for (std::size_t f = 0; f < model.dim; ++f) sums[f] += v[f];
    }
    for (const auto j : s.features) {
      const auto v = model.factor(j);
      auto gv = grad.factor(j);
      for (std::size_t f = 0; f < model.dim; ++f) gv[f] += g * (sums[f] - v[f]);
    }
  }
  return {weighted_bce(preds, samples), std::move(grad)};
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "epoch", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

// Shared epoch loop; `step` performs one SGD update and returns the
// sample's clamped loss term (weighted, un-normalised).
template <typename Model, typename Step>
double run_epochs(Model& model, std::span<const TrainSample> samples,
                  const TrainOptions& options, Step step) {
  if (samples.empty()) throw std::invalid_argument("train: empty sample set");
  double mean_loss = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    double total = 0.0;
    for (const auto idx : epoch_order(samples.size(), options.seed, epoch)) {
      total += step(samples[idx]);
    }
    mean_loss = total / static_cast<double>(samples.size());
    if (!std::isfinite(mean_loss)) {
      throw TrainingDiverged(
          fmt::format("non-finite loss {} in epoch {}", mean_loss, epoch + 1));
    }
  }
  if (!model.all_finite()) {
    throw TrainingDiverged("non-finite parameter after training");
  }
  return mean_loss;
}

double sample_loss(double p, const TrainSample& s) {
  const double pc = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return -s.weight * (s.label * std::log(pc) + (1.0 - s.label) * std::log(1.0 - pc));
}

}  // namespace

double train(MfModel& model, std::span<const TrainSample> samples,
             const TrainOptions& options) {
  const double lr = options.learning_rate;
  const double reg = options.l2;
  return run_epochs(model, samples, options, [&](const TrainSample& s) {
    const double p = predict_mf(model, s.user, s.item);
    const double g = logit_gradient(p, s);
    model.global_bias -= lr * g;
    model.user_bias[s.user] -= lr * g;
    model.item_bias[s.item] -= lr * g;
    auto pu = model.user_vec(s.user);
    auto qi = model.item_vec(s.item);
    for (std::size_t f = 0; f < model.dim; ++f) {
      const double pf = pu[f];
      const double qf = qi[f];
      pu[f] -= lr * (g * qf + reg * pf);
      qi[f] -= lr * (g * pf + reg * qf);
    }
    return sample_loss(p, s);
  });
}

double train(FmModel& model, std::span<const TrainSample> samples,
             const TrainOptions& options) {
  const double lr = options.learning_rate;
  const double reg = options.l2;
  std::vector<double> sums(model.dim);
  return run_epochs(model, samples, options, [&](const TrainSample& s) {
    const double p = predict_fm(model, s.features);
    const double g = logit_gradient(p, s);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (const auto j : s.features) {
      const auto v = model.factor(j);
      for (std::size_t f = 0; f < model.dim; ++f) sums[f] += v[f];
    }
    model.bias -= lr * g;
    for (const auto j : s.features) {
      model.linear[j] -= lr * g;
      auto v = model.factor(j);
      for (std::size_t f = 0; f < model.dim; ++f) {
        v[f] -= lr * (g * (sums[f] - v[f]) + reg * v[f]);
      }
    }
    return sample_loss(p, s);
  });
}

}  // namespace bubblesim
