#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "bubblesim/feedback.hpp"
#include "bubblesim/models.hpp"

namespace bubblesim {

inline constexpr double kProbabilityEpsilon = 1e-7;

enum class WeightStrategy { kDefault, kSimple, kProgressive, kReversed };

std::string_view to_string(WeightStrategy s);
WeightStrategy parse_weight_strategy(std::string_view text);

// Scalar loss multiplier per feedback type, indexed like kAllFeedbackTypes.
struct FeedbackWeights {
  std::array<double, 6> weight{};

  double operator[](FeedbackType t) const {
    return weight[static_cast<std::size_t>(t)];
  }
  static FeedbackWeights of(WeightStrategy s);
};

// How a signed weight becomes a (label, weight) pair.
//   kLiteral:   y = 1 and w is the signed strategy weight.
//   kLabelFlip: w < 0 becomes y = 0 with |w|; w > 0 keeps y = 1.
// Zero-weight feedback produces no sample in either mode.
enum class LabelMode { kLiteral, kLabelFlip };

std::string_view to_string(LabelMode m);
LabelMode parse_label_mode(std::string_view text);

struct TrainSample {
  std::size_t user = 0;
  std::size_t item = 0;
  std::vector<FeatureIndex> features;  // FM only
  double label = 1.0;
  double weight = 1.0;
  FeedbackType source = FeedbackType::kJustWatch;
};

// Label and weight only; the caller fills in indices and features.
std::optional<TrainSample> feedback_to_sample(FeedbackType feedback,
                                              const FeedbackWeights& weights,
                                              LabelMode mode);

// -(1/N) sum_i w_i [y_i log p_i + (1 - y_i) log(1 - p_i)], with each p_i
// clamped to [eps, 1 - eps].
double weighted_bce(std::span<const double> predictions,
                    std::span<const TrainSample> samples);

// d loss / d logit for one sample, before the 1/N factor. Zero where the
// clamp is active, matching the clamped loss exactly.
double logit_gradient(double prediction, const TrainSample& sample);

// Batch loss and its gradient with respect to every parameter (same shape as
// the model). No regularisation term.
std::pair<double, MfModel> mf_loss_gradient(const MfModel& model,
                                            std::span<const TrainSample> samples);
std::pair<double, FmModel> fm_loss_gradient(const FmModel& model,
                                            std::span<const TrainSample> samples);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  int epochs = 5;
  double learning_rate = 0.05;
  double l2 = 1e-4;  // on factors only
  std::uint64_t seed = 0;
};

// Per-sample SGD on the weighted loss, visiting samples in a fresh shuffled
// order each epoch. Throws TrainingDiverged if an epoch loss or a parameter
// becomes non-finite. Returns the final epoch's mean loss.
double train(MfModel& model, std::span<const TrainSample> samples,
             const TrainOptions& options);
double train(FmModel& model, std::span<const TrainSample> samples,
             const TrainOptions& options);

}  // namespace bubblesim
