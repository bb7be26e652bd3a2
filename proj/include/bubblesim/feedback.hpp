#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace bubblesim {

enum class FeedbackType {
  kJustWatch,
  kWatchAndLike,
  kWatchAndComment,
  kWatchAndCollect,
  kSkip,
  kDislike,
};

inline constexpr std::array<FeedbackType, 6> kAllFeedbackTypes = {
    FeedbackType::kJustWatch,       FeedbackType::kWatchAndLike,
    FeedbackType::kWatchAndComment, FeedbackType::kWatchAndCollect,
    FeedbackType::kSkip,            FeedbackType::kDislike};

constexpr bool is_positive(FeedbackType t) {
  return t != FeedbackType::kSkip && t != FeedbackType::kDislike;
}

// Canonical upper-case label, e.g. "WATCH AND LIKE".
std::string_view feedback_label(FeedbackType t);

// Case-insensitive; spaces and underscores are interchangeable and runs of
// whitespace collapse. Returns nullopt for anything else.
std::optional<FeedbackType> parse_feedback_label(std::string_view text);

struct FeedbackRecord {
  std::string user_id;
  std::string item_id;
  int iteration = 0;
  FeedbackType feedback = FeedbackType::kSkip;
  std::string explanation;

  bool operator==(const FeedbackRecord&) const = default;
};

}  // namespace bubblesim
