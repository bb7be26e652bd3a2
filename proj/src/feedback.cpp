#include "bubblesim/feedback.hpp"

#include <cctype>

namespace bubblesim {

namespace {

constexpr std::array<std::string_view, 6> kLabels = {
    "JUST WATCH", "WATCH AND LIKE", "WATCH AND COMMENT",
    "WATCH AND COLLECT", "SKIP", "DISLIKE"};

}  // namespace

std::string_view feedback_label(FeedbackType t) {
  return kLabels[static_cast<std::size_t>(t)];
}

std::optional<FeedbackType> parse_feedback_label(std::string_view text) {
  std::string norm;
  bool pending_space = false;
  for (const char raw : text) {
    const char c = raw == '_' ? ' ' : raw;
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !norm.empty();
      continue;
    }
    if (pending_space) norm += ' ';
    pending_space = false;
    norm += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (norm == kLabels[i]) return static_cast<FeedbackType>(i);
  }
  return std::nullopt;
}

}  // namespace bubblesim
