#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bubblesim/catalog.hpp"
#include "bubblesim/feedback.hpp"

namespace bubblesim {

struct Decision {
  FeedbackType feedback = FeedbackType::kSkip;
  std::string explanation;

  bool operator==(const Decision&) const = default;
};

struct HistoryEntry {
  std::string item_id;
  std::array<std::string, kNumLevels> categories;
  std::string summary;
  FeedbackType feedback = FeedbackType::kSkip;
};

// Chronological watch history of one user, truncated to the most recent
// `window` entries.
class AgentHistory {
 public:
  static constexpr std::size_t kDefaultWindow = 20;

  explicit AgentHistory(std::size_t window = kDefaultWindow);

  void push(HistoryEntry entry);
  void push(const VideoItem& item, FeedbackType feedback);

  const std::deque<HistoryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::deque<HistoryEntry> entries_;
};

std::string build_prompt(std::string_view profile_text, const AgentHistory& history,
                         std::string_view item_summary);

class UnparseableResponse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finds the first "FEEDBACK:" marker followed by a valid label and the
// "REASON:" text after it. Surrounding prose is ignored.
Decision parse_response(std::string_view text);

}  // namespace bubblesim
