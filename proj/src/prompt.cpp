#include "bubblesim/prompt.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/core.h>

namespace bubblesim {

namespace {

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

bool is_decoration(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '"' ||
         c == '\'' || c == '`' || c == '.' || c == '[' || c == ']' || c == '<' ||
         c == '>';
}

std::string_view strip_decoration(std::string_view s) {
  while (!s.empty() && is_decoration(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_decoration(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view trim_ws(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string one_line(std::string_view text) {
  std::string out;
  for (const char c : text) {
    if (c == '\n') {
      out += "; ";
    } else {
      out += c;
    }
  }
  return out;
}

constexpr std::string_view kFeedbackMarker = "FEEDBACK:";
constexpr std::string_view kReasonMarker = "REASON:";

}  // namespace

AgentHistory::AgentHistory(std::size_t window) : window_(window) {}

void AgentHistory::push(HistoryEntry entry) {
  if (window_ == 0) return;
  entries_.push_back(std::move(entry));
  while (entries_.size() > window_) entries_.pop_front();
}

void AgentHistory::push(const VideoItem& item, FeedbackType feedback) {
  push(HistoryEntry{item.item_id,
                    {item.category_l1, item.category_l2, item.category_l3},
                    summarize_item(item),
                    feedback});
}

std::string build_prompt(std::string_view profile_text, const AgentHistory& history,
                         std::string_view item_summary) {
  std::string out;
  out += "You are a user of a short-video platform. This is your profile:\n";
  out += profile_text;
  if (!out.ends_with('\n')) out += '\n';
  out += "\nYour recent watch history and feedback, oldest first:\n";
  if (history.empty()) {
    out += "(no videos watched yet)\n";
  } else {
    std::size_t n = 0;
    for (const auto& e : history.entries()) {
      out += fmt::format("{}. {} -> {}\n", ++n, one_line(e.summary),
                         feedback_label(e.feedback));
    }
  }
  out += "\nThe platform now shows you this video:\n";
  out += item_summary;
  out += "\n\nDecide how you react to this video, considering its content, your "
         "demographics, your motivation, your initial interested categories and "
         "your watch history.\n";
  out += "Allowed feedback (choose exactly one):\n";
  for (const auto t : kAllFeedbackTypes) {
    out += fmt::format("- {}\n", feedback_label(t));
  }
  out += "\nAnswer in exactly this layout, with nothing else:\n"
         "FEEDBACK: <one of the allowed feedback labels>\n"
         "REASON: <one sentence explaining your choice>\n";
  return out;
}

Decision parse_response(std::string_view text) {
  const std::string upper = upper_ascii(text);
  std::size_t pos = upper.find(kFeedbackMarker);
  while (pos != std::string::npos) {
    const std::size_t start = pos + kFeedbackMarker.size();
    std::size_t end = std::min({upper.find('\n', start), upper.find(kReasonMarker, start),
                                upper.find(kFeedbackMarker, start)});
    if (end == std::string::npos) end = upper.size();
    const auto candidate = strip_decoration(text.substr(start, end - start));
    if (const auto label = parse_feedback_label(candidate)) {
      Decision d;
      d.feedback = *label;
      if (const auto r = upper.find(kReasonMarker, start); r != std::string::npos) {
        const std::size_t rstart = r + kReasonMarker.size();
        std::size_t rend = upper.find(kFeedbackMarker, rstart);
        if (rend == std::string::npos) rend = upper.size();
        auto reason = trim_ws(text.substr(rstart, rend - rstart));
        while (!reason.empty() && reason.front() == '*') reason.remove_prefix(1);
        d.explanation = std::string(trim_ws(reason));
      }
      return d;
    }
    pos = upper.find(kFeedbackMarker, start);
  }
  throw UnparseableResponse("no recognizable FEEDBACK label in response");
}

}  // namespace bubblesim
