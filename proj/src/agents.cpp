#include "bubblesim/agents.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/core.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace bubblesim {

double rule_affinity(const UserProfile& profile, const AgentHistory& history,
                     const VideoItem& item) {
  using C = RuleCoefficients;
  double a = C::kBase;
  const auto& interests = profile.initial_interests;
  if (std::find(interests.begin(), interests.end(), item.category_l1) !=
      interests.end()) {
    a += C::kInitialInterest;
  }
  bool l1_seen = false;
  bool l2_liked = false;
  bool l3_liked = false;
  for (const auto& e : history.entries()) {
    l1_seen = l1_seen || e.categories[0] == item.category_l1;
    if (is_positive(e.feedback)) {
      l2_liked = l2_liked || e.categories[1] == item.category_l2;
      l3_liked = l3_liked || e.categories[2] == item.category_l3;
    }
  }
  if (l2_liked) a += C::kSeenLevel2;
  if (l3_liked) a += C::kSeenLevel3;
  if (!l1_seen) {
    if (const auto* t = std::get_if<Personality>(&profile.motivation)) {
      a += C::kNovelty * t->openness;
    } else if (std::get<Gratification>(profile.motivation) ==
               Gratification::kBrowsingVarietySeeking) {
      a += C::kNovelty;
    }
  }
  return std::min(a, 1.0);
}

FeedbackType feedback_from_draw(double a, double u) {
  using C = RuleCoefficients;
  double edge = a * C::kWatchShare;
  if (u < edge) return FeedbackType::kJustWatch;
  edge += a * C::kLikeShare;
  if (u < edge) return FeedbackType::kWatchAndLike;
  edge += a * C::kCommentShare;
  if (u < edge) return FeedbackType::kWatchAndComment;
  // Close the positive block at exactly a so P(positive) == a.
  if (u < a) return FeedbackType::kWatchAndCollect;
  if (u < a + (1.0 - a) * C::kSkipShare) return FeedbackType::kSkip;
  return FeedbackType::kDislike;
}

Decision rule_decide(const UserProfile& profile, const AgentHistory& history,
                     const VideoItem& item, Rng& rng) {
  const double a = rule_affinity(profile, history, item);
  const double u = rng.uniform01();
  return {feedback_from_draw(a, u), fmt::format("affinity {:.2f}", a)};
}

Decision RuleAgent::decide(const AgentRequest& r) {
  return rule_decide(r.profile, r.history, r.item, r.rng);
}

// ---------------------------------------------------------------------------

LlmAgent::LlmAgent(std::shared_ptr<ChatTransport> transport, RetryPolicy policy,
                   std::filesystem::path transcript_dir)
    : transport_(std::move(transport)),
      policy_(policy),
      transcript_dir_(std::move(transcript_dir)) {
  if (!transport_) throw std::invalid_argument("LlmAgent: null transport");
  if (!transcript_dir_.empty()) std::filesystem::create_directories(transcript_dir_);
}

Decision LlmAgent::decide(const AgentRequest& r) {
  const auto prompt =
      build_prompt(render_profile(r.profile), r.history, summarize_item(r.item));
  auto outcome = llm_decide(*transport_, prompt, policy_);
  if (!transcript_dir_.empty()) {
    nlohmann::ordered_json line;
    line["user_id"] = r.profile.user_id;
    line["iteration"] = r.iteration;
    line["item_id"] = r.item.item_id;
    line["prompt"] = prompt;
    line["attempts"] = nlohmann::ordered_json::array();
    for (const auto& a : outcome.attempts) {
      line["attempts"].push_back({{"response", a.response}, {"error", a.error}});
    }
    line["feedback"] = std::string(feedback_label(outcome.decision.feedback));
    line["explanation"] = outcome.decision.explanation;
    line["fell_back"] = outcome.fell_back;
    std::ofstream out(transcript_dir_ / (r.profile.user_id + ".jsonl"),
                      std::ios::binary | std::ios::app);
    out << line.dump() << '\n';
  }
  return outcome.decision;
}

// ---------------------------------------------------------------------------

TranscriptAgent::TranscriptAgent(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error(fmt::format("transcript dir '{}' not found", dir.string()));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
      ++line_no;
      if (text.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(text);
        const auto label = parse_feedback_label(j.at("feedback").get<std::string>());
        if (!label) throw std::runtime_error("unknown feedback label");
        Entry entry{j.at("prompt").get<std::string>(),
                    {*label, j.at("explanation").get<std::string>()}};
        entries_.insert_or_assign({j.at("user_id").get<std::string>(),
                                   j.at("iteration").get<int>(),
                                   j.at("item_id").get<std::string>()},
                                  std::move(entry));
      } catch (const std::exception& e) {
        throw std::runtime_error(
            fmt::format("{}:{}: bad transcript line: {}", file.string(), line_no, e.what()));
      }
    }
  }
}

Decision TranscriptAgent::decide(const AgentRequest& r) {
  const auto it = entries_.find({r.profile.user_id, r.iteration, r.item.item_id});
  if (it == entries_.end()) {
    throw std::runtime_error(fmt::format("no transcript for user {} iteration {} item {}",
                                         r.profile.user_id, r.iteration, r.item.item_id));
  }
  const auto prompt =
      build_prompt(render_profile(r.profile), r.history, summarize_item(r.item));
  if (prompt != it->second.prompt) {
    throw std::runtime_error(fmt::format(
        "transcript replay diverged for user {} iteration {} item {}",
        r.profile.user_id, r.iteration, r.item.item_id));
  }
  return it->second.decision;
}

}  // namespace bubblesim
