#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <tuple>

#include "bubblesim/catalog.hpp"
#include "bubblesim/chat_client.hpp"
#include "bubblesim/personas.hpp"
#include "bubblesim/prompt.hpp"
#include "bubblesim/rng.hpp"

namespace bubblesim {

// Rule-agent constants.
struct RuleCoefficients {
  static constexpr double kBase = 0.15;
  static constexpr double kInitialInterest = 0.35;
  static constexpr double kSeenLevel2 = 0.15;
  static constexpr double kSeenLevel3 = 0.10;
  static constexpr double kNovelty = 0.10;
  // Shares of the positive mass a: watch, like, comment, collect.
  static constexpr double kWatchShare = 0.55;
  static constexpr double kLikeShare = 0.25;
  static constexpr double kCommentShare = 0.10;
  static constexpr double kCollectShare = 0.10;
  // Share of the negative mass 1 - a going to Skip; the rest is Dislike.
  static constexpr double kSkipShare = 0.80;
};

// Interest score in [0, 1] of `profile` for `item` given its history.
double rule_affinity(const UserProfile& profile, const AgentHistory& history,
                     const VideoItem& item);

// Maps a uniform draw u in [0, 1) onto a feedback type for affinity a.
// P(positive) = a.
FeedbackType feedback_from_draw(double affinity, double u);

// Draws exactly one uniform from `rng`.
Decision rule_decide(const UserProfile& profile, const AgentHistory& history,
                     const VideoItem& item, Rng& rng);

struct AgentRequest {
  const UserProfile& profile;
  const AgentHistory& history;
  const VideoItem& item;
  int iteration;
  Rng& rng;  // per-user stream
};

// Decisions for different users may be requested concurrently; requests for
// one user always arrive sequentially.
class FeedbackAgent {
 public:
  virtual ~FeedbackAgent() = default;
  virtual Decision decide(const AgentRequest& request) = 0;
};

class RuleAgent : public FeedbackAgent {
 public:
  Decision decide(const AgentRequest& request) override;
};

// Chat-model backed agent. When `transcript_dir` is set every prompt and
// raw reply is appended to <transcript_dir>/<user_id>.jsonl.
class LlmAgent : public FeedbackAgent {
 public:
  LlmAgent(std::shared_ptr<ChatTransport> transport, RetryPolicy policy,
           std::filesystem::path transcript_dir = {});
  Decision decide(const AgentRequest& request) override;

 private:
  std::shared_ptr<ChatTransport> transport_;
  RetryPolicy policy_;
  std::filesystem::path transcript_dir_;
};

// Replays decisions recorded by LlmAgent. The prompt rebuilt for each
// request must match the recorded one, otherwise the replay has diverged
// and std::runtime_error is thrown.
class TranscriptAgent : public FeedbackAgent {
 public:
  explicit TranscriptAgent(const std::filesystem::path& transcript_dir);
  Decision decide(const AgentRequest& request) override;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string prompt;
    Decision decision;
  };
  std::map<std::tuple<std::string, int, std::string>, Entry> entries_;
};

}  // namespace bubblesim
