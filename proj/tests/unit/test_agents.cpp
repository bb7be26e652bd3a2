#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <thread>

#include <httplib.h>

#include "bubblesim/agents.hpp"
#include "bubblesim/chat_client.hpp"
#include "support.hpp"

using namespace bubblesim;

namespace {

// Replays a fixed list of replies; an empty reply simulates a transport error.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::deque<std::string> replies) : replies_(std::move(replies)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls;
    last_messages = messages;
    if (replies_.empty()) throw TransportError("connection refused");
    std::string reply = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    if (reply.empty()) throw TransportError("connection refused");
    return reply;
  }

  int calls = 0;
  std::vector<ChatMessage> last_messages;

 private:
  std::deque<std::string> replies_;
};

RetryPolicy no_wait(int retries) {
  RetryPolicy p;
  p.retries = retries;
  p.initial_backoff = std::chrono::milliseconds(0);
  return p;
}

const auto kNoSleep = [](std::chrono::milliseconds) {};

VideoItem item_in(const std::string& l1, const std::string& l2 = "x2",
                  const std::string& l3 = "x3") {
  return testing::make_item("v", l1, l2, l3);
}

}  // namespace

TEST_CASE("feedback labels round-trip through the parser") {
  for (const auto t : kAllFeedbackTypes) {
    CHECK(parse_feedback_label(feedback_label(t)) == t);
  }
  CHECK(parse_feedback_label("watch_and_like") == FeedbackType::kWatchAndLike);
  CHECK(parse_feedback_label("  Watch   and Collect ") == FeedbackType::kWatchAndCollect);
  CHECK_FALSE(parse_feedback_label("love it").has_value());
  CHECK(is_positive(FeedbackType::kJustWatch));
  CHECK_FALSE(is_positive(FeedbackType::kSkip));
  CHECK_FALSE(is_positive(FeedbackType::kDislike));
}

TEST_CASE("prompt with empty history lists all six labels") {
  const std::string p = build_prompt("profile text", AgentHistory{}, "item text");
  for (const auto t : kAllFeedbackTypes) {
    CHECK(p.find("- " + std::string(feedback_label(t)) + "\n") != std::string::npos);
  }
  CHECK(p.find("profile text") != std::string::npos);
  CHECK(p.find("item text") != std::string::npos);
  CHECK(p.find("FEEDBACK:") != std::string::npos);
  CHECK(p.find("REASON:") != std::string::npos);
}

TEST_CASE("history keeps only the most recent window") {
  AgentHistory h(20);
  for (int i = 0; i < 50; ++i) {
    auto v = testing::make_item("v" + std::to_string(i), "A", "A1", "A11");
    v.title = "clip-" + std::to_string(i) + "-end";
    h.push(v, FeedbackType::kJustWatch);
  }
  CHECK(h.size() == 20);
  CHECK(h.entries().front().item_id == "v30");
  CHECK(h.entries().back().item_id == "v49");
  const std::string p = build_prompt("p", h, "i");
  CHECK(p.find("clip-29-end") == std::string::npos);
  CHECK(p.find("clip-30-end") != std::string::npos);
  CHECK(p.find("clip-49-end") != std::string::npos);
}

TEST_CASE("prompt for a fixture input matches the golden text") {
  const Catalog& c = testing::fixture_catalog();
  const auto users = generate_profiles(1, 11, MotivationKind::kGratification, c);
  AgentHistory h;
  h.push(c.item(0), FeedbackType::kWatchAndLike);
  h.push(c.item(1), FeedbackType::kSkip);
  h.push(c.item(2), FeedbackType::kDislike);
  const std::string p = build_prompt(render_profile(users[0]), h, summarize_item(c.item(3)));
  CHECK(testing::matches_golden("prompt.txt", p));
}

TEST_CASE("responses parse with surrounding prose") {
  CHECK(parse_response("FEEDBACK: WATCH AND LIKE\nREASON: fun") ==
        Decision{FeedbackType::kWatchAndLike, "fun"});
  CHECK(parse_response("I think... FEEDBACK: dislike REASON: boring") ==
        Decision{FeedbackType::kDislike, "boring"});
  CHECK(parse_response("**FEEDBACK:** `just_watch`\n**REASON:** ok").feedback ==
        FeedbackType::kJustWatch);
  CHECK(parse_response("FEEDBACK: maybe\nFEEDBACK: SKIP\nREASON: meh").feedback ==
        FeedbackType::kSkip);
  CHECK_THROWS_AS(parse_response("no idea"), UnparseableResponse);
  CHECK_THROWS_AS(parse_response("FEEDBACK: love it"), UnparseableResponse);
}

TEST_CASE("formatting any label and parsing it back is the identity") {
  for (const auto t : kAllFeedbackTypes) {
    const std::string reply =
        "FEEDBACK: " + std::string(feedback_label(t)) + "\nREASON: because";
    CHECK(parse_response(reply) == Decision{t, "because"});
  }
}

TEST_CASE("draw thresholds") {
  CHECK(feedback_from_draw(0.5, 0.0) == FeedbackType::kJustWatch);
  CHECK(feedback_from_draw(0.5, 0.5 * 0.55 - 1e-12) == FeedbackType::kJustWatch);
  CHECK(feedback_from_draw(0.5, 0.5 * 0.55 + 1e-12) == FeedbackType::kWatchAndLike);
  CHECK(feedback_from_draw(0.5, 0.5 * 0.85) == FeedbackType::kWatchAndComment);
  CHECK(feedback_from_draw(0.5, 0.5 * 0.95) == FeedbackType::kWatchAndCollect);
  CHECK(feedback_from_draw(0.5, 0.5 + 1e-12) == FeedbackType::kSkip);
  CHECK(feedback_from_draw(0.5, 0.5 + 0.5 * 0.8 + 1e-12) == FeedbackType::kDislike);
  CHECK(feedback_from_draw(1.0, 0.999) == FeedbackType::kWatchAndCollect);
}

TEST_CASE("u = 0.999 gives Dislike for every reachable affinity") {
  // The rule agent never exceeds 0.85; the Dislike band starts at a + 0.8 (1 - a).
  for (int i = 0; i <= 85; ++i) {
    CHECK(feedback_from_draw(i / 100.0, 0.999) == FeedbackType::kDislike);
  }
}

TEST_CASE("affinity terms") {
  const auto user = testing::make_user("u1", {"A", "B", "C"});
  AgentHistory h;
  CHECK(rule_affinity(user, h, item_in("Z")) == doctest::Approx(0.15));
  CHECK(rule_affinity(user, h, item_in("A")) == doctest::Approx(0.50));

  h.push(testing::make_item("p", "A", "A1", "A11"), FeedbackType::kWatchAndLike);
  h.push(testing::make_item("q", "B", "B1", "B11"), FeedbackType::kDislike);
  CHECK(rule_affinity(user, h, item_in("A", "A1", "A11")) == doctest::Approx(0.75));
  CHECK(rule_affinity(user, h, item_in("A", "A1", "A12")) == doctest::Approx(0.65));
  CHECK(rule_affinity(user, h, item_in("B", "B1", "B11")) == doctest::Approx(0.50));

  auto seeker = user;
  seeker.motivation = Gratification::kBrowsingVarietySeeking;
  CHECK(rule_affinity(seeker, h, item_in("Z")) == doctest::Approx(0.25));
  CHECK(rule_affinity(seeker, h, item_in("A", "A9", "A99")) == doctest::Approx(0.50));

  auto open = user;
  open.motivation = Personality{0.8, 0.5, 0.5, 0.5, 0.5};
  CHECK(rule_affinity(open, h, item_in("Z")) == doctest::Approx(0.23));
}

TEST_CASE("rule agent: u = 0 on an interest match watches") {
  const auto user = testing::make_user("u1", {"A", "B", "C"});
  const double a = rule_affinity(user, AgentHistory{}, item_in("A"));
  CHECK(feedback_from_draw(a, 0.0) == FeedbackType::kJustWatch);
}

TEST_CASE("positive mass tracks affinity") {
  std::array<double, 3> rates{};
  const std::array<double, 3> levels = {0.2, 0.5, 0.8};
  for (std::size_t k = 0; k < levels.size(); ++k) {
    Rng rng(99);
    int positive = 0;
    for (int i = 0; i < 10000; ++i) {
      positive += is_positive(feedback_from_draw(levels[k], rng.uniform01()));
    }
    rates[k] = positive / 10000.0;
  }
  CHECK(rates[1] >= 0.47);
  CHECK(rates[1] <= 0.53);
  CHECK(rates[0] <= rates[1]);
  CHECK(rates[1] <= rates[2]);
}

TEST_CASE("rule decisions are reproducible and use one draw") {
  const auto user = testing::make_user("u1", {"A", "B", "C"});
  const auto item = item_in("A");
  Rng a(5), b(5);
  const Decision da = rule_decide(user, AgentHistory{}, item, a);
  const Decision db = rule_decide(user, AgentHistory{}, item, b);
  CHECK(da == db);
  Rng c(5);
  c.uniform01();
  CHECK(a.next_u64() == c.next_u64());
}

TEST_CASE("chat request body follows the messages schema") {
  ChatEndpoint e;
  e.model = "m";
  const auto body = make_chat_request(e, {{"system", "s"}, {"user", "u"}});
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"].size() == 2);
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(extract_chat_content(R"({"choices":[{"message":{"role":"assistant","content":"hi"}}]})") ==
        "hi");
  CHECK_THROWS_AS(extract_chat_content(R"({"choices":[]})"), TransportError);
  CHECK_THROWS_AS(extract_chat_content("<html>"), TransportError);
}

TEST_CASE("llm_decide with a canned reply") {
  ScriptedTransport t({"FEEDBACK: SKIP REASON: x"});
  const auto out = llm_decide(t, "prompt", no_wait(3), kNoSleep);
  CHECK(out.decision == Decision{FeedbackType::kSkip, "x"});
  CHECK_FALSE(out.fell_back);
  CHECK(t.calls == 1);
  REQUIRE(t.last_messages.size() == 2);
  CHECK(t.last_messages[0].role == "system");
  CHECK(t.last_messages[1].content == "prompt");
}

TEST_CASE("llm_decide retries garbage until a label arrives") {
  ScriptedTransport t({"what?", "hmm", "FEEDBACK: WATCH AND COMMENT\nREASON: great"});
  std::vector<std::chrono::milliseconds> waits;
  RetryPolicy p = no_wait(3);
  p.initial_backoff = std::chrono::milliseconds(10);
  const auto out = llm_decide(t, "prompt", p, [&](auto d) { waits.push_back(d); });
  CHECK(out.decision.feedback == FeedbackType::kWatchAndComment);
  CHECK(out.attempts.size() == 3);
  CHECK(waits == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10),
                                                         std::chrono::milliseconds(20)});
}

TEST_CASE("llm_decide falls back to Skip when the endpoint is down") {
  ScriptedTransport t({});
  const auto out = llm_decide(t, "prompt", no_wait(2), kNoSleep);
  CHECK(out.fell_back);
  CHECK(out.decision.feedback == FeedbackType::kSkip);
  CHECK(t.calls == 3);
  CHECK_FALSE(out.attempts.back().error.empty());

  ScriptedTransport g({"nonsense"});
  const auto gout = llm_decide(g, "prompt", no_wait(1), kNoSleep);
  CHECK(gout.fell_back);
  CHECK(gout.decision == Decision{FeedbackType::kSkip, "unparseable"});
}

TEST_CASE("HTTP transport against a local mock server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    res.set_content(
        R"({"choices":[{"message":{"role":"assistant","content":"FEEDBACK: WATCH AND LIKE\nREASON: cute"}}]})",
        "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("BUBBLESIM_TEST_KEY", "sk-test", 1);
  ChatEndpoint e;
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  e.api_key_env = "BUBBLESIM_TEST_KEY";
  e.timeout_ms = 2000;
  HttpChatTransport transport(e);
  const auto out = llm_decide(transport, "prompt", no_wait(2), kNoSleep);
  server.stop();
  worker.join();

  CHECK(out.decision == Decision{FeedbackType::kWatchAndLike, "cute"});
  CHECK(out.attempts.size() == 2);
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer sk-test");
  CHECK(nlohmann::json::parse(seen_body)["messages"][1]["content"] == "prompt");
}

TEST_CASE("LLM agent transcripts replay through the transcript agent") {
  testing::TempDir dir;
  const Catalog& c = testing::fixture_catalog();
  const auto user = generate_profiles(1, 4, MotivationKind::kGratification, c)[0];
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<std::string>{"FEEDBACK: DISLIKE\nREASON: not for me"});
  LlmAgent llm(transport, no_wait(0), dir.path());
  AgentHistory h;
  Rng rng(1);
  const Decision d = llm.decide({user, h, c.item(5), 2, rng});
  CHECK(d == Decision{FeedbackType::kDislike, "not for me"});
  CHECK(std::filesystem::exists(dir / (user.user_id + ".jsonl")));

  TranscriptAgent replay(dir.path());
  CHECK(replay.size() == 1);
  CHECK(replay.decide({user, h, c.item(5), 2, rng}) == d);
  CHECK_THROWS(replay.decide({user, h, c.item(6), 2, rng}));
  h.push(c.item(9), FeedbackType::kSkip);
  CHECK_THROWS(replay.decide({user, h, c.item(5), 2, rng}));
}
