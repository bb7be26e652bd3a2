#include "bubblesim/chat_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace bubblesim {

const char* const kAgentSystemMessage =
    "You are role-playing a real person using a short-video app. Stay in "
    "character as the user described in the prompt, react to each video the "
    "way that person plausibly would, and always answer in the requested "
    "FEEDBACK/REASON layout.";

nlohmann::ordered_json make_chat_request(const ChatEndpoint& endpoint,
                                         const std::vector<ChatMessage>& messages) {
  nlohmann::ordered_json body;
  body["model"] = endpoint.model;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = endpoint.temperature;
  return body;
}

std::string extract_chat_content(const std::string& response_body) {
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(response_body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(fmt::format("response is not JSON: {}", e.what()));
  }
  if (body.contains("error")) {
    throw TransportError(fmt::format("service error: {}", body["error"].dump()));
  }
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(fmt::format("unexpected response schema: {}", e.what()));
  }
}

HttpChatTransport::HttpChatTransport(ChatEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  const auto scheme_end = endpoint_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument(
        fmt::format("base URL '{}' has no scheme", endpoint_.base_url));
  }
  const auto path_start = endpoint_.base_url.find('/', scheme_end + 3);
  origin_ = endpoint_.base_url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : endpoint_.base_url.substr(path_start);
  while (path_.ends_with('/')) path_.pop_back();
  if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key && *key) {
    api_key_ = key;
  } else {
    spdlog::warn("{} is not set; sending unauthenticated requests",
                 endpoint_.api_key_env);
  }
}

std::string HttpChatTransport::complete(const std::vector<ChatMessage>& messages) {
  httplib::Client client(origin_);
  const auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto body = make_chat_request(endpoint_, messages).dump();
  auto res = client.Post(path_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    throw TransportError(
        fmt::format("request to {} failed: {}", origin_, httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(fmt::format("HTTP {} from {}", res->status, origin_));
  }
  return extract_chat_content(res->body);
}

LlmOutcome llm_decide(ChatTransport& transport, const std::string& prompt,
                      const RetryPolicy& policy,
                      const std::function<void(std::chrono::milliseconds)>& sleep) {
  const std::vector<ChatMessage> messages = {{"system", kAgentSystemMessage},
                                             {"user", prompt}};
  LlmOutcome outcome;
  auto backoff = policy.initial_backoff;
  const int attempts = 1 + std::max(0, policy.retries);
  bool transport_failed = false;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    ChatAttempt record;
    try {
      record.response = transport.complete(messages);
      outcome.decision = parse_response(record.response);
      outcome.attempts.push_back(std::move(record));
      return outcome;
    } catch (const TransportError& e) {
      record.error = e.what();
      transport_failed = true;
    } catch (const UnparseableResponse& e) {
      record.error = e.what();
      transport_failed = false;
    }
    spdlog::debug("chat attempt {}/{} failed: {}", attempt, attempts, record.error);
    outcome.attempts.push_back(std::move(record));
    if (attempt < attempts && backoff.count() > 0) {
      if (sleep) {
        sleep(backoff);
      } else {
        std::this_thread::sleep_for(backoff);
      }
      backoff = std::min(policy.max_backoff,
                         std::chrono::milliseconds(static_cast<long long>(
                             static_cast<double>(backoff.count()) *
                             policy.backoff_multiplier)));
    }
  }
  outcome.fell_back = true;
  outcome.decision.feedback = FeedbackType::kSkip;
  if (transport_failed) {
    outcome.decision.explanation = "transport failure";
    spdlog::error("chat endpoint failed after {} attempts ({}); recording SKIP",
                  attempts, outcome.attempts.back().error);
  } else {
    outcome.decision.explanation = "unparseable";
    spdlog::warn("no parseable feedback after {} attempts; recording SKIP", attempts);
  }
  return outcome;
}

}  // namespace bubblesim
