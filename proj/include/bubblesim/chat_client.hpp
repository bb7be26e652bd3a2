#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bubblesim/prompt.hpp"

namespace bubblesim {

// Where to send chat-completion requests. The API key itself is never stored
// here, only the name of the environment variable that holds it.
struct ChatEndpoint {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "BUBBLESIM_API_KEY";
  double temperature = 0.7;
  int timeout_ms = 60000;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request body in the messages-array schema.
nlohmann::ordered_json make_chat_request(const ChatEndpoint& endpoint,
                                         const std::vector<ChatMessage>& messages);
// choices[0].message.content of a response body; throws TransportError when
// the body does not follow the schema.
std::string extract_chat_content(const std::string& response_body);

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Returns the assistant message text. Throws TransportError on any failure.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// POSTs to {base_url}/chat/completions. Safe to call from several threads.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(ChatEndpoint endpoint);
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  ChatEndpoint endpoint_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix, without trailing slash
  std::string api_key_;
};

struct RetryPolicy {
  // Additional attempts after the first one.
  int retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

struct ChatAttempt {
  std::string response;  // raw assistant text, empty on transport error
  std::string error;     // transport or parse error, empty on success
};

struct LlmOutcome {
  Decision decision;
  std::vector<ChatAttempt> attempts;
  bool fell_back = false;
};

// Fixed role-play instruction sent as the system message.
extern const char* const kAgentSystemMessage;

// Sends `prompt` as one user message after the system message. Transport
// failures and unparseable replies are both retried with exponential backoff;
// once retries are exhausted the decision falls back to Skip.
LlmOutcome llm_decide(ChatTransport& transport, const std::string& prompt,
                      const RetryPolicy& policy,
                      const std::function<void(std::chrono::milliseconds)>& sleep =
                          nullptr);

}  // namespace bubblesim
