#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "structeval/model.hpp"

namespace structeval {

// Chat-completion-style HTTP wire contract: a JSON message list goes out,
// choices[0].message.content comes back.
struct HttpModelConfig {
  std::string endpoint; // full URL, e.g. http://host:8080/v1/chat/completions
  std::string model;    // model name sent in the request body
  std::string api_key_env = "MODEL_API_KEY";
  double temperature = 0.0;
  int max_retries = 4;          // additional attempts after the first
  int backoff_initial_ms = 250; // doubled per retry
  int min_interval_ms = 0;      // client-side rate limit between requests
  int timeout_seconds = 120;
};

class HttpChatModel : public ModelClient {
public:
  explicit HttpChatModel(HttpModelConfig config);
  ~HttpChatModel() override;

  std::string identity() const override { return config_.model; }
  std::string decoding_fingerprint() const override;
  std::string complete(const std::vector<ChatMessage>& messages) override;

private:
  struct Impl;

  HttpModelConfig config_;
  std::string api_key_;
  std::unique_ptr<Impl> impl_;
  std::mutex rate_mutex_;
  long long last_request_ms_ = 0;
};

} // namespace structeval
