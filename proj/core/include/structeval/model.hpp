#pragma once

#include <string>
#include <vector>

#include "structeval/errors.hpp"

namespace structeval {

struct ChatMessage {
  std::string role; // "system" | "user" | "assistant"
  std::string content;
};

// Raised when one request produced no usable response (bad status, empty
// body). The record is flagged failed and excluded from estimation.
class ResponseFailure : public Error {
public:
  explicit ResponseFailure(const std::string& message)
      : Error(ErrorKind::Transport, message) {}
};

// Raised when the endpoint is unreachable after bounded retries; the whole
// stage aborts (the cache keeps completed work, so reruns resume).
class TransportFailure : public Error {
public:
  explicit TransportFailure(const std::string& message)
      : Error(ErrorKind::Transport, message) {}
};

// A black-box text model: message list in, text out. Implementations must be
// safe to call from multiple threads.
class ModelClient {
public:
  virtual ~ModelClient() = default;

  virtual std::string identity() const = 0;

  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;

  // Folded into the cache key so cached responses are only reused under the
  // same decoding settings.
  virtual std::string decoding_fingerprint() const { return "greedy"; }

  std::string invoke(const std::string& prompt) {
    return complete({{"user", prompt}});
  }
};

// Canonical rendering of a message list, used for cache keys and scripted
// lookups. 0x1f separates fields so contents cannot collide with framing.
std::string render_messages(const std::vector<ChatMessage>& messages);

} // namespace structeval
