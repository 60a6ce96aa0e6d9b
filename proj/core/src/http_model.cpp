#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "structeval/http_model.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

namespace structeval {

namespace {

struct ParsedUrl {
  std::string base; // scheme://host[:port]
  std::string path; // leading slash
};

ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::Config, "endpoint URL needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

} // namespace

struct HttpChatModel::Impl {
  explicit Impl(const std::string& base) : client(base) {}
  httplib::Client client;
};

HttpChatModel::HttpChatModel(HttpModelConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorKind::Config, "endpoint URL is required");
  }
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
  ParsedUrl parsed = parse_url(config_.endpoint);
  impl_ = std::make_unique<Impl>(parsed.base);
  impl_->client.set_connection_timeout(config_.timeout_seconds, 0);
  impl_->client.set_read_timeout(config_.timeout_seconds, 0);
  impl_->client.set_write_timeout(config_.timeout_seconds, 0);
}

HttpChatModel::~HttpChatModel() = default;

std::string HttpChatModel::decoding_fingerprint() const {
  nlohmann::json j{{"temperature", config_.temperature}};
  return j.dump();
}

std::string HttpChatModel::complete(const std::vector<ChatMessage>& messages) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  auto& list = body["messages"] = nlohmann::json::array();
  for (const ChatMessage& m : messages) {
    list.push_back({{"role", m.role}, {"content", m.content}});
  }
  const std::string payload = body.dump();
  const std::string path = parse_url(config_.endpoint).path;

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  if (config_.min_interval_ms > 0) {
    std::lock_guard<std::mutex> lock(rate_mutex_);
    long long wait = last_request_ms_ + config_.min_interval_ms - now_ms();
    if (wait > 0) std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    last_request_ms_ = now_ms();
  }

  httplib::Result result;
  int backoff_ms = config_.backoff_initial_ms;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    result = impl_->client.Post(path, headers, payload, "application/json");
    if (!result) continue; // connection-level failure
    if (result->status == 429 || result->status >= 500) continue;
    break;
  }

  if (!result) {
    throw TransportFailure("endpoint unreachable after " +
                           std::to_string(config_.max_retries + 1) + " attempts: " +
                           config_.endpoint);
  }
  if (result->status == 429 || result->status >= 500) {
    throw TransportFailure("endpoint kept failing (last status " +
                           std::to_string(result->status) + "): " + config_.endpoint);
  }
  if (result->status != 200) {
    throw ResponseFailure("request rejected with status " +
                          std::to_string(result->status));
  }

  try {
    nlohmann::json j = nlohmann::json::parse(result->body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ResponseFailure("response content is not text");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ResponseFailure(std::string("malformed response body: ") + e.what());
  }
}

} // namespace structeval
