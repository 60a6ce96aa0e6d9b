#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "structeval/model.hpp"

namespace structeval {

// Content-addressed directory of response files. Keys are hex digests; one
// file per key holds the raw response bytes. Writers use write-once
// semantics: duplicate computations may race, the first committed file wins
// and every reader observes it.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;

  // Stores value under key unless a value is already committed; returns the
  // committed value either way.
  std::string put_if_absent(const std::string& key, const std::string& value);

  const std::filesystem::path& dir() const { return dir_; }

  static std::string sha256_hex(std::string_view payload);

private:
  std::filesystem::path file_for(const std::string& key) const;

  std::filesystem::path dir_;
};

// Wraps a model with the cache. The key covers model identity, decoding
// fingerprint, and the full message list, so the first stored response is
// authoritative for the run even when the live endpoint is nondeterministic.
class CachedModel : public ModelClient {
public:
  CachedModel(std::shared_ptr<ModelClient> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::string identity() const override { return inner_->identity(); }
  std::string decoding_fingerprint() const override {
    return inner_->decoding_fingerprint();
  }
  std::string complete(const std::vector<ChatMessage>& messages) override;

  uint64_t upstream_calls() const { return upstream_calls_.load(); }

private:
  std::shared_ptr<ModelClient> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::atomic<uint64_t> upstream_calls_{0};
};

} // namespace structeval
