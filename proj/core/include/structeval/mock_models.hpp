#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "structeval/model.hpp"
#include "structeval/record.hpp"
#include "structeval/task_config.hpp"

namespace structeval {

// Ideal deep-structure responder: the answer is a pure function of the core
// tokens of the prompt, so surface-only edits can never change it and any
// core edit always does. Core token sequences that form "<a> <op> <b>" with
// op in {times, plus, minus} are evaluated so origin questions come back
// correct; anything else maps to a stable digest answer.
class DeepThinkerModel : public ModelClient {
public:
  DeepThinkerModel(MaskTaskConfig core_rule, uint64_t seed)
      : core_rule_(std::move(core_rule)), seed_(seed) {}

  std::string identity() const override { return "mock:deep"; }
  std::string complete(const std::vector<ChatMessage>& messages) override;

private:
  MaskTaskConfig core_rule_;
  uint64_t seed_;
};

// Pure surface learner: it has memorized the training questions verbatim and
// answers them correctly; any other text (even a one-token edit) maps to a
// hash of the full question text.
class SurfaceLearnerModel : public ModelClient {
public:
  SurfaceLearnerModel(const std::vector<Sample>& memorized, uint64_t seed);

  std::string identity() const override { return "mock:surface"; }
  std::string complete(const std::vector<ChatMessage>& messages) override;

private:
  std::vector<std::pair<std::string, std::string>> memorized_; // longest first
  uint64_t seed_;
};

// Emits a fixed-length pseudorandom token soup, the behavior of an untrained
// network. Never contains an answer marker and never matches a gold answer.
class GibberishModel : public ModelClient {
public:
  explicit GibberishModel(uint64_t seed) : seed_(seed) {}

  std::string identity() const override { return "mock:gibberish"; }
  std::string complete(const std::vector<ChatMessage>& messages) override;

private:
  uint64_t seed_;
};

// Explicit prompt -> response map plus an in-order fallback queue; the queue
// makes multi-turn agent loops easy to script. A response equal to "<FAIL>"
// simulates a per-request failure.
class ScriptedModel : public ModelClient {
public:
  ScriptedModel(std::map<std::string, std::string> responses,
                std::vector<std::string> queue,
                std::string identity = "mock:scripted");

  static std::shared_ptr<ScriptedModel> from_file(const std::filesystem::path& path);

  std::string identity() const override { return identity_; }
  std::string complete(const std::vector<ChatMessage>& messages) override;

private:
  std::map<std::string, std::string> responses_;
  std::vector<std::string> queue_;
  std::string identity_;
  std::mutex mutex_;
  size_t queue_next_ = 0;
};

} // namespace structeval
