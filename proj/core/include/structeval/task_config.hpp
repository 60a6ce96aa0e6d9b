#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "structeval/record.hpp"

namespace structeval {

// Which question tokens carry core semantics for a mask/replace/swap task.
// A token is core when its match key is in the pool, or it is numeric and
// all_digit_tokens is set, or it sits at the positional_core index.
struct MaskTaskConfig {
  std::unordered_set<std::string> core_word_pool;
  bool all_digit_tokens = false;
  std::optional<size_t> positional_core;
  int k = 1; // surface-mask distance rank (k-th nearest non-core token)

  bool has_core_rule() const {
    return !core_word_pool.empty() || all_digit_tokens || positional_core.has_value();
  }
};

// Prompt templates for the agent-driven rephrase loop.
struct RephraseTemplates {
  std::string alter;    // placeholders: [QUESTION] [OPTIONS] [ANSWER]
  std::string preserve; // same placeholders
  std::string predict;  // [QUESTION] [OPTIONS] [INDEX_OF_FIRST_OPT] [INDEX_OF_LAST_OPT]
  std::string feedback; // fixed retry message
  int max_iterations = 10;
};

// Everything a run needs to know about one task, parsed from a `key = value`
// config file. Paths in the file are resolved relative to the file itself.
struct TaskConfig {
  Strategy strategy = Strategy::Mask;
  MaskTaskConfig mask;
  RephraseTemplates rephrase;
  int reps = 1;
  std::string answer_pattern = "The answer is";
  std::string prompt_template; // inference template text with [QUESTION]
};

TaskConfig load_task_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

} // namespace structeval
