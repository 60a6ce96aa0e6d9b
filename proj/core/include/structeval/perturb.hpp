#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "structeval/record.hpp"

namespace structeval {

enum class NoiseMode { Text, Label };

struct NoiseConfig {
  double eta = 0.0; // per-word (text) or per-sample (label) perturbation probability
  NoiseMode mode = NoiseMode::Text;
  uint64_t seed = 0;
};

// Character-level corruption: each whitespace-delimited word is independently
// modified with probability eta; a modified word gets one of Typo (replace a
// character with a different random lowercase letter), Extra (insert a random
// lowercase letter), or Missing (delete a character), chosen uniformly.
// Single-character words that lose their only character are dropped.
std::string text_noise(const std::string& text, const NoiseConfig& cfg);

// Label corruption for option tasks: with probability eta, the gold answer is
// replaced by a uniformly chosen different option. Every sample must carry at
// least two options. Each sample uses a sub-seed derived from (seed, id), so
// the result is order-independent.
std::vector<Sample> label_noise(const std::vector<Sample>& samples,
                                const NoiseConfig& cfg);

} // namespace structeval
