#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace structeval {

// One word token of a question with its byte range in the original text.
// Splicing through spans preserves every byte outside the edited tokens.
struct WordToken {
  std::string text;
  size_t begin = 0; // inclusive byte offset
  size_t end = 0;   // exclusive byte offset
};

// Whitespace-delimited word tokens; trailing sentence punctuation is split
// off as separate single-character tokens ("20?" -> "20", "?"). Interior
// punctuation stays attached ("1,000", "<Mask>", "*" are single tokens).
std::vector<WordToken> tokenize_words(std::string_view text);

// Replace the token at `index` with `replacement`, keeping all other bytes.
std::string splice_replace(std::string_view text,
                           const std::vector<WordToken>& tokens, size_t index,
                           std::string_view replacement);

// Exchange the text of two tokens in place.
std::string splice_swap(std::string_view text,
                        const std::vector<WordToken>& tokens, size_t a,
                        size_t b);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);

// Lowercase + strip punctuation from both edges; used for core-pool matching
// so that "Times," matches the pool entry "times".
std::string match_key(std::string_view token);

// Answer normalization: trim, strip terminal punctuation, lowercase, drop
// thousands separators (commas flanked by digits). Idempotent.
std::string normalize_answer(std::string_view s);

// Substitute literal [PLACEHOLDER] markers. Unknown markers are left alone.
std::string fill_template(
    std::string_view tpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions);

bool contains_placeholder(std::string_view tpl, std::string_view placeholder);

// Map a normalized answer onto the unique option it designates: exact match
// first, then a bare option letter ("(b)"), then unique substring containment.
std::optional<std::string> match_option(const std::string& normalized_answer,
                                        const std::vector<std::string>& options);

uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t v);

} // namespace structeval
