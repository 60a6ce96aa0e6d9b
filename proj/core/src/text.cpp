#include "structeval/text.hpp"

#include <cctype>

namespace structeval {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Sentence-final punctuation that detaches from a word. Bracketing characters
// like '<' and '>' are deliberately absent so placeholder tokens such as
// "<Mask>" and "*" stay atomic.
bool is_trailing_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case ')': case ']': case '}': case '"': case '\'':
      return true;
    default:
      return false;
  }
}

} // namespace

std::vector<WordToken> tokenize_words(std::string_view text) {
  std::vector<WordToken> tokens;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    size_t begin = i;
    while (i < n && !is_space(text[i])) ++i;
    size_t end = i;

    size_t word_end = end;
    while (word_end > begin && is_trailing_punct(text[word_end - 1])) --word_end;
    if (word_end > begin) {
      tokens.push_back({std::string(text.substr(begin, word_end - begin)),
                        begin, word_end});
    }
    for (size_t p = word_end; p < end; ++p) {
      tokens.push_back({std::string(1, text[p]), p, p + 1});
    }
  }
  return tokens;
}

std::string splice_replace(std::string_view text,
                           const std::vector<WordToken>& tokens, size_t index,
                           std::string_view replacement) {
  const WordToken& tok = tokens.at(index);
  std::string out;
  out.reserve(text.size() + replacement.size());
  out.append(text.substr(0, tok.begin));
  out.append(replacement);
  out.append(text.substr(tok.end));
  return out;
}

std::string splice_swap(std::string_view text,
                        const std::vector<WordToken>& tokens, size_t a,
                        size_t b) {
  if (a == b) return std::string(text);
  if (tokens.at(a).begin > tokens.at(b).begin) std::swap(a, b);
  const WordToken& first = tokens.at(a);
  const WordToken& second = tokens.at(b);
  std::string out;
  out.reserve(text.size());
  out.append(text.substr(0, first.begin));
  out.append(second.text);
  out.append(text.substr(first.end, second.begin - first.end));
  out.append(first.text);
  out.append(text.substr(second.end));
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string match_key(std::string_view token) {
  size_t b = 0, e = token.size();
  while (b < e && is_punct(token[b])) ++b;
  while (e > b && is_punct(token[e - 1])) --e;
  return to_lower_ascii(token.substr(b, e - b));
}

std::string normalize_answer(std::string_view s) {
  size_t b = 0, e = s.size();
  while (e > b && (is_space(s[e - 1]) || is_punct(s[e - 1]))) --e;
  while (b < e && is_space(s[b])) ++b;
  std::string lowered = to_lower_ascii(s.substr(b, e - b));

  std::string out;
  out.reserve(lowered.size());
  for (size_t i = 0; i < lowered.size(); ++i) {
    if (lowered[i] == ',' && i > 0 && i + 1 < lowered.size() &&
        is_digit(lowered[i - 1]) && is_digit(lowered[i + 1])) {
      continue; // thousands separator
    }
    out.push_back(lowered[i]);
  }
  return out;
}

std::string fill_template(
    std::string_view tpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
  std::string out(tpl);
  for (const auto& [placeholder, value] : substitutions) {
    size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

bool contains_placeholder(std::string_view tpl, std::string_view placeholder) {
  return tpl.find(placeholder) != std::string_view::npos;
}

std::optional<std::string> match_option(const std::string& normalized_answer,
                                        const std::vector<std::string>& options) {
  if (options.empty()) return std::nullopt;

  std::vector<std::string> normalized;
  normalized.reserve(options.size());
  for (const std::string& opt : options) normalized.push_back(normalize_answer(opt));

  for (const std::string& opt : normalized) {
    if (!opt.empty() && opt == normalized_answer) return opt;
  }

  // Bare option letter, e.g. "(b)" (normalization already drops the ')').
  std::string letter = normalized_answer;
  if (!letter.empty() && letter.front() == '(') letter.erase(0, 1);
  if (letter.size() == 1 && letter[0] >= 'a' && letter[0] <= 'z') {
    size_t index = static_cast<size_t>(letter[0] - 'a');
    if (index < normalized.size()) return normalized[index];
  }

  std::optional<std::string> unique;
  for (const std::string& opt : normalized) {
    if (opt.empty() || normalized_answer.find(opt) == std::string::npos) continue;
    if (unique && *unique != opt) return std::nullopt; // ambiguous
    unique = opt;
  }
  return unique;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

} // namespace structeval
