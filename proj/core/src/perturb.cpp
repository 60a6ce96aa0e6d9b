#include "structeval/perturb.hpp"

#include <cctype>

#include "structeval/errors.hpp"
#include "structeval/rng.hpp"

namespace structeval {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string corrupt_word(const std::string& word, Rng& rng) {
  const size_t n = word.size();
  switch (rng.next_below(3)) {
    case 0: { // Typo: replace one character with a different lowercase letter
      size_t pos = rng.next_below(n);
      std::string out = word;
      char replacement = rng.next_lowercase();
      while (replacement == out[pos]) replacement = rng.next_lowercase();
      out[pos] = replacement;
      return out;
    }
    case 1: { // Extra: insert a lowercase letter at a random position
      size_t pos = rng.next_below(n + 1);
      std::string out = word;
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), rng.next_lowercase());
      return out;
    }
    default: { // Missing: delete one character
      size_t pos = rng.next_below(n);
      std::string out = word;
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
      return out;
    }
  }
}

} // namespace

std::string text_noise(const std::string& text, const NoiseConfig& cfg) {
  if (cfg.mode != NoiseMode::Text) {
    throw Error(ErrorKind::Config, "text_noise requires mode=Text");
  }
  if (cfg.eta < 0.0 || cfg.eta > 1.0) {
    throw Error(ErrorKind::Config, "eta must be in [0, 1]");
  }

  // Decompose into alternating separator/word segments so that untouched
  // whitespace survives byte-for-byte (eta=0 must be the identity).
  struct Segment {
    bool word;
    std::string text;
  };
  std::vector<Segment> segments;
  size_t i = 0;
  while (i < text.size()) {
    bool word = !is_space(text[i]);
    size_t begin = i;
    while (i < text.size() && (!is_space(text[i])) == word) ++i;
    segments.push_back({word, text.substr(begin, i - begin)});
  }

  Rng rng(cfg.seed);
  for (Segment& seg : segments) {
    if (!seg.word) continue;
    if (!rng.next_bernoulli(cfg.eta)) continue;
    seg.text = corrupt_word(seg.text, rng);
  }

  // Reassemble; a word deleted down to nothing takes its following separator
  // with it (or the preceding one when it was the last word).
  std::string out;
  out.reserve(text.size() + 8);
  for (size_t s = 0; s < segments.size(); ++s) {
    if (segments[s].word && segments[s].text.empty()) {
      if (s + 1 < segments.size() && !segments[s + 1].word) {
        ++s; // skip the separator that followed the dropped word
      } else if (!out.empty()) {
        size_t e = out.size();
        while (e > 0 && is_space(out[e - 1])) --e;
        out.resize(e);
      }
      continue;
    }
    out += segments[s].text;
  }
  return out;
}

std::vector<Sample> label_noise(const std::vector<Sample>& samples,
                                const NoiseConfig& cfg) {
  if (cfg.mode != NoiseMode::Label) {
    throw Error(ErrorKind::Config, "label_noise requires mode=Label");
  }
  if (cfg.eta < 0.0 || cfg.eta > 1.0) {
    throw Error(ErrorKind::Config, "eta must be in [0, 1]");
  }
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const Sample& sample : samples) {
    if (!sample.options || sample.options->size() < 2) {
      throw Error(ErrorKind::Config,
                  "label noise needs >= 2 options (sample '" + sample.id + "')");
    }
    Sample flipped = sample;
    Rng rng(derive_seed(cfg.seed, sample.id));
    if (rng.next_bernoulli(cfg.eta)) {
      const auto& options = *sample.options;
      std::vector<std::string> others;
      for (const std::string& opt : options) {
        if (opt != sample.gold_answer) others.push_back(opt);
      }
      if (others.empty()) {
        throw Error(ErrorKind::Config,
                    "sample '" + sample.id + "' has no incorrect option to flip to");
      }
      flipped.gold_answer = others[rng.next_below(others.size())];
    }
    out.push_back(std::move(flipped));
  }
  return out;
}

} // namespace structeval
