#include "structeval/mock_models.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "structeval/intervene.hpp"
#include "structeval/rng.hpp"
#include "structeval/text.hpp"

namespace structeval {

namespace {

std::string last_content(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) return "";
  return messages.back().content;
}

bool parse_integer(const std::string& key, long long& out) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  errno = 0;
  out = std::strtoll(key.c_str(), nullptr, 10);
  return errno == 0;
}

} // namespace

std::string DeepThinkerModel::complete(const std::vector<ChatMessage>& messages) {
  const std::string prompt = last_content(messages);
  const auto tokens = tokenize_words(prompt);

  std::vector<std::string> core;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (is_core_token(tokens, i, core_rule_)) core.push_back(match_key(tokens[i].text));
  }

  // <a> <op> <b> anywhere in the core sequence: evaluate it.
  for (size_t i = 0; i + 2 < core.size(); ++i) {
    long long a = 0, b = 0;
    if (!parse_integer(core[i], a) || !parse_integer(core[i + 2], b)) continue;
    const std::string& op = core[i + 1];
    long long value = 0;
    if (op == "times" || op == "multiplied") value = a * b;
    else if (op == "plus") value = a + b;
    else if (op == "minus") value = a - b;
    else continue;
    return "The answer is " + std::to_string(value) + ".";
  }

  std::string joined;
  for (const std::string& key : core) {
    joined += key;
    joined += ' ';
  }
  uint64_t digest = fnv1a64(joined) ^ (seed_ * 0x9E3779B97F4A7C15ull);
  return "The answer is unknown-" + hex64(digest).substr(0, 8) + ".";
}

SurfaceLearnerModel::SurfaceLearnerModel(const std::vector<Sample>& memorized,
                                         uint64_t seed)
    : seed_(seed) {
  memorized_.reserve(memorized.size());
  for (const Sample& s : memorized) memorized_.emplace_back(s.question, s.gold_answer);
  // Longest question first, so a question that embeds another cannot be
  // shadowed by its substring.
  std::stable_sort(memorized_.begin(), memorized_.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
}

std::string SurfaceLearnerModel::complete(const std::vector<ChatMessage>& messages) {
  const std::string prompt = last_content(messages);
  for (const auto& [question, gold] : memorized_) {
    if (!question.empty() && prompt.find(question) != std::string::npos) {
      return "The answer is " + gold + ".";
    }
  }
  uint64_t digest = fnv1a64(prompt) ^ (seed_ * 0x9E3779B97F4A7C15ull);
  return "The answer is text-" + hex64(digest).substr(0, 12) + ".";
}

std::string GibberishModel::complete(const std::vector<ChatMessage>& messages) {
  static const char* kFragments[] = {
      "MTatual",  "novemberdx", "anime",    "alqun",    "stitutions",
      "Riveraixe", "Nga",       "juego",    "ulseries", "Arap",
      "esty",     "IILISE",     "Mayboruev", "ance",    "Signatureappeno",
      "Sellerthese", "evilerv",  "adirs",    "estruct",  "mparator",
      "maxugas",  "ROSSq",      "Residents", "radfrom", "processesSi",
      "nouvel",   "centeryyy",  "airlinex",  "bodyParservenue", "Rapidsslug",
      "otrab",    "coeffvelocity", "shortlyq", "DVDu",   "xylofable",
      "qumbrist", "veltorpan",  "drindle",   "opaquex", "zentrilob",
  };
  constexpr size_t kVocab = sizeof(kFragments) / sizeof(kFragments[0]);
  constexpr int kLength = 10;

  const std::string prompt = last_content(messages);
  Rng rng(derive_seed(seed_, prompt));
  std::string out;
  for (int i = 0; i < kLength; ++i) {
    if (i) out += ' ';
    out += kFragments[rng.next_below(kVocab)];
  }
  return out;
}

ScriptedModel::ScriptedModel(std::map<std::string, std::string> responses,
                             std::vector<std::string> queue, std::string identity)
    : responses_(std::move(responses)),
      queue_(std::move(queue)),
      identity_(std::move(identity)) {}

std::shared_ptr<ScriptedModel> ScriptedModel::from_file(
    const std::filesystem::path& path) {
  ojson j;
  try {
    j = ojson::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, "bad script file " + path.string() + ": " + e.what());
  }
  std::map<std::string, std::string> responses;
  if (j.contains("map")) {
    for (const auto& [key, value] : j["map"].items()) {
      responses[key] = value.get<std::string>();
    }
  }
  std::vector<std::string> queue;
  if (j.contains("queue")) queue = j["queue"].get<std::vector<std::string>>();
  std::string identity = j.value("identity", std::string("mock:scripted"));
  return std::make_shared<ScriptedModel>(std::move(responses), std::move(queue),
                                         std::move(identity));
}

std::string ScriptedModel::complete(const std::vector<ChatMessage>& messages) {
  std::string response;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto exact = responses_.find(render_messages(messages));
    if (exact != responses_.end()) {
      response = exact->second;
    } else {
      auto by_content = responses_.find(last_content(messages));
      if (by_content != responses_.end()) {
        response = by_content->second;
      } else if (queue_next_ < queue_.size()) {
        response = queue_[queue_next_++];
      } else {
        throw TransportFailure("scripted model has no response for: " +
                               last_content(messages).substr(0, 120));
      }
    }
  }
  if (response == "<FAIL>") {
    throw ResponseFailure("scripted response failure");
  }
  return response;
}

} // namespace structeval
