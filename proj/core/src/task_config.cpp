#include "structeval/task_config.hpp"

#include <fstream>
#include <sstream>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorKind::Config, "bad boolean for '" + key + "': " + value);
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "bad integer for '" + key + "': " + value);
  }
}

} // namespace

TaskConfig load_task_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open task config " + path.string());
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");

  TaskConfig cfg;
  bool strategy_seen = false;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, path.string() + ":" + std::to_string(lineno) +
                                         ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto resolve = [&](const std::string& rel) { return (base / rel).string(); };

    if (key == "strategy") {
      cfg.strategy = strategy_from_string(value);
      strategy_seen = true;
    } else if (key == "pool") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::string entry = match_key(trim(item));
        if (!entry.empty()) cfg.mask.core_word_pool.insert(entry);
      }
    } else if (key == "all_digit_tokens") {
      cfg.mask.all_digit_tokens = parse_bool(key, value);
    } else if (key == "positional_core") {
      long v = parse_int(key, value);
      if (v < 0) throw Error(ErrorKind::Config, "positional_core must be >= 0");
      cfg.mask.positional_core = static_cast<size_t>(v);
    } else if (key == "k") {
      long v = parse_int(key, value);
      if (v < 1) throw Error(ErrorKind::Config, "k must be >= 1");
      cfg.mask.k = static_cast<int>(v);
    } else if (key == "reps") {
      long v = parse_int(key, value);
      if (v < 1) throw Error(ErrorKind::Config, "reps must be >= 1");
      cfg.reps = static_cast<int>(v);
    } else if (key == "answer_pattern") {
      cfg.answer_pattern = value;
    } else if (key == "prompt_template") {
      cfg.prompt_template = read_text_file(resolve(value));
    } else if (key == "alter_template") {
      cfg.rephrase.alter = read_text_file(resolve(value));
    } else if (key == "preserve_template") {
      cfg.rephrase.preserve = read_text_file(resolve(value));
    } else if (key == "predict_template") {
      cfg.rephrase.predict = read_text_file(resolve(value));
    } else if (key == "feedback_template") {
      cfg.rephrase.feedback = read_text_file(resolve(value));
    } else if (key == "max_iterations") {
      long v = parse_int(key, value);
      if (v < 1) throw Error(ErrorKind::Config, "max_iterations must be >= 1");
      cfg.rephrase.max_iterations = static_cast<int>(v);
    } else {
      throw Error(ErrorKind::Config, path.string() + ":" + std::to_string(lineno) +
                                         ": unknown key '" + key + "'");
    }
  }
  if (!strategy_seen) {
    throw Error(ErrorKind::Config, path.string() + ": missing 'strategy'");
  }
  if (cfg.strategy != Strategy::Rephrase && !cfg.mask.has_core_rule()) {
    throw Error(ErrorKind::Config,
                path.string() + ": mask/replace/swap tasks need a core rule "
                                "(pool, all_digit_tokens, or positional_core)");
  }
  if (cfg.strategy == Strategy::Rephrase &&
      (cfg.rephrase.alter.empty() || cfg.rephrase.preserve.empty() ||
       cfg.rephrase.predict.empty() || cfg.rephrase.feedback.empty())) {
    throw Error(ErrorKind::Config,
                path.string() + ": rephrase tasks need alter/preserve/predict/"
                                "feedback templates");
  }
  return cfg;
}

} // namespace structeval
