#include "structeval/intervene.hpp"

#include <algorithm>
#include <cctype>

#include "structeval/text.hpp"

namespace structeval {

namespace {

bool is_numeric_key(const std::string& key) {
  if (key.empty()) return false;
  bool digit_seen = false;
  for (char c : key) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit_seen = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit_seen;
}

std::vector<size_t> core_indices(const std::vector<WordToken>& tokens,
                                 const MaskTaskConfig& cfg) {
  std::vector<size_t> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (is_core_token(tokens, i, cfg)) out.push_back(i);
  }
  return out;
}

std::vector<size_t> surface_indices(const std::vector<WordToken>& tokens,
                                    const MaskTaskConfig& cfg) {
  std::vector<size_t> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!is_core_token(tokens, i, cfg)) out.push_back(i);
  }
  return out;
}

// Locate the token the T1 record substituted, by lining t1 up against the
// original question token-for-token.
size_t find_substituted_index(const Sample& sample, const InterventionRecord& t1,
                              const char* literal) {
  const auto origin_tokens = tokenize_words(sample.question);
  const auto t1_tokens = tokenize_words(t1.question);
  const size_t n = std::min(origin_tokens.size(), t1_tokens.size());
  for (size_t i = 0; i < n; ++i) {
    if (t1_tokens[i].text == literal && origin_tokens[i].text != literal) {
      return i;
    }
  }
  throw Error(ErrorKind::Pairing,
              "T1 record for '" + sample.id + "' does not contain the '" +
                  std::string(literal) + "' substitution");
}

InterventionRecord substitute_core(const Sample& sample, const MaskTaskConfig& cfg,
                                   size_t choice, int rep_index,
                                   Strategy strategy, const char* literal,
                                   const char* verb) {
  const auto tokens = tokenize_words(sample.question);
  const auto cores = core_indices(tokens, cfg);
  if (cores.empty()) {
    throw Error(ErrorKind::NoCoreToken,
                "no core-semantic token in '" + sample.question + "'");
  }
  const size_t index = cores[choice % cores.size()];
  InterventionRecord r;
  r.origin_id = sample.id;
  r.treatment = Treatment::T1;
  r.strategy = strategy;
  r.question = splice_replace(sample.question, tokens, index, literal);
  r.expected_answer = kNoExpectedAnswer;
  r.pair_id = make_pair_id(sample.id, rep_index);
  r.rep_index = rep_index;
  r.provenance = std::string(verb) + " core token '" + tokens[index].text +
                 "' at index " + std::to_string(index);
  return r;
}

InterventionRecord substitute_surface(const Sample& sample,
                                      const InterventionRecord& t1,
                                      const MaskTaskConfig& cfg, Strategy strategy,
                                      const char* literal, const char* verb) {
  const auto tokens = tokenize_words(sample.question);
  const size_t core_index = find_substituted_index(sample, t1, literal);
  auto candidates = surface_indices(tokens, cfg);
  if (candidates.size() < static_cast<size_t>(cfg.k)) {
    throw Error(ErrorKind::NoSurfaceToken,
                "fewer than k=" + std::to_string(cfg.k) +
                    " non-core tokens in '" + sample.question + "'");
  }
  // k-th nearest by token-index distance; ties prefer the earlier token.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](size_t a, size_t b) {
                     auto dist = [&](size_t i) {
                       return i > core_index ? i - core_index : core_index - i;
                     };
                     if (dist(a) != dist(b)) return dist(a) < dist(b);
                     return a < b;
                   });
  const size_t index = candidates[static_cast<size_t>(cfg.k) - 1];
  InterventionRecord r;
  r.origin_id = sample.id;
  r.treatment = Treatment::T0;
  r.strategy = strategy;
  r.question = splice_replace(sample.question, tokens, index, literal);
  r.expected_answer = sample.gold_answer;
  r.pair_id = t1.pair_id;
  r.rep_index = t1.rep_index;
  r.provenance = std::string(verb) + " surface token '" + tokens[index].text +
                 "' at index " + std::to_string(index) + " (rank " +
                 std::to_string(cfg.k) + " from core index " +
                 std::to_string(core_index) + ")";
  return r;
}

std::string options_list_render(const std::optional<std::vector<std::string>>& options) {
  if (!options || options->empty()) return "[]";
  std::string out = "[";
  for (size_t i = 0; i < options->size(); ++i) {
    if (i) out += ", ";
    out += "'" + (*options)[i] + "'";
  }
  out += "]";
  return out;
}

std::string options_lettered_render(const std::optional<std::vector<std::string>>& options) {
  if (!options) return "";
  std::string out;
  for (size_t i = 0; i < options->size(); ++i) {
    out += " (";
    out += static_cast<char>('a' + i);
    out += ") " + (*options)[i];
  }
  return out;
}

std::string option_index_letter(size_t index) {
  std::string out = "(";
  out += static_cast<char>('a' + index);
  out += ")";
  return out;
}

} // namespace

bool is_core_token(const std::vector<WordToken>& tokens, size_t index,
                   const MaskTaskConfig& cfg) {
  if (cfg.positional_core && *cfg.positional_core == index) return true;
  const std::string key = match_key(tokens.at(index).text);
  if (key.empty()) return false;
  if (cfg.core_word_pool.count(key)) return true;
  if (cfg.all_digit_tokens && is_numeric_key(key)) return true;
  return false;
}

std::string make_pair_id(const std::string& origin_id, int rep_index) {
  return origin_id + "#r" + std::to_string(rep_index);
}

InterventionRecord mask_core(const Sample& sample, const MaskTaskConfig& cfg,
                             size_t choice, int rep_index) {
  return substitute_core(sample, cfg, choice, rep_index, Strategy::Mask,
                         kMaskLiteral, "masked");
}

InterventionRecord mask_surface(const Sample& sample, const InterventionRecord& t1,
                                const MaskTaskConfig& cfg) {
  return substitute_surface(sample, t1, cfg, Strategy::Mask, kMaskLiteral,
                            "masked");
}

InterventionRecord replace_core(const Sample& sample, const MaskTaskConfig& cfg,
                                size_t choice, int rep_index) {
  return substitute_core(sample, cfg, choice, rep_index, Strategy::Replace,
                         kReplaceLiteral, "replaced");
}

InterventionRecord replace_surface(const Sample& sample, const InterventionRecord& t1,
                                   const MaskTaskConfig& cfg) {
  return substitute_surface(sample, t1, cfg, Strategy::Replace, kReplaceLiteral,
                            "replaced");
}

InterventionRecord swap_core(const Sample& sample, const MaskTaskConfig& cfg,
                             size_t choice, int rep_index) {
  const auto tokens = tokenize_words(sample.question);
  if (tokens.size() < 2) {
    throw Error(ErrorKind::NotEnoughTokens,
                "swap needs at least two tokens: '" + sample.question + "'");
  }
  const auto cores = core_indices(tokens, cfg);
  if (cores.empty()) {
    throw Error(ErrorKind::NoCoreToken,
                "no core-semantic token in '" + sample.question + "'");
  }
  const auto surfaces = surface_indices(tokens, cfg);
  if (surfaces.empty()) {
    throw Error(ErrorKind::NoSurfaceToken,
                "no non-core token in '" + sample.question + "'");
  }
  const size_t core_index = cores[choice % cores.size()];
  const size_t partner = surfaces.front();
  InterventionRecord r;
  r.origin_id = sample.id;
  r.treatment = Treatment::T1;
  r.strategy = Strategy::Swap;
  r.question = splice_swap(sample.question, tokens, core_index, partner);
  r.expected_answer = kNoExpectedAnswer;
  r.pair_id = make_pair_id(sample.id, rep_index);
  r.rep_index = rep_index;
  r.provenance = "swapped core token '" + tokens[core_index].text + "' at index " +
                 std::to_string(core_index) + " with '" + tokens[partner].text +
                 "' at index " + std::to_string(partner);
  return r;
}

InterventionRecord swap_surface(const Sample& sample, const MaskTaskConfig& cfg,
                                const InterventionRecord& t1) {
  const auto tokens = tokenize_words(sample.question);
  if (tokens.size() < 2) {
    throw Error(ErrorKind::NotEnoughTokens,
                "swap needs at least two tokens: '" + sample.question + "'");
  }
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (!is_core_token(tokens, i, cfg) && !is_core_token(tokens, i + 1, cfg)) {
      InterventionRecord r;
      r.origin_id = sample.id;
      r.treatment = Treatment::T0;
      r.strategy = Strategy::Swap;
      r.question = splice_swap(sample.question, tokens, i, i + 1);
      r.expected_answer = sample.gold_answer;
      r.pair_id = t1.pair_id;
      r.rep_index = t1.rep_index;
      r.provenance = "swapped adjacent surface tokens '" + tokens[i].text +
                     "' and '" + tokens[i + 1].text + "' at indices " +
                     std::to_string(i) + "," + std::to_string(i + 1);
      return r;
    }
  }
  throw Error(ErrorKind::NoSurfaceToken,
              "no adjacent non-core token pair in '" + sample.question + "'");
}

RephraseResult rephrase_by_agent(const std::string& question, const std::string& gold,
                                 const std::optional<std::vector<std::string>>& options,
                                 RephraseTarget target, ModelClient& agent,
                                 const RephraseTemplates& templates) {
  if (templates.max_iterations < 1) {
    throw Error(ErrorKind::Config, "max_iterations must be >= 1");
  }
  const std::string& base = target == RephraseTarget::Alter ? templates.alter
                                                            : templates.preserve;
  const std::string list_options = options_list_render(options);
  const std::string lettered = options_lettered_render(options);
  const size_t n_options = options ? options->size() : 0;

  std::string prompt = fill_template(base, {
      {"[QUESTION]", question},
      {"[OPTIONS]", list_options},
      {"[ANSWER]", gold},
  });

  const std::string gold_norm = normalize_answer(gold);
  std::vector<ChatMessage> chat{{"user", prompt}};
  AgentTranscript transcript;
  transcript.turns.push_back({"user", prompt});

  std::string candidate;
  for (int iteration = 1; iteration <= templates.max_iterations; ++iteration) {
    transcript.iterations_used = iteration;
    candidate = trim(agent.complete(chat));
    transcript.turns.push_back({"assistant", candidate});

    std::string check_prompt = fill_template(templates.predict, {
        {"[QUESTION]", candidate},
        {"[OPTIONS]", lettered},
        {"[INDEX_OF_FIRST_OPT]", option_index_letter(0)},
        {"[INDEX_OF_LAST_OPT]",
         option_index_letter(n_options > 0 ? n_options - 1 : 0)},
    });
    transcript.turns.push_back({"check:user", check_prompt});
    std::string raw_prediction = agent.invoke(check_prompt);
    transcript.turns.push_back({"check:assistant", raw_prediction});

    std::string predicted = normalize_answer(raw_prediction);
    if (options) {
      if (auto resolved = match_option(predicted, *options)) predicted = *resolved;
    }
    transcript.final_prediction = predicted;

    const bool matches_gold = predicted == gold_norm;
    if ((target == RephraseTarget::Alter && !matches_gold) ||
        (target == RephraseTarget::Preserve && matches_gold)) {
      transcript.accepted = true;
      break;
    }
    if (iteration < templates.max_iterations) {
      chat.push_back({"assistant", candidate});
      chat.push_back({"user", templates.feedback});
      transcript.turns.push_back({"user", templates.feedback});
    }
  }
  return {candidate, transcript};
}

namespace {

InterventionRecord rephrase_record(const Sample& sample, int rep_index,
                                   Treatment treatment, const std::string& question,
                                   const std::string& expected,
                                   const AgentTranscript& transcript,
                                   const std::string& agent_identity) {
  std::string joined;
  for (const auto& turn : transcript.turns) {
    joined += turn.role;
    joined += '\x1f';
    joined += turn.message;
    joined += '\x1e';
  }
  InterventionRecord r;
  r.origin_id = sample.id;
  r.treatment = treatment;
  r.strategy = Strategy::Rephrase;
  r.question = question;
  r.expected_answer = expected;
  r.pair_id = make_pair_id(sample.id, rep_index);
  r.rep_index = rep_index;
  r.provenance = "agent=" + agent_identity +
                 " iterations=" + std::to_string(transcript.iterations_used) +
                 " accepted=" + (transcript.accepted ? "true" : "false") +
                 " transcript=" + hex64(fnv1a64(joined));
  return r;
}

} // namespace

InterventionSets generate_intervention_sets(const std::vector<Sample>& correct,
                                            Strategy strategy, const TaskConfig& cfg,
                                            int reps, ModelClient* agent) {
  if (correct.empty()) {
    throw Error(ErrorKind::Undefined, "no correctly answered samples to intervene on");
  }
  if (reps < 1) throw Error(ErrorKind::Config, "reps must be >= 1");
  if (strategy == Strategy::Rephrase && agent == nullptr) {
    throw Error(ErrorKind::Config, "rephrase strategy needs an agent model");
  }

  InterventionSets sets;
  for (const Sample& sample : correct) {
    for (int rep = 0; rep < reps; ++rep) {
      try {
        InterventionRecord t1;
        InterventionRecord t0;
        switch (strategy) {
          case Strategy::Mask:
            t1 = mask_core(sample, cfg.mask, static_cast<size_t>(rep), rep);
            t0 = mask_surface(sample, t1, cfg.mask);
            break;
          case Strategy::Replace:
            t1 = replace_core(sample, cfg.mask, static_cast<size_t>(rep), rep);
            t0 = replace_surface(sample, t1, cfg.mask);
            break;
          case Strategy::Swap:
            t1 = swap_core(sample, cfg.mask, static_cast<size_t>(rep), rep);
            t0 = swap_surface(sample, cfg.mask, t1);
            break;
          case Strategy::Rephrase: {
            RephraseResult alter = rephrase_by_agent(
                sample.question, sample.gold_answer, sample.options,
                RephraseTarget::Alter, *agent, cfg.rephrase);
            t1 = rephrase_record(sample, rep, Treatment::T1, alter.question,
                                 alter.transcript.final_prediction.empty()
                                     ? std::string(kNoExpectedAnswer)
                                     : alter.transcript.final_prediction,
                                 alter.transcript, agent->identity());
            RephraseResult preserve = rephrase_by_agent(
                alter.question, sample.gold_answer, sample.options,
                RephraseTarget::Preserve, *agent, cfg.rephrase);
            t0 = rephrase_record(sample, rep, Treatment::T0, preserve.question,
                                 sample.gold_answer, preserve.transcript,
                                 agent->identity());
            break;
          }
        }
        sets.t1.push_back(std::move(t1));
        sets.t0.push_back(std::move(t0));
      } catch (const Error& e) {
        switch (e.kind()) {
          case ErrorKind::NoCoreToken:
          case ErrorKind::NoSurfaceToken:
          case ErrorKind::NotEnoughTokens:
            sets.skipped.push_back({sample.id, rep, e.what()});
            continue;
          default:
            throw;
        }
      }
    }
  }
  if (sets.t1.empty()) {
    std::string detail = sets.skipped.empty() ? "" : ": " + sets.skipped.front().reason;
    throw Error(ErrorKind::Undefined, "every sample was skipped" + detail);
  }
  return sets;
}

} // namespace structeval
