#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "structeval/model.hpp"
#include "structeval/record.hpp"
#include "structeval/task_config.hpp"
#include "structeval/text.hpp"

namespace structeval {

inline constexpr const char* kMaskLiteral = "<Mask>";
inline constexpr const char* kReplaceLiteral = "*";
inline constexpr const char* kNoExpectedAnswer = "None";

// True when the token at `index` carries core semantics under this config.
bool is_core_token(const std::vector<WordToken>& tokens, size_t index,
                   const MaskTaskConfig& cfg);

// --- Mask strategy ---------------------------------------------------------
// T1: replace one core token with <Mask>. `choice` rotates over the core
// tokens in reading order (choice mod #core), giving reproducible variety
// across reps without randomness.
InterventionRecord mask_core(const Sample& sample, const MaskTaskConfig& cfg,
                             size_t choice, int rep_index);

// T0: mask the k-th nearest non-core token of the ORIGINAL question, measured
// by token-index distance from the token masked in `t1`. Ties prefer the
// earlier token.
InterventionRecord mask_surface(const Sample& sample, const InterventionRecord& t1,
                                const MaskTaskConfig& cfg);

// --- Replace strategy ------------------------------------------------------
// Same token selection as mask, but the replacement string is "*".
InterventionRecord replace_core(const Sample& sample, const MaskTaskConfig& cfg,
                                size_t choice, int rep_index);
InterventionRecord replace_surface(const Sample& sample, const InterventionRecord& t1,
                                   const MaskTaskConfig& cfg);

// --- Swap strategy ---------------------------------------------------------
// T1: exchange the chosen core token with the first non-core token, changing
// semantics. T0: exchange the first adjacent pair of non-core tokens.
InterventionRecord swap_core(const Sample& sample, const MaskTaskConfig& cfg,
                             size_t choice, int rep_index);
InterventionRecord swap_surface(const Sample& sample, const MaskTaskConfig& cfg,
                                const InterventionRecord& t1);

// --- Rephrase strategy -----------------------------------------------------
enum class RephraseTarget { Alter, Preserve };

struct TranscriptTurn {
  std::string role;
  std::string message;
};

struct AgentTranscript {
  std::vector<TranscriptTurn> turns;
  bool accepted = false;
  int iterations_used = 0;
  std::string final_prediction; // normalized label from the last self-check
};

struct RephraseResult {
  std::string question;
  AgentTranscript transcript;
};

// Generate -> self-check -> feedback loop. Alter accepts when the agent's
// predicted label differs from `gold`; Preserve accepts when it matches. On
// budget exhaustion the last candidate is returned with accepted=false.
RephraseResult rephrase_by_agent(const std::string& question, const std::string& gold,
                                 const std::optional<std::vector<std::string>>& options,
                                 RephraseTarget target, ModelClient& agent,
                                 const RephraseTemplates& templates);

// --- Batch generation ------------------------------------------------------
struct SkippedSample {
  std::string id;
  int rep_index = 0;
  std::string reason;
};

struct InterventionSets {
  std::vector<InterventionRecord> t1;
  std::vector<InterventionRecord> t0;
  std::vector<SkippedSample> skipped;
};

// Produce `reps` paired (T1, T0) records per correctly-answered sample. The
// arms come out balanced by construction: each rep yields exactly one record
// per arm, so P(T=1) = P(T=0) = 1/2. Samples that fail a strategy
// precondition are skipped and logged, not fatal; an empty result is.
InterventionSets generate_intervention_sets(const std::vector<Sample>& correct,
                                            Strategy strategy, const TaskConfig& cfg,
                                            int reps, ModelClient* agent);

std::string make_pair_id(const std::string& origin_id, int rep_index);

} // namespace structeval
