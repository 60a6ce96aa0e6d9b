#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "structeval/model.hpp"
#include "structeval/record.hpp"

namespace structeval {

struct ExtractionPolicy {
  std::string answer_pattern = "The answer is";
};

// Deterministic template substitution. [QUESTION] is mandatory; [OPTIONS]
// is mandatory when the sample has options and renders as " (a) ... (b) ...".
std::string build_prompt(const std::string& question,
                         const std::optional<std::vector<std::string>>& options,
                         const std::string& template_text);

struct Extraction {
  std::string answer;
  bool matched = true;
};

// Takes the substring after the LAST occurrence of the answer pattern (whole
// response when absent), normalizes it, and maps it onto an option when the
// sample has options. `matched` is false only when option matching fails.
Extraction extract_answer(const std::string& raw, const ExtractionPolicy& policy,
                          const std::optional<std::vector<std::string>>& options);

// One unit of work for a stage run.
struct StageItem {
  std::string ref; // sample id (origin) or pair_id (t1/t0)
  Stage stage = Stage::Origin;
  std::string question;
  std::optional<std::vector<std::string>> options;
  std::optional<std::string> gold;          // enables the correct flag
  std::optional<std::string> origin_answer; // normalized; enables changed flag
};

// Fan out up to `concurrency` in-flight requests; output order equals input
// order. Per-request response failures become failed-flagged records; a
// transport failure aborts the stage (completed work stays in the cache).
std::vector<OutcomeRecord> run_stage(const std::vector<StageItem>& items,
                                     ModelClient& model,
                                     const ExtractionPolicy& policy,
                                     const std::string& prompt_template,
                                     int concurrency);

std::vector<StageItem> stage_items_from_samples(const std::vector<Sample>& samples);

// Join intervention records back to their origin samples (for options) and
// origin outcomes (for the changed_vs_origin reference answer).
std::vector<StageItem> stage_items_from_interventions(
    const std::vector<InterventionRecord>& records,
    const std::vector<Sample>& dataset,
    const std::vector<OutcomeRecord>& origin_outcomes);

struct FilterResult {
  std::vector<Sample> correct; // input order preserved
  double accuracy = 0.0;
  int64_t n_total = 0;
  int64_t n_correct = 0;
  int64_t n_failed = 0;
  int64_t n_unmatched = 0;
};

// Stage-1 filter: keep the samples the model answered correctly. Failed
// outcomes are excluded from both numerator and denominator.
FilterResult filter_correct(const std::vector<OutcomeRecord>& outcomes,
                            const std::vector<Sample>& samples);

} // namespace structeval
