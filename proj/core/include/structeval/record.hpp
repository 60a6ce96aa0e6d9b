#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace structeval {

using ojson = nlohmann::ordered_json;

enum class Treatment { T0, T1 };
enum class Strategy { Mask, Rephrase, Replace, Swap };
enum class Stage { Origin, T1, T0 };

std::string to_string(Treatment t);
std::string to_string(Strategy s);
std::string to_string(Stage s);
Treatment treatment_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);
Stage stage_from_string(const std::string& s);

// One dataset item. Deep/surface structure are not fields here: they are
// latent and only realized through intervention strategies.
struct Sample {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::optional<std::vector<std::string>> options;
  std::string task;

  bool operator==(const Sample&) const = default;
};

// A derived question variant for one treatment arm. Every T0 record is
// paired with the T1 record it was derived from via pair_id.
struct InterventionRecord {
  std::string origin_id;
  Treatment treatment = Treatment::T1;
  Strategy strategy = Strategy::Mask;
  std::string question;
  std::string expected_answer; // gold for T0; agent-predicted or "None" for T1
  std::string pair_id;
  int rep_index = 0;
  std::string provenance;

  bool operator==(const InterventionRecord&) const = default;
};

// The model's response for one (sample, stage) query.
struct OutcomeRecord {
  std::string sample_ref; // sample id (origin stage) or pair_id (t1/t0)
  Stage stage = Stage::Origin;
  std::string raw_response;
  std::string answer; // normalized extracted answer
  std::optional<bool> changed_vs_origin; // only meaningful for t1/t0
  std::optional<bool> correct;           // only where gold exists
  bool matched = true; // extraction located a usable answer
  bool failed = false; // transport-level failure; excluded from estimation

  bool operator==(const OutcomeRecord&) const = default;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const ConfidenceInterval&) const = default;
};

// Effect estimates for one (model, dataset, strategy) run. adce == te - aice
// exactly by construction; `defined` is false when no sample was answered
// correctly, in which case no rate other than accuracy is meaningful.
struct EffectEstimate {
  std::string model;
  std::string dataset;
  std::string strategy;
  bool defined = false;
  double accuracy = 0.0;
  double te = 0.0;
  double aice = 0.0;
  double adce = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> ps;
  std::optional<double> pn;
  bool monotone = true;
  int64_t n_origin = 0;
  int64_t n_correct = 0;
  int64_t n_t1 = 0;
  int64_t n_t0 = 0;
  int64_t n_failed = 0;
  int64_t n_unmatched = 0;
  bool imbalanced = false; // effective arm sizes differ by more than 5%
  std::optional<double> ci_level;
  std::map<std::string, ConfidenceInterval> ci;

  bool operator==(const EffectEstimate&) const = default;
};

ojson to_json(const Sample& s);
ojson to_json(const InterventionRecord& r);
ojson to_json(const OutcomeRecord& r);
ojson to_json(const EffectEstimate& e);

Sample sample_from_json(const ojson& j);
InterventionRecord intervention_from_json(const ojson& j);
OutcomeRecord outcome_from_json(const ojson& j);
EffectEstimate estimate_from_json(const ojson& j);

// Line-delimited record files: one JSON object per line, UTF-8, stable field
// order, bit-exact round trip.
std::vector<Sample> read_samples(const std::filesystem::path& path);
std::vector<InterventionRecord> read_interventions(const std::filesystem::path& path);
std::vector<OutcomeRecord> read_outcomes(const std::filesystem::path& path);
std::vector<EffectEstimate> read_estimates(const std::filesystem::path& path);

void write_records(const std::filesystem::path& path, const std::vector<Sample>& records);
void write_records(const std::filesystem::path& path, const std::vector<InterventionRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<OutcomeRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<EffectEstimate>& records);

// read_samples plus dataset-level validation: unique ids, non-empty gold,
// and (when options are present) gold must normalize to one of the options.
std::vector<Sample> read_dataset(const std::filesystem::path& path);

} // namespace structeval
