#include "structeval/record.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval {

std::string to_string(Treatment t) { return t == Treatment::T1 ? "T1" : "T0"; }

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Mask: return "mask";
    case Strategy::Rephrase: return "rephrase";
    case Strategy::Replace: return "replace";
    case Strategy::Swap: return "swap";
  }
  return "mask";
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Origin: return "origin";
    case Stage::T1: return "t1";
    case Stage::T0: return "t0";
  }
  return "origin";
}

Treatment treatment_from_string(const std::string& s) {
  if (s == "T1") return Treatment::T1;
  if (s == "T0") return Treatment::T0;
  throw Error(ErrorKind::Parse, "unknown treatment value: '" + s + "'");
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "mask") return Strategy::Mask;
  if (s == "rephrase") return Strategy::Rephrase;
  if (s == "replace") return Strategy::Replace;
  if (s == "swap") return Strategy::Swap;
  throw Error(ErrorKind::Parse, "unknown strategy value: '" + s + "'");
}

Stage stage_from_string(const std::string& s) {
  if (s == "origin") return Stage::Origin;
  if (s == "t1") return Stage::T1;
  if (s == "t0") return Stage::T0;
  throw Error(ErrorKind::Parse, "unknown stage value: '" + s + "'");
}

namespace {

const ojson& require(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorKind::Parse, std::string("missing field '") + key + "'");
  }
  return *it;
}

template <typename T>
T field(const ojson& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse,
                std::string("bad field '") + key + "': " + e.what());
  }
}

} // namespace

ojson to_json(const Sample& s) {
  ojson j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["gold_answer"] = s.gold_answer;
  if (s.options) j["options"] = *s.options;
  j["task"] = s.task;
  return j;
}

Sample sample_from_json(const ojson& j) {
  Sample s;
  s.id = field<std::string>(j, "id");
  s.question = field<std::string>(j, "question");
  s.gold_answer = field<std::string>(j, "gold_answer");
  if (j.contains("options") && !j["options"].is_null()) {
    s.options = field<std::vector<std::string>>(j, "options");
  }
  s.task = field<std::string>(j, "task");
  return s;
}

ojson to_json(const InterventionRecord& r) {
  ojson j;
  j["origin_id"] = r.origin_id;
  j["treatment"] = to_string(r.treatment);
  j["strategy"] = to_string(r.strategy);
  j["question"] = r.question;
  j["expected_answer"] = r.expected_answer;
  j["pair_id"] = r.pair_id;
  j["rep_index"] = r.rep_index;
  j["provenance"] = r.provenance;
  return j;
}

InterventionRecord intervention_from_json(const ojson& j) {
  InterventionRecord r;
  r.origin_id = field<std::string>(j, "origin_id");
  r.treatment = treatment_from_string(field<std::string>(j, "treatment"));
  r.strategy = strategy_from_string(field<std::string>(j, "strategy"));
  r.question = field<std::string>(j, "question");
  r.expected_answer = field<std::string>(j, "expected_answer");
  r.pair_id = field<std::string>(j, "pair_id");
  r.rep_index = field<int>(j, "rep_index");
  if (r.rep_index < 0) throw Error(ErrorKind::Parse, "rep_index must be >= 0");
  r.provenance = field<std::string>(j, "provenance");
  return r;
}

ojson to_json(const OutcomeRecord& r) {
  ojson j;
  j["sample_ref"] = r.sample_ref;
  j["stage"] = to_string(r.stage);
  j["raw_response"] = r.raw_response;
  j["answer"] = r.answer;
  if (r.changed_vs_origin) j["changed_vs_origin"] = *r.changed_vs_origin;
  if (r.correct) j["correct"] = *r.correct;
  j["matched"] = r.matched;
  j["failed"] = r.failed;
  return j;
}

OutcomeRecord outcome_from_json(const ojson& j) {
  OutcomeRecord r;
  r.sample_ref = field<std::string>(j, "sample_ref");
  r.stage = stage_from_string(field<std::string>(j, "stage"));
  r.raw_response = field<std::string>(j, "raw_response");
  r.answer = field<std::string>(j, "answer");
  if (j.contains("changed_vs_origin") && !j["changed_vs_origin"].is_null()) {
    r.changed_vs_origin = field<bool>(j, "changed_vs_origin");
  }
  if (j.contains("correct") && !j["correct"].is_null()) {
    r.correct = field<bool>(j, "correct");
  }
  r.matched = field<bool>(j, "matched");
  r.failed = field<bool>(j, "failed");
  return r;
}

ojson to_json(const EffectEstimate& e) {
  ojson j;
  j["model"] = e.model;
  j["dataset"] = e.dataset;
  j["strategy"] = e.strategy;
  j["defined"] = e.defined;
  j["accuracy"] = e.accuracy;
  j["te"] = e.te;
  j["aice"] = e.aice;
  j["adce"] = e.adce;
  j["alpha"] = e.alpha;
  j["beta"] = e.beta;
  j["ps"] = e.ps ? ojson(*e.ps) : ojson(nullptr);
  j["pn"] = e.pn ? ojson(*e.pn) : ojson(nullptr);
  j["monotone"] = e.monotone;
  j["n_origin"] = e.n_origin;
  j["n_correct"] = e.n_correct;
  j["n_t1"] = e.n_t1;
  j["n_t0"] = e.n_t0;
  j["n_failed"] = e.n_failed;
  j["n_unmatched"] = e.n_unmatched;
  j["imbalanced"] = e.imbalanced;
  if (e.ci_level) {
    j["ci_level"] = *e.ci_level;
    ojson ci = ojson::object();
    for (const auto& [name, interval] : e.ci) {
      ci[name] = ojson::array({interval.low, interval.high});
    }
    j["ci"] = ci;
  }
  return j;
}

EffectEstimate estimate_from_json(const ojson& j) {
  EffectEstimate e;
  e.model = field<std::string>(j, "model");
  e.dataset = field<std::string>(j, "dataset");
  e.strategy = field<std::string>(j, "strategy");
  e.defined = field<bool>(j, "defined");
  e.accuracy = field<double>(j, "accuracy");
  e.te = field<double>(j, "te");
  e.aice = field<double>(j, "aice");
  e.adce = field<double>(j, "adce");
  e.alpha = field<double>(j, "alpha");
  e.beta = field<double>(j, "beta");
  if (j.contains("ps") && !j["ps"].is_null()) e.ps = j["ps"].get<double>();
  if (j.contains("pn") && !j["pn"].is_null()) e.pn = j["pn"].get<double>();
  e.monotone = field<bool>(j, "monotone");
  e.n_origin = field<int64_t>(j, "n_origin");
  e.n_correct = field<int64_t>(j, "n_correct");
  e.n_t1 = field<int64_t>(j, "n_t1");
  e.n_t0 = field<int64_t>(j, "n_t0");
  e.n_failed = field<int64_t>(j, "n_failed");
  e.n_unmatched = field<int64_t>(j, "n_unmatched");
  e.imbalanced = field<bool>(j, "imbalanced");
  if (j.contains("ci_level") && !j["ci_level"].is_null()) {
    e.ci_level = j["ci_level"].get<double>();
    for (const auto& [name, arr] : j.at("ci").items()) {
      if (!arr.is_array() || arr.size() != 2) {
        throw Error(ErrorKind::Parse, "ci entry '" + name + "' must be [low, high]");
      }
      e.ci[name] = {arr[0].get<double>(), arr[1].get<double>()};
    }
  }
  if (e.adce != e.te - e.aice) {
    throw Error(ErrorKind::Parse, "estimate violates adce = te - aice");
  }
  return e;
}

namespace {

template <typename T, typename FromJson>
std::vector<T> read_lines(const std::filesystem::path& path, FromJson from) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) +
                                        ": " + e.what());
    }
    try {
      out.push_back(from(j));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " +
                                e.what());
    }
  }
  return out;
}

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& records) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (const T& r : records) {
    out << to_json(r).dump() << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

} // namespace

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  return read_lines<Sample>(path, sample_from_json);
}
std::vector<InterventionRecord> read_interventions(const std::filesystem::path& path) {
  return read_lines<InterventionRecord>(path, intervention_from_json);
}
std::vector<OutcomeRecord> read_outcomes(const std::filesystem::path& path) {
  return read_lines<OutcomeRecord>(path, outcome_from_json);
}
std::vector<EffectEstimate> read_estimates(const std::filesystem::path& path) {
  return read_lines<EffectEstimate>(path, estimate_from_json);
}

void write_records(const std::filesystem::path& path, const std::vector<Sample>& records) {
  write_lines(path, records);
}
void write_records(const std::filesystem::path& path, const std::vector<InterventionRecord>& records) {
  write_lines(path, records);
}
void write_records(const std::filesystem::path& path, const std::vector<OutcomeRecord>& records) {
  write_lines(path, records);
}
void write_records(const std::filesystem::path& path, const std::vector<EffectEstimate>& records) {
  write_lines(path, records);
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
  std::vector<Sample> samples = read_samples(path);
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    auto at = [&] { return path.string() + ": sample " + std::to_string(i + 1); };
    if (s.id.empty()) throw Error(ErrorKind::Parse, at() + ": empty id");
    if (!seen.insert(s.id).second) {
      throw Error(ErrorKind::Parse, at() + ": duplicate id '" + s.id + "'");
    }
    if (s.gold_answer.empty()) {
      throw Error(ErrorKind::Parse, at() + ": empty gold_answer");
    }
    if (s.options) {
      bool found = false;
      for (const std::string& opt : *s.options) {
        if (normalize_answer(opt) == normalize_answer(s.gold_answer)) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw Error(ErrorKind::Parse,
                    at() + ": gold_answer not among options after normalization");
      }
    }
  }
  return samples;
}

} // namespace structeval
