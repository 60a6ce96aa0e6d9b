#include "structeval/infer.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval {

std::string build_prompt(const std::string& question,
                         const std::optional<std::vector<std::string>>& options,
                         const std::string& template_text) {
  if (!contains_placeholder(template_text, "[QUESTION]")) {
    throw Error(ErrorKind::Config, "prompt template has no [QUESTION] slot");
  }
  std::vector<std::pair<std::string, std::string>> subs{{"[QUESTION]", question}};
  if (options && !options->empty()) {
    if (!contains_placeholder(template_text, "[OPTIONS]")) {
      throw Error(ErrorKind::Config,
                  "sample has options but the template has no [OPTIONS] slot");
    }
    std::string lettered;
    for (size_t i = 0; i < options->size(); ++i) {
      lettered += " (";
      lettered += static_cast<char>('a' + i);
      lettered += ") " + (*options)[i];
    }
    subs.emplace_back("[OPTIONS]", lettered);
    subs.emplace_back("[INDEX_OF_FIRST_OPT]", "(a)");
    std::string last = "(";
    last += static_cast<char>('a' + options->size() - 1);
    last += ")";
    subs.emplace_back("[INDEX_OF_LAST_OPT]", last);
  } else {
    subs.emplace_back("[OPTIONS]", "");
  }
  return fill_template(template_text, subs);
}

Extraction extract_answer(const std::string& raw, const ExtractionPolicy& policy,
                          const std::optional<std::vector<std::string>>& options) {
  std::string tail = raw;
  if (!policy.answer_pattern.empty()) {
    size_t pos = raw.rfind(policy.answer_pattern);
    if (pos != std::string::npos) {
      tail = raw.substr(pos + policy.answer_pattern.size());
    }
  }
  Extraction out;
  out.answer = normalize_answer(tail);
  if (options && !options->empty()) {
    if (auto resolved = match_option(out.answer, *options)) {
      out.answer = *resolved;
      out.matched = true;
    } else {
      out.matched = false;
    }
  } else {
    out.matched = true;
  }
  return out;
}

std::vector<OutcomeRecord> run_stage(const std::vector<StageItem>& items,
                                     ModelClient& model,
                                     const ExtractionPolicy& policy,
                                     const std::string& prompt_template,
                                     int concurrency) {
  if (concurrency < 1) throw Error(ErrorKind::Config, "concurrency must be >= 1");

  std::vector<OutcomeRecord> results(items.size());
  std::atomic<size_t> cursor{0};
  std::atomic<bool> aborted{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!aborted.load()) {
      const size_t i = cursor.fetch_add(1);
      if (i >= items.size()) return;
      const StageItem& item = items[i];
      OutcomeRecord outcome;
      outcome.sample_ref = item.ref;
      outcome.stage = item.stage;
      try {
        const std::string prompt =
            build_prompt(item.question, item.options, prompt_template);
        const std::string raw = model.complete({{"user", prompt}});
        Extraction extraction = extract_answer(raw, policy, item.options);
        outcome.raw_response = raw;
        outcome.answer = extraction.answer;
        outcome.matched = extraction.matched;
        if (item.gold) {
          outcome.correct = (outcome.answer == normalize_answer(*item.gold));
        }
        if (item.origin_answer) {
          outcome.changed_vs_origin = (outcome.answer != *item.origin_answer);
        }
      } catch (const ResponseFailure&) {
        outcome.matched = false;
        outcome.failed = true;
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        aborted.store(true);
        return;
      }
      results[i] = std::move(outcome);
    }
  };

  const size_t n_workers =
      std::min<size_t>(static_cast<size_t>(concurrency), std::max<size_t>(items.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<StageItem> stage_items_from_samples(const std::vector<Sample>& samples) {
  std::vector<StageItem> items;
  items.reserve(samples.size());
  for (const Sample& s : samples) {
    items.push_back({s.id, Stage::Origin, s.question, s.options, s.gold_answer,
                     std::nullopt});
  }
  return items;
}

std::vector<StageItem> stage_items_from_interventions(
    const std::vector<InterventionRecord>& records,
    const std::vector<Sample>& dataset,
    const std::vector<OutcomeRecord>& origin_outcomes) {
  std::unordered_map<std::string, const Sample*> by_id;
  for (const Sample& s : dataset) by_id[s.id] = &s;
  std::unordered_map<std::string, const OutcomeRecord*> origin_by_id;
  for (const OutcomeRecord& o : origin_outcomes) {
    if (o.stage == Stage::Origin) origin_by_id[o.sample_ref] = &o;
  }

  std::vector<StageItem> items;
  items.reserve(records.size());
  for (const InterventionRecord& r : records) {
    auto sample_it = by_id.find(r.origin_id);
    if (sample_it == by_id.end()) {
      throw Error(ErrorKind::Pairing,
                  "intervention record references unknown origin '" + r.origin_id + "'");
    }
    auto origin_it = origin_by_id.find(r.origin_id);
    if (origin_it == origin_by_id.end()) {
      throw Error(ErrorKind::Pairing,
                  "no origin outcome for '" + r.origin_id + "'");
    }
    StageItem item;
    item.ref = r.pair_id;
    item.stage = r.treatment == Treatment::T1 ? Stage::T1 : Stage::T0;
    item.question = r.question;
    item.options = sample_it->second->options;
    if (r.treatment == Treatment::T0) item.gold = r.expected_answer;
    if (!origin_it->second->failed) item.origin_answer = origin_it->second->answer;
    items.push_back(std::move(item));
  }
  return items;
}

FilterResult filter_correct(const std::vector<OutcomeRecord>& outcomes,
                            const std::vector<Sample>& samples) {
  std::unordered_map<std::string, const OutcomeRecord*> by_ref;
  for (const OutcomeRecord& o : outcomes) {
    if (o.stage == Stage::Origin) by_ref[o.sample_ref] = &o;
  }
  FilterResult result;
  result.n_total = static_cast<int64_t>(samples.size());
  for (const Sample& s : samples) {
    auto it = by_ref.find(s.id);
    if (it == by_ref.end()) {
      throw Error(ErrorKind::Pairing, "no outcome for sample '" + s.id + "'");
    }
    const OutcomeRecord& o = *it->second;
    if (o.failed) {
      ++result.n_failed;
      continue;
    }
    if (!o.matched) ++result.n_unmatched;
    if (o.correct.value_or(false)) {
      ++result.n_correct;
      result.correct.push_back(s);
    }
  }
  const int64_t denom = result.n_total - result.n_failed;
  result.accuracy = denom > 0 ? static_cast<double>(result.n_correct) /
                                    static_cast<double>(denom)
                              : 0.0;
  return result;
}

} // namespace structeval
