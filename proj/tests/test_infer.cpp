#include "structeval/infer.hpp"

#include <gtest/gtest.h>

#include "structeval/cache.hpp"
#include "structeval/mock_models.hpp"
#include "structeval/rng.hpp"
#include "structeval/task_config.hpp"
#include "structeval/text.hpp"
#include "test_support.hpp"

using namespace structeval;
using testsupport::TempDir;

namespace {

std::string mult_template() {
  return testsupport::slurp(testsupport::assets_dir() / "templates" /
                            "task_mult.txt");
}

MaskTaskConfig mult_rule() {
  MaskTaskConfig cfg;
  cfg.core_word_pool = {"times"};
  cfg.all_digit_tokens = true;
  return cfg;
}

} // namespace

TEST(BuildPrompt, SubstitutesQuestionVerbatim) {
  std::string prompt =
      build_prompt("What is 50 times 20?", std::nullopt, mult_template());
  EXPECT_NE(prompt.find("What is 50 times 20?"), std::string::npos);
  EXPECT_NE(prompt.find("arithmetic reasoning"), std::string::npos);
  EXPECT_EQ(prompt.find("[QUESTION]"), std::string::npos);
}

TEST(BuildPrompt, MissingQuestionSlotIsAnError) {
  EXPECT_THROW(build_prompt("Q?", std::nullopt, "no slot here"), Error);
}

TEST(BuildPrompt, OptionsRenderedInListedOrder) {
  std::string prompt = build_prompt(
      "Pick?", std::vector<std::string>{"money", "literacy"},
      "Q: [QUESTION][OPTIONS]\nAmong [INDEX_OF_FIRST_OPT] through "
      "[INDEX_OF_LAST_OPT], the answer is");
  EXPECT_NE(prompt.find("(a) money (b) literacy"), std::string::npos);
  EXPECT_NE(prompt.find("Among (a) through (b)"), std::string::npos);
}

TEST(BuildPrompt, OptionsWithoutSlotIsAnError) {
  EXPECT_THROW(
      build_prompt("Q?", std::vector<std::string>{"a", "b"}, "only [QUESTION]"),
      Error);
}

TEST(ExtractAnswer, PatternThenNormalization) {
  ExtractionPolicy policy;
  auto extraction = extract_answer("The answer is 1000.", policy, std::nullopt);
  EXPECT_EQ(extraction.answer, "1000");
  EXPECT_TRUE(extraction.matched);
}

TEST(ExtractAnswer, LastOccurrenceWins) {
  ExtractionPolicy policy;
  auto extraction = extract_answer(
      "The answer is probably wrong. Let me think. The answer is 42.", policy,
      std::nullopt);
  EXPECT_EQ(extraction.answer, "42");
}

TEST(ExtractAnswer, OptionMatching) {
  ExtractionPolicy policy;
  std::vector<std::string> options{"money", "literacy"};
  auto extraction =
      extract_answer("I think... The answer is literacy", policy, options);
  EXPECT_EQ(extraction.answer, "literacy");
  EXPECT_TRUE(extraction.matched);

  auto by_letter = extract_answer("(b)", policy, options);
  EXPECT_EQ(by_letter.answer, "literacy");
  EXPECT_TRUE(by_letter.matched);
}

TEST(ExtractAnswer, GibberishWithOptionsIsUnmatched) {
  ExtractionPolicy policy;
  std::vector<std::string> options{"money", "literacy"};
  auto extraction = extract_answer("MTatual novemberdxanime alqun", policy, options);
  EXPECT_FALSE(extraction.matched);
  EXPECT_EQ(extraction.answer, "mtatual novemberdxanime alqun");
}

TEST(ExtractAnswer, ThousandsSeparatorsRemoved) {
  ExtractionPolicy policy;
  EXPECT_EQ(extract_answer("The answer is 1,000.", policy, std::nullopt).answer,
            "1000");
}

TEST(Normalization, Idempotent) {
  Rng rng(4242);
  const std::string alphabet = "aB3,. ?!()'x9";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (size_t i = 0, n = rng.next_below(24); i < n; ++i) {
      s += alphabet[rng.next_below(alphabet.size())];
    }
    std::string once = normalize_answer(s);
    EXPECT_EQ(normalize_answer(once), once) << "input: '" << s << "'";
  }
}

TEST(Mocks, DeepThinkerComputesFromCoreTokensOnly) {
  DeepThinkerModel model(mult_rule(), 1);
  std::string origin = model.invoke("Some preamble. What is 50 times 20?");
  EXPECT_EQ(origin, "The answer is 1000.");
  // Surface edits leave the core token sequence alone.
  EXPECT_EQ(model.invoke("What <Mask> 50 times 20?"), origin);
  EXPECT_EQ(model.invoke("is What 50 times 20?"), origin);
  // Core edits always move the answer.
  EXPECT_NE(model.invoke("What is <Mask> times 20?"), origin);
  EXPECT_NE(model.invoke("What is 50 <Mask> 20?"), origin);
  EXPECT_NE(model.invoke("What is 50 times 21?"), origin);
}

TEST(Mocks, SurfaceLearnerMemorizesExactTextOnly) {
  std::vector<Sample> memorized{
      {"q1", "What is 50 times 20?", "1000", std::nullopt, "t"}};
  SurfaceLearnerModel model(memorized, 1);
  EXPECT_EQ(model.invoke("Prefix. What is 50 times 20?"), "The answer is 1000.");
  std::string masked = model.invoke("Prefix. What <Mask> 50 times 20?");
  EXPECT_NE(masked, "The answer is 1000.");
  // Any distinct text maps to a distinct, deterministic hash answer.
  EXPECT_EQ(masked, model.invoke("Prefix. What <Mask> 50 times 20?"));
  EXPECT_NE(masked, model.invoke("Prefix. What is <Mask> times 20?"));
}

TEST(Mocks, GibberishIsDeterministicPerPromptAndNeverAnswers) {
  GibberishModel model(9);
  std::string a = model.invoke("What is 50 times 20?");
  EXPECT_EQ(a, model.invoke("What is 50 times 20?"));
  EXPECT_NE(a, model.invoke("What is 50 times 21?"));
  EXPECT_EQ(a.find("The answer is"), std::string::npos);
  GibberishModel other_seed(10);
  EXPECT_NE(a, other_seed.invoke("What is 50 times 20?"));
}

TEST(Mocks, ScriptedMapQueueAndFailure) {
  ScriptedModel model({{"ping", "pong"}}, {"first", "<FAIL>"});
  EXPECT_EQ(model.invoke("ping"), "pong");
  EXPECT_EQ(model.invoke("unknown"), "first");
  EXPECT_THROW(model.invoke("unknown again"), ResponseFailure);
  EXPECT_THROW(model.invoke("queue empty now"), TransportFailure);
}

TEST(Cache, WarmRerunHitsTheCacheAndReproducesBytes) {
  TempDir tmp("cache");
  std::vector<Sample> samples;
  for (int i = 0; i < 8; ++i) {
    samples.push_back({"s" + std::to_string(i),
                       "What is " + std::to_string(11 + i) + " times 7?",
                       std::to_string((11 + i) * 7), std::nullopt, "t"});
  }
  auto cache = std::make_shared<ResponseCache>(tmp.path() / "cache");
  auto inner = std::make_shared<DeepThinkerModel>(mult_rule(), 3);

  CachedModel first(inner, cache);
  auto outcomes1 = run_stage(stage_items_from_samples(samples), first,
                             ExtractionPolicy{}, mult_template(), 4);
  EXPECT_EQ(first.upstream_calls(), samples.size());

  CachedModel second(inner, cache);
  auto outcomes2 = run_stage(stage_items_from_samples(samples), second,
                             ExtractionPolicy{}, mult_template(), 4);
  EXPECT_EQ(second.upstream_calls(), 0u);
  EXPECT_EQ(outcomes1, outcomes2);
}

TEST(Cache, FirstCommittedValueWins) {
  TempDir tmp("cache");
  ResponseCache cache(tmp.path() / "c");
  EXPECT_EQ(cache.put_if_absent("k", "first"), "first");
  EXPECT_EQ(cache.put_if_absent("k", "second"), "first");
  EXPECT_EQ(cache.get("k"), "first");
}

TEST(Cache, KeySeparatesModelsAndDecoding) {
  std::string a = ResponseCache::sha256_hex("model-a\x1fgreedy\x1fuser\x1fhi\x1e");
  std::string b = ResponseCache::sha256_hex("model-b\x1fgreedy\x1fuser\x1fhi\x1e");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), 64u);
}

TEST(RunStage, OrderPreservedUnderConcurrency) {
  std::vector<Sample> samples;
  for (int i = 0; i < 60; ++i) {
    samples.push_back({"s" + std::to_string(i),
                       "What is " + std::to_string(10 + i) + " times 3?",
                       std::to_string((10 + i) * 3), std::nullopt, "t"});
  }
  DeepThinkerModel model(mult_rule(), 3);
  auto outcomes = run_stage(stage_items_from_samples(samples), model,
                            ExtractionPolicy{}, mult_template(), 8);
  ASSERT_EQ(outcomes.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(outcomes[i].sample_ref, samples[i].id);
    EXPECT_TRUE(outcomes[i].correct.value_or(false));
  }
}

TEST(RunStage, ResponseFailureIsFlaggedAndExcluded) {
  std::vector<Sample> samples{
      {"a", "What is 2 times 3?", "6", std::nullopt, "t"},
      {"b", "What is 3 times 3?", "9", std::nullopt, "t"},
  };
  std::string prompt_a = build_prompt(samples[0].question, std::nullopt, mult_template());
  std::string prompt_b = build_prompt(samples[1].question, std::nullopt, mult_template());
  ScriptedModel model({{prompt_a, "The answer is 6."}, {prompt_b, "<FAIL>"}}, {});
  auto outcomes = run_stage(stage_items_from_samples(samples), model,
                            ExtractionPolicy{}, mult_template(), 1);
  ASSERT_EQ(outcomes.size(), 2u);
  EXPECT_FALSE(outcomes[0].failed);
  EXPECT_TRUE(outcomes[1].failed);

  FilterResult filtered = filter_correct(outcomes, samples);
  EXPECT_EQ(filtered.n_failed, 1);
  EXPECT_EQ(filtered.n_correct, 1);
  EXPECT_DOUBLE_EQ(filtered.accuracy, 1.0); // failures leave the denominator
}

TEST(RunStage, TransportFailureAbortsTheStage) {
  std::vector<Sample> samples{
      {"a", "What is 2 times 3?", "6", std::nullopt, "t"},
      {"b", "What is 3 times 3?", "9", std::nullopt, "t"},
  };
  ScriptedModel model({}, {}); // nothing scripted: every call is unreachable
  EXPECT_THROW(run_stage(stage_items_from_samples(samples), model,
                         ExtractionPolicy{}, mult_template(), 2),
               TransportFailure);
}

TEST(RunStage, ChangedVsOriginComputedOnNormalizedAnswers) {
  std::vector<Sample> samples{{"a", "What is 20 times 50?", "1000", std::nullopt, "t"}};
  std::vector<InterventionRecord> records{{
      "a", Treatment::T0, Strategy::Mask, "What <Mask> 20 times 50?", "1000",
      "a#r0", 0, ""}};
  // Origin answered "1,000", variant answered "1000": same after
  // normalization, so changed must be false despite different raw text.
  std::string origin_prompt = build_prompt(samples[0].question, std::nullopt, mult_template());
  std::string variant_prompt = build_prompt(records[0].question, std::nullopt, mult_template());
  ScriptedModel model({{origin_prompt, "The answer is 1,000."},
                       {variant_prompt, "The answer is 1000."}}, {});
  auto origin_outcomes = run_stage(stage_items_from_samples(samples), model,
                                   ExtractionPolicy{}, mult_template(), 1);
  auto items = stage_items_from_interventions(records, samples, origin_outcomes);
  auto outcomes = run_stage(items, model, ExtractionPolicy{}, mult_template(), 1);
  ASSERT_EQ(outcomes.size(), 1u);
  ASSERT_TRUE(outcomes[0].changed_vs_origin.has_value());
  EXPECT_FALSE(*outcomes[0].changed_vs_origin);
  EXPECT_TRUE(outcomes[0].correct.value_or(false));
}

TEST(FilterCorrect, SpecExamples) {
  std::vector<Sample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back({"s" + std::to_string(i), "q?", "1", std::nullopt, "t"});
  }
  std::vector<OutcomeRecord> outcomes;
  for (int i = 0; i < 10; ++i) {
    OutcomeRecord o;
    o.sample_ref = "s" + std::to_string(i);
    o.stage = Stage::Origin;
    o.answer = i < 7 ? "1" : "2";
    o.correct = i < 7;
    outcomes.push_back(o);
  }
  FilterResult r = filter_correct(outcomes, samples);
  EXPECT_EQ(r.n_correct, 7);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  ASSERT_EQ(r.correct.size(), 7u);
  EXPECT_EQ(r.correct.front().id, "s0");

  for (auto& o : outcomes) { o.correct = true; }
  EXPECT_DOUBLE_EQ(filter_correct(outcomes, samples).accuracy, 1.0);
}

TEST(FilterCorrect, GibberishGivesZeroAccuracy) {
  std::vector<Sample> samples;
  for (int i = 0; i < 5; ++i) {
    samples.push_back({"s" + std::to_string(i),
                       "What is " + std::to_string(20 + i) + " times 4?",
                       std::to_string((20 + i) * 4), std::nullopt, "t"});
  }
  GibberishModel model(5);
  auto outcomes = run_stage(stage_items_from_samples(samples), model,
                            ExtractionPolicy{}, mult_template(), 2);
  FilterResult r = filter_correct(outcomes, samples);
  EXPECT_EQ(r.n_correct, 0);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.0);
  EXPECT_TRUE(r.correct.empty());
}
