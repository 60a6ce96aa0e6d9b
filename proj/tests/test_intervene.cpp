#include "structeval/intervene.hpp"

#include <gtest/gtest.h>

#include <set>
#include <unordered_map>

#include "structeval/mock_models.hpp"
#include "structeval/rng.hpp"
#include "structeval/text.hpp"

using namespace structeval;

namespace {

Sample mult_sample() {
  return {"q1", "What is 50 times 20?", "1000", std::nullopt, "2digit-mult"};
}

MaskTaskConfig mult_cfg() {
  MaskTaskConfig cfg;
  cfg.core_word_pool = {"times"};
  cfg.all_digit_tokens = true;
  cfg.k = 1;
  return cfg;
}

} // namespace

TEST(Tokenizer, SplitsWordsAndTrailingPunctuation) {
  auto tokens = tokenize_words("What is 50 times 20?");
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"What", "is", "50", "times", "20", "?"}));
}

TEST(Tokenizer, EmptyInput) { EXPECT_TRUE(tokenize_words("").empty()); }

TEST(Tokenizer, TrailingWhitespaceExcludedFromSpan) {
  auto tokens = tokenize_words("ofr ");
  ASSERT_EQ(tokens.size(), 1u);
  EXPECT_EQ(tokens[0].text, "ofr");
  EXPECT_EQ(tokens[0].begin, 0u);
  EXPECT_EQ(tokens[0].end, 3u);
}

TEST(Tokenizer, MaskAndStarStayAtomic) {
  auto tokens = tokenize_words("What is <Mask> times * 20?");
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"What", "is", "<Mask>", "times", "*",
                                             "20", "?"}));
}

TEST(Tokenizer, SpansSliceTheInputExactly) {
  Rng rng(99);
  const std::string alphabet = "ab5,.?! \t<>*'";
  for (int trial = 0; trial < 300; ++trial) {
    std::string input;
    const size_t len = rng.next_below(40);
    for (size_t i = 0; i < len; ++i) input += alphabet[rng.next_below(alphabet.size())];
    auto tokens = tokenize_words(input);
    size_t prev_end = 0;
    for (const auto& t : tokens) {
      ASSERT_LE(prev_end, t.begin) << input;
      ASSERT_LT(t.begin, t.end) << input;
      ASSERT_LE(t.end, input.size()) << input;
      ASSERT_EQ(input.substr(t.begin, t.end - t.begin), t.text) << input;
      // Gaps between tokens hold nothing but whitespace.
      for (size_t p = prev_end; p < t.begin; ++p) {
        ASSERT_TRUE(std::isspace(static_cast<unsigned char>(input[p]))) << input;
      }
      prev_end = t.end;
    }
  }
}

TEST(MaskStrategy, ReproducesCanonicalStrings) {
  Sample s = mult_sample();
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = mask_core(s, cfg, 0, 0);
  EXPECT_EQ(t1.question, "What is <Mask> times 20?");
  EXPECT_EQ(t1.expected_answer, "None");
  EXPECT_EQ(t1.treatment, Treatment::T1);

  InterventionRecord t0 = mask_surface(s, t1, cfg);
  EXPECT_EQ(t0.question, "What <Mask> 50 times 20?");
  EXPECT_EQ(t0.expected_answer, "1000");
  EXPECT_EQ(t0.treatment, Treatment::T0);
  EXPECT_EQ(t0.pair_id, t1.pair_id);
}

TEST(MaskStrategy, PositionalCoreForWordUnscrambling) {
  Sample s{"w1", "The word ofr is a scrambled version of the English word", "for",
           std::nullopt, "word-unscramble"};
  MaskTaskConfig cfg;
  cfg.positional_core = 2;
  InterventionRecord t1 = mask_core(s, cfg, 0, 0);
  EXPECT_EQ(t1.question,
            "The word <Mask> is a scrambled version of the English word");
  // k=1 surface mask takes the nearest non-core token ("word", index 1).
  InterventionRecord t0 = mask_surface(s, t1, cfg);
  EXPECT_EQ(t0.question,
            "The <Mask> ofr is a scrambled version of the English word");
}

TEST(MaskStrategy, NoCoreTokenError) {
  Sample s{"q", "No numbers here at all?", "x", std::nullopt, "t"};
  try {
    mask_core(s, mult_cfg(), 0, 0);
    FAIL() << "expected NoCoreToken";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCoreToken);
  }
}

TEST(MaskStrategy, AllCoreTokensMeansNoSurfaceToken) {
  Sample s{"q", "50 times 20", "1000", std::nullopt, "t"};
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = mask_core(s, cfg, 0, 0);
  try {
    mask_surface(s, t1, cfg);
    FAIL() << "expected NoSurfaceToken";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSurfaceToken);
  }
}

TEST(MaskStrategy, SurfaceTieBreaksLeft) {
  // Masking "times" (index 3): "is" (index 1) and "?" (index 5) are both at
  // distance 2; the earlier one wins.
  Sample s = mult_sample();
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = mask_core(s, cfg, 1, 1); // rep 1 -> "times"
  EXPECT_EQ(t1.question, "What is 50 <Mask> 20?");
  InterventionRecord t0 = mask_surface(s, t1, cfg);
  EXPECT_EQ(t0.question, "What <Mask> 50 times 20?");
}

TEST(MaskStrategy, KRankSelectsFartherToken) {
  Sample s = mult_sample();
  MaskTaskConfig cfg = mult_cfg();
  cfg.k = 2;
  InterventionRecord t1 = mask_core(s, cfg, 0, 0); // masks "50" at index 2
  InterventionRecord t0 = mask_surface(s, t1, cfg);
  // distances from index 2: is=1, What=2, ?=3 -> rank 2 is "What".
  EXPECT_EQ(t0.question, "<Mask> is 50 times 20?");
}

TEST(MaskStrategy, CaseInsensitivePunctuationStrippedPoolMatch) {
  Sample s{"q", "Compute 3 Times, 4 now.", "12", std::nullopt, "t"};
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = mask_core(s, cfg, 1, 1); // cores: 3, Times, 4
  EXPECT_EQ(t1.question, "Compute 3 <Mask>, 4 now.");
  EXPECT_NE(t1.provenance.find("'Times'"), std::string::npos);
}

TEST(ReplaceStrategy, ReproducesCanonicalStrings) {
  Sample s = mult_sample();
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = replace_core(s, cfg, 0, 0);
  EXPECT_EQ(t1.question, "What is * times 20?");
  EXPECT_EQ(t1.expected_answer, "None");
  InterventionRecord t0 = replace_surface(s, t1, cfg);
  EXPECT_EQ(t0.question, "What * 50 times 20?");
  EXPECT_EQ(t0.expected_answer, "1000");
}

TEST(SwapStrategy, ReproducesCanonicalStrings) {
  Sample s = mult_sample();
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = swap_core(s, cfg, 0, 0);
  EXPECT_EQ(t1.question, "50 is What times 20?");
  EXPECT_EQ(t1.expected_answer, "None");
  InterventionRecord t0 = swap_surface(s, cfg, t1);
  EXPECT_EQ(t0.question, "is What 50 times 20?");
  EXPECT_EQ(t0.expected_answer, "1000");
}

TEST(SwapStrategy, SingleTokenQuestionFails) {
  Sample s{"q", "50", "50", std::nullopt, "t"};
  try {
    swap_core(s, mult_cfg(), 0, 0);
    FAIL() << "expected NotEnoughTokens";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotEnoughTokens);
  }
}

TEST(SwapStrategy, NoAdjacentSurfacePairFails) {
  Sample s{"q", "What 50 times 20 now", "x", std::nullopt, "t"};
  MaskTaskConfig cfg = mult_cfg();
  InterventionRecord t1 = swap_core(s, cfg, 0, 0);
  try {
    swap_surface(s, cfg, t1);
    FAIL() << "expected NoSurfaceToken";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSurfaceToken);
  }
}

namespace {

TaskConfig mask_task() {
  TaskConfig task;
  task.strategy = Strategy::Mask;
  task.mask = mult_cfg();
  return task;
}

std::vector<Sample> toy_mult_samples(int n) {
  std::vector<Sample> out;
  Rng rng(5150);
  for (int i = 0; i < n; ++i) {
    long a = 10 + static_cast<long>(rng.next_below(90));
    long b = 10 + static_cast<long>(rng.next_below(90));
    out.push_back({"s" + std::to_string(i),
                   "What is " + std::to_string(a) + " times " + std::to_string(b) + "?",
                   std::to_string(a * b), std::nullopt, "2digit-mult"});
  }
  return out;
}

} // namespace

TEST(GenerateSets, RepsProducePairedBalancedArms) {
  auto samples = toy_mult_samples(10);
  InterventionSets sets =
      generate_intervention_sets(samples, Strategy::Mask, mask_task(), 2, nullptr);
  EXPECT_EQ(sets.t1.size(), 20u);
  EXPECT_EQ(sets.t0.size(), 20u);
  EXPECT_TRUE(sets.skipped.empty());

  std::multiset<std::pair<std::string, int>> k1, k0;
  for (const auto& r : sets.t1) k1.insert({r.origin_id, r.rep_index});
  for (const auto& r : sets.t0) k0.insert({r.origin_id, r.rep_index});
  EXPECT_EQ(k1, k0);
}

TEST(GenerateSets, SingleRepSingleSample) {
  auto samples = toy_mult_samples(1);
  InterventionSets sets =
      generate_intervention_sets(samples, Strategy::Mask, mask_task(), 1, nullptr);
  EXPECT_EQ(sets.t1.size(), 1u);
  EXPECT_EQ(sets.t0.size(), 1u);
}

TEST(GenerateSets, EmptyInputIsAnError) {
  EXPECT_THROW(
      generate_intervention_sets({}, Strategy::Mask, mask_task(), 1, nullptr),
      Error);
}

TEST(GenerateSets, AllSkippedIsAnError) {
  std::vector<Sample> samples{{"a", "no digits here", "x", std::nullopt, "t"}};
  try {
    generate_intervention_sets(samples, Strategy::Mask, mask_task(), 1, nullptr);
    FAIL() << "expected all-samples-skipped error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undefined);
  }
}

TEST(GenerateSets, SkipsFailingSamplesAndKeepsGoing) {
  auto samples = toy_mult_samples(3);
  samples.push_back({"bad", "no digits here", "x", std::nullopt, "t"});
  InterventionSets sets =
      generate_intervention_sets(samples, Strategy::Mask, mask_task(), 1, nullptr);
  EXPECT_EQ(sets.t1.size(), 3u);
  ASSERT_EQ(sets.skipped.size(), 1u);
  EXPECT_EQ(sets.skipped[0].id, "bad");
}

TEST(GenerateSets, MaskReplaceConservationAndSeparation) {
  auto samples = toy_mult_samples(30);
  MaskTaskConfig cfg = mult_cfg();
  for (Strategy strategy : {Strategy::Mask, Strategy::Replace}) {
    TaskConfig task = mask_task();
    task.strategy = strategy;
    InterventionSets sets =
        generate_intervention_sets(samples, strategy, task, 2, nullptr);
    const char* literal =
        strategy == Strategy::Mask ? kMaskLiteral : kReplaceLiteral;
    std::unordered_map<std::string, const Sample*> by_id;
    for (const auto& s : samples) by_id[s.id] = &s;

    auto check_one = [&](const InterventionRecord& r, bool expect_core) {
      const Sample& origin = *by_id.at(r.origin_id);
      auto origin_tokens = tokenize_words(origin.question);
      auto variant_tokens = tokenize_words(r.question);
      ASSERT_EQ(origin_tokens.size(), variant_tokens.size()) << r.question;
      int diffs = 0;
      for (size_t i = 0; i < origin_tokens.size(); ++i) {
        if (origin_tokens[i].text != variant_tokens[i].text) {
          ++diffs;
          EXPECT_EQ(variant_tokens[i].text, literal);
          EXPECT_EQ(is_core_token(origin_tokens, i, cfg), expect_core) << r.question;
        }
      }
      EXPECT_EQ(diffs, 1) << r.question;
    };
    for (const auto& r : sets.t1) check_one(r, true);
    for (const auto& r : sets.t0) check_one(r, false);

    // T1 and T0 differ from each other in exactly two token positions.
    std::unordered_map<std::string, const InterventionRecord*> t1_by_pair;
    for (const auto& r : sets.t1) t1_by_pair[r.pair_id] = &r;
    for (const auto& r0 : sets.t0) {
      const InterventionRecord& r1 = *t1_by_pair.at(r0.pair_id);
      auto a = tokenize_words(r1.question);
      auto b = tokenize_words(r0.question);
      ASSERT_EQ(a.size(), b.size());
      int diffs = 0;
      for (size_t i = 0; i < a.size(); ++i) diffs += a[i].text != b[i].text;
      EXPECT_EQ(diffs, 2) << r1.question << " vs " << r0.question;
    }
  }
}

TEST(GenerateSets, DeterministicAcrossRuns) {
  auto samples = toy_mult_samples(12);
  TaskConfig task = mask_task();
  InterventionSets a =
      generate_intervention_sets(samples, Strategy::Mask, task, 2, nullptr);
  InterventionSets b =
      generate_intervention_sets(samples, Strategy::Mask, task, 2, nullptr);
  EXPECT_EQ(a.t1, b.t1);
  EXPECT_EQ(a.t0, b.t0);
}

TEST(GenerateSets, RepRotatesOverCoreTokens) {
  auto samples = toy_mult_samples(1);
  InterventionSets sets =
      generate_intervention_sets(samples, Strategy::Mask, mask_task(), 4, nullptr);
  ASSERT_EQ(sets.t1.size(), 4u);
  // 3 core tokens -> rep 3 masks the same token as rep 0.
  auto masked_token = [](const InterventionRecord& r) {
    auto pos = r.provenance.find('\'');
    auto end = r.provenance.find('\'', pos + 1);
    return r.provenance.substr(pos + 1, end - pos - 1);
  };
  EXPECT_NE(masked_token(sets.t1[0]), masked_token(sets.t1[1]));
  EXPECT_NE(masked_token(sets.t1[1]), masked_token(sets.t1[2]));
  EXPECT_EQ(masked_token(sets.t1[0]), masked_token(sets.t1[3]));
}
