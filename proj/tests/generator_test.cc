// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/generator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fewtype/error.h"
#include "support/fixtures.h"

namespace fewtype {
namespace {

using testing::SmallOracle;

RenderedPrompt Masks(std::string text, std::size_t k) {
  RenderedPrompt p{std::move(text), {}};
  for (std::size_t i = 0; i < k; ++i) p.mask_positions.push_back(i);
  return p;
}

MentionExample Ex(std::string id, std::string text, std::size_t start, std::size_t end) {
  return {std::move(id), std::move(text), start, end, LabelPath::Parse("/x")};
}

TEST(ArgmaxOrdinaryTest, TiesAndSpecials) {
  Vocab v = testing::SmallVocab({"a", "b", "c"});
  EXPECT_EQ(ArgmaxOrdinary({{0, 0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3}}, v), 3);
  EXPECT_EQ(ArgmaxOrdinary({{0.9, 0, 0, 0.02, 0.05, 0.03}}, v), 4);
  EXPECT_EQ(ArgmaxOrdinary({{0.5, 0, 0.5, 0, 0, 0}}, v), -1);
}

TEST(PredictTypeWordTest, PeakedOnUniversity) {
  SyntheticOracle o = SmallOracle({"Buffalo", "university", "city", "team"});
  TemplateSpec spec;
  MentionExample ex = Ex("b", "He studied at Buffalo", 14, 21);
  o.AddTopEntry(RenderTyping(spec, ex.text, "Buffalo").text, 0, {},
                {{4, 0.7}, {5, 0.2}});
  Matrix u = Matrix::Zero(2, 7);
  u(0, 4) = 1.0;
  TypeWordPrediction tw = PredictTypeWord(o, u, spec, ex);
  EXPECT_EQ(o.vocab().token(tw.type_word), "university");
  EXPECT_NEAR(tw.label_distribution.sum(), 1.0, 1e-12);
  EXPECT_GT(tw.label_distribution(0), tw.label_distribution(1));
}

TEST(PredictTypeWordTest, UniformGivesLowestOrdinaryId) {
  SyntheticOracle o = SmallOracle({"a", "b", "c"});
  TypeWordPrediction tw =
      PredictTypeWord(o, Matrix::Zero(1, 6), TemplateSpec{}, Ex("u", "a b", 0, 1));
  EXPECT_EQ(tw.type_word, 3);
}

TEST(FillMasksTest, SingleStepIsExhaustive) {
  std::mt19937_64 rng(41);
  RenderedPrompt p = Masks("x [MASK]", 1);
  SyntheticOracle o = testing::RandomFillOracle(rng, 6, p, 1, 0.0);
  auto got = FillMasks(o, p, 1, o.vocab().size());
  auto want = testing::EnumerateFills(o, p, 1);
  ASSERT_EQ(got.size(), want.size());
  EXPECT_EQ(got.size(), 6u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].token_ids, want[i].ids);
    EXPECT_DOUBLE_EQ(got[i].score, want[i].score);
  }
}

TEST(FillMasksTest, TwoMasksFullBeamMatchesEnumeration) {
  std::mt19937_64 rng(42);
  RenderedPrompt p = Masks("x [MASK] [MASK]", 2);
  SyntheticOracle o = testing::RandomFillOracle(rng, 6, p, 2, 0.0);
  auto got = FillMasks(o, p, 2, 36);
  auto want = testing::EnumerateFills(o, p, 2);
  ASSERT_EQ(want.size(), 36u);
  ASSERT_EQ(got.size(), 36u);
  for (std::size_t i = 0; i < 36; ++i) {
    EXPECT_EQ(got[i].token_ids, want[i].ids) << i;
    EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
  }
}

TEST(FillMasksTest, GreedyFollowsTheTable) {
  // Step 1 prefers "new" (0.6) over "los" (0.4); given "new", "york" wins;
  // given "los", "angeles" has 0.99. Greedy commits to "new york" even though
  // "los angeles" scores higher overall.
  SyntheticOracle o = SmallOracle({"new", "los", "york", "angeles"});
  RenderedPrompt p = Masks("[MASK] [MASK] is a city.", 2);
  o.AddEntry(p.text, 0, {}, {{0, 0, 0, 0.6, 0.4, 0, 0}});
  o.AddEntry(p.text, 1, {{0, 3}}, {{0, 0, 0, 0, 0, 0.5, 0.5}});
  o.AddEntry(p.text, 1, {{0, 4}}, {{0, 0, 0, 0, 0, 0.01, 0.99}});
  auto greedy = FillMasks(o, p, 2, 1);
  ASSERT_EQ(greedy.size(), 1u);
  EXPECT_EQ(greedy[0].token_ids, (std::vector<TokenId>{3, 5}));
  EXPECT_NEAR(greedy[0].score, std::log(0.6) + std::log(0.5), 1e-15);
  auto wide = FillMasks(o, p, 2, 4);
  EXPECT_EQ(o.vocab().Detokenize(wide[0].token_ids), "los angeles");
}

TEST(FillMasksTest, CandidateInvariants) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    RenderedPrompt p = Masks("y [MASK] [MASK] [MASK]", 3);
    SyntheticOracle o = testing::RandomFillOracle(rng, 5, p, 3);
    std::map<std::vector<TokenId>, double> all;
    for (const auto& e : testing::EnumerateFills(o, p, 3)) all[e.ids] = e.score;
    for (std::size_t B = 1; B <= 8; ++B) {
      auto got = FillMasks(o, p, 3, B);
      EXPECT_LE(got.size(), B);
      for (std::size_t i = 0; i < got.size(); ++i) {
        const auto& c = got[i];
        EXPECT_EQ(c.mask_count(), 3u);
        EXPECT_EQ(c.step_probs.size(), 3u);
        double sum = 0.0;
        for (double s : c.step_probs) {
          EXPECT_GT(s, 0.0);
          EXPECT_LE(s, 1.0);
          sum += std::log(s);
        }
        EXPECT_NEAR(c.score, sum, 1e-9);
        EXPECT_LE(c.score, 0.0);
        for (TokenId t : c.token_ids) EXPECT_FALSE(o.vocab().is_special(t));
        if (i > 0) EXPECT_GE(got[i - 1].score, c.score);
        auto it = all.find(c.token_ids);
        ASSERT_NE(it, all.end());
        EXPECT_NEAR(c.score, it->second, 1e-12);
      }
    }
  }
}

TEST(FillMasksTest, ZeroProbabilitiesNeverExtend) {
  SyntheticOracle o = SmallOracle({"a", "b", "c"});
  RenderedPrompt p = Masks("[MASK]", 1);
  o.AddEntry(p.text, 0, {}, {{0.5, 0, 0, 0.5, 0, 0}});
  auto got = FillMasks(o, p, 1, 10);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].token_ids, std::vector<TokenId>{3});
  EXPECT_DOUBLE_EQ(got[0].step_probs[0], 1.0);  // [PAD] mass renormalized away
}

TEST(FillMasksTest, Errors) {
  SyntheticOracle o = SmallOracle({"a"});
  EXPECT_THROW(FillMasks(o, Masks("[MASK]", 1), 0, 3), ContractError);
  EXPECT_THROW(FillMasks(o, Masks("[MASK]", 1), 1, 0), ContractError);
  EXPECT_THROW(FillMasks(o, Masks("[MASK]", 1), 2, 3), ContractError);
}

// Oracle for "Xinhua reported it" with type word "agency".
struct NewsOracle {
  SyntheticOracle o = SmallOracle({"Xinhua", "agency", "Reuters", "AP", "China",
                                   "Daily", "Xin", "##hua", "reuters", "The"});
  TemplateSpec spec;
  MentionExample ex = Ex("n1", "Xinhua reported it", 0, 6);

  NewsOracle() {
    // ids: Xinhua 3, agency 4, Reuters 5, AP 6, ..., reuters 11
    o.AddTopEntry(RenderGeneration(spec, ex.text, "Xinhua", "agency", 1).text, 0, {},
                  {{5, 0.5}, {11, 0.2}, {6, 0.1}, {3, 0.15}});
  }
};

TEST(GenerateInstancesTest, OneAndTwoTokenWinners) {
  NewsOracle n;
  MentionExample ex = n.ex;
  GenerationOptions opts;
  opts.instances = 2;
  opts.beam_width = 10;
  auto single = GenerateInstances(n.o, n.spec, ex, 4, opts);
  // "Xinhua" is one token: only k = 1.
  ASSERT_EQ(single.size(), 2u);
  for (const auto& g : single) EXPECT_EQ(g.mask_count, 1u);
  EXPECT_EQ(single[0].surface, "Reuters");
  EXPECT_EQ(single[1].surface, "AP");  // "reuters" duplicates, "Xinhua" is the source
}

TEST(GenerateInstancesTest, MultiTokenMentionPoolsAcrossK) {
  NewsOracle n;
  SyntheticOracle o = SmallOracle({"Xin", "hua", "agency", "Reuters", "AP", "China",
                                   "Daily", "The", "reuters"});
  // ids: Xin 3, hua 4, agency 5, Reuters 6, AP 7, China 8, Daily 9, The 10,
  // reuters 11
  MentionExample ex = Ex("n2", "Xin hua reported it", 0, 7);
  const std::string one = RenderGeneration(n.spec, ex.text, "Xin hua", "agency", 1).text;
  const std::string two = RenderGeneration(n.spec, ex.text, "Xin hua", "agency", 2).text;
  o.AddTopEntry(one, 0, {}, {{6, 0.5}, {11, 0.3}, {7, 0.1}});
  o.AddTopEntry(two, 0, {}, {{8, 0.8}, {10, 0.1}});
  o.AddTopEntry(two, 1, {{0, 8}}, {{9, 0.9}});
  o.AddTopEntry(two, 1, {{0, 10}}, {{6, 0.9}});
  GenerationOptions opts;
  opts.instances = 2;
  auto got = GenerateInstances(o, n.spec, ex, 5, opts);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].surface, "China Daily");  // log .8 + log .9 = -0.33
  EXPECT_EQ(got[0].mask_count, 2u);
  EXPECT_EQ(got[1].surface, "Reuters");      // log .5 = -0.69
  EXPECT_EQ(got[1].type_word_text, "agency");
  EXPECT_EQ(got[1].source_id, "n2");

  // Brute-force ranking of the pooled candidates agrees on the top two.
  std::vector<std::pair<double, std::string>> pool;
  for (std::size_t k = 1; k <= 2; ++k) {
    RenderedPrompt p = RenderGeneration(n.spec, ex.text, "Xin hua", "agency", k);
    for (const auto& e : testing::EnumerateFills(o, p, k)) {
      pool.emplace_back(-e.score, o.vocab().Detokenize(e.ids));
    }
  }
  std::sort(pool.begin(), pool.end());
  EXPECT_EQ(pool[0].second, "China Daily");
  EXPECT_EQ(pool[1].second, "Reuters");

  // "The Reuters" (k=2) and "reuters" (k=1) never take a slot from each other
  // by case; a larger M shows the dedup.
  opts.instances = 10;
  auto all = GenerateInstances(o, n.spec, ex, 5, opts);
  std::set<std::string> keys;
  for (const auto& g : all) EXPECT_TRUE(keys.insert(LowerAscii(g.surface)).second);
  EXPECT_TRUE(keys.contains("reuters"));
  EXPECT_EQ(std::count_if(all.begin(), all.end(),
                          [](const auto& g) { return LowerAscii(g.surface) == "reuters"; }),
            1);
}

TEST(GenerateInstancesTest, ExcludesSourceAndTrainingMentions) {
  NewsOracle n;
  GenerationOptions opts;
  opts.instances = 5;
  opts.excluded_surfaces = {"REUTERS"};
  auto got = GenerateInstances(n.o, n.spec, n.ex, 4, opts);
  for (const auto& g : got) {
    EXPECT_NE(LowerAscii(g.surface), "reuters");
    EXPECT_NE(LowerAscii(g.surface), "xinhua");
  }
  EXPECT_EQ(got.front().surface, "AP");
}

TEST(GenerateInstancesTest, FewerSurvivorsThanM) {
  SyntheticOracle o = SmallOracle({"Acme", "firm", "Globex"});
  MentionExample ex = Ex("c", "Acme grew", 0, 4);
  TemplateSpec spec;
  o.AddEntry(RenderGeneration(spec, ex.text, "Acme", "firm", 1).text, 0, {},
             {{0, 0, 0, 0.5, 0, 0.5}});
  GenerationOptions opts;
  opts.instances = 5;
  auto got = GenerateInstances(o, spec, ex, 4, opts);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].surface, "Globex");
}

}  // namespace
}  // namespace fewtype
