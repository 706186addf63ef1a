// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/dataset.h"

#include <set>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "fewtype/error.h"
#include "support/fixtures.h"

namespace fewtype {
namespace {

using testing::Hierarchy;

std::vector<MentionExample> Parse(const std::string& jsonl, const LabelHierarchy& h) {
  std::istringstream in(jsonl);
  return ParseDataset(in, "mem.jsonl", h);
}

std::string ErrorOf(const std::string& jsonl, const LabelHierarchy& h) {
  try {
    Parse(jsonl, h);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(DatasetTest, ParsesValidLines) {
  LabelHierarchy h = Hierarchy({"/location", "/location/city", "/person"});
  auto ex = Parse(
      R"({"id":"a","text":"Kauai is beautiful","start":0,"end":5,"label":"/location"}
{"id":"b","text":"I met Ann","start":6,"end":9,"label":"/person"}

{"id":7,"text":"Rome again","start":0,"end":4,"label":"/location/city"}
)",
      h);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].mention(), "Kauai");
  EXPECT_EQ(ex[1].mention(), "Ann");
  EXPECT_EQ(ex[2].id, "7");
  EXPECT_EQ(ex[2].label.str(), "/location/city");
}

TEST(DatasetTest, OffsetsAreCodePoints) {
  LabelHierarchy h = Hierarchy({"/location/city"});
  auto ex = Parse(
      R"({"id":"z","text":"Café in Zürich today","start":8,"end":14,"label":"/location/city"})",
      h);
  EXPECT_EQ(ex[0].mention(), "Zürich");
  EXPECT_EQ(ex[0].WithMention("Bern"), "Café in Bern today");
  EXPECT_EQ(CodePointLength("Zürich"), 6u);
  EXPECT_EQ(CodePointRangeToBytes("Zürich", 1, 2), (std::pair<std::size_t, std::size_t>{1, 3}));
  EXPECT_THROW(CodePointRangeToBytes("abc", 2, 5), DataError);
}

TEST(DatasetTest, ErrorsCarryLineNumbers) {
  LabelHierarchy h = Hierarchy({"/person"});
  const std::string ok = R"({"id":"a","text":"Ann","start":0,"end":3,"label":"/person"})";
  EXPECT_NE(ErrorOf(ok + "\n" + R"({"id":"b","text":"Bo","start":0,"end":9,"label":"/person"})", h)
                .find("mem.jsonl:2:"),
            std::string::npos);
  EXPECT_NE(ErrorOf(R"({"id":"b","text":"Bo","start":1,"end":1,"label":"/person"})", h)
                .find("mem.jsonl:1:"),
            std::string::npos);
  std::string unknown =
      ErrorOf(ok + "\n\n" + R"({"id":"c","text":"Bo","start":0,"end":2,"label":"/x/y"})", h);
  EXPECT_NE(unknown.find("mem.jsonl:3:"), std::string::npos);
  EXPECT_NE(unknown.find("/x/y"), std::string::npos);
  EXPECT_NE(ErrorOf("{not json", h).find("mem.jsonl:1:"), std::string::npos);
  EXPECT_NE(ErrorOf(R"({"id":"a","text":"Ann","start":0,"end":3})", h).find(":1:"),
            std::string::npos);
  EXPECT_NE(ErrorOf(R"({"id":"a","text":"Ann","start":0,"end":3,"label":"person"})", h)
                .find(":1:"),
            std::string::npos);
}

TEST(DatasetTest, DuplicateIdsKeepLongestPath) {
  LabelHierarchy h = Hierarchy({"/person", "/person/artist"});
  auto ex = Parse(
      R"({"id":"a","text":"Goya","start":0,"end":4,"label":"/person"}
{"id":"a","text":"Goya","start":0,"end":4,"label":"/person/artist"}
{"id":"a","text":"Goya","start":0,"end":4,"label":"/person"})",
      h);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].label.str(), "/person/artist");
}

TEST(DatasetTest, WriteLoadRoundTrip) {
  LabelHierarchy h = Hierarchy({"/person"});
  testing::TempDir dir;
  std::vector<MentionExample> ex(2);
  ex[0] = {"a", "Ann and Bo", 0, 3, LabelPath::Parse("/person")};
  ex[1] = {"b", "Ann and Bö", 8, 10, LabelPath::Parse("/person")};
  WriteDataset(dir.file("d.jsonl"), ex);
  auto back = LoadDataset(dir.file("d.jsonl"), h);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].mention(), "Bö");
  EXPECT_EQ(ScanLabels(dir.file("d.jsonl")), std::vector<LabelPath>{LabelPath::Parse("/person")});
  EXPECT_THROW(LoadDataset(dir.file("missing.jsonl"), h), DataError);
}

std::vector<MentionExample> Synthetic(const LabelHierarchy& h, std::size_t per_label) {
  std::vector<MentionExample> out;
  for (std::size_t y = 0; y < h.size(); ++y) {
    for (std::size_t i = 0; i < per_label; ++i) {
      out.push_back({fmt::format("{}-{}", y, i), "m", 0, 1, h.label(y)});
    }
  }
  return out;
}

TEST(SampleFewShotTest, KPerLabelDisjoint) {
  std::vector<std::string> paths;
  for (int i = 0; i < 21; ++i) paths.push_back(fmt::format("/t{:02}", i));
  LabelHierarchy h = Hierarchy(paths);
  auto data = Synthetic(h, 12);
  FewShotSplit s = SampleFewShot(data, h, 5, 42);
  EXPECT_EQ(s.train.size(), 105u);
  EXPECT_EQ(s.dev.size(), 105u);
  std::set<std::string> train_ids, dev_ids;
  std::map<std::string, int> per_label;
  for (const auto& e : s.train) {
    train_ids.insert(e.id);
    ++per_label[e.label.str()];
  }
  for (const auto& e : s.dev) dev_ids.insert(e.id);
  EXPECT_EQ(train_ids.size(), 105u);
  for (const auto& id : dev_ids) EXPECT_FALSE(train_ids.contains(id));
  for (const auto& [label, n] : per_label) EXPECT_EQ(n, 5) << label;
}

TEST(SampleFewShotTest, DeterministicInSeed) {
  LabelHierarchy h = Hierarchy({"/a", "/b", "/b/c"});
  auto data = Synthetic(h, 20);
  auto ids = [](const std::vector<MentionExample>& v) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.id);
    return out;
  };
  FewShotSplit a = SampleFewShot(data, h, 4, 9), b = SampleFewShot(data, h, 4, 9);
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.dev), ids(b.dev));
  FewShotSplit c = SampleFewShot(data, h, 4, 10);
  EXPECT_NE(ids(a.train), ids(c.train));
}

TEST(SampleFewShotTest, TooFewExamplesNamesTheLabel) {
  LabelHierarchy h = Hierarchy({"/a", "/b"});
  auto data = Synthetic(h, 10);
  data.pop_back();  // /b now has 9
  try {
    SampleFewShot(data, h, 5, 1);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/b"), std::string::npos);
  }
  EXPECT_THROW(SampleFewShot(data, h, 0, 1), ConfigError);
}

}  // namespace
}  // namespace fewtype
