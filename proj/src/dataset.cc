// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/dataset.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "fewtype/error.h"

namespace fewtype {

using nlohmann::json;

namespace {

bool IsContinuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::size_t CodePointLength(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if (!IsContinuation(c)) ++n;
  }
  return n;
}

std::pair<std::size_t, std::size_t> CodePointRangeToBytes(std::string_view s,
                                                          std::size_t start,
                                                          std::size_t end) {
  std::size_t cp = 0, byte_start = std::string_view::npos, byte_end = std::string_view::npos;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && IsContinuation(static_cast<unsigned char>(s[i]))) continue;
    if (cp == start) byte_start = i;
    if (cp == end) {
      byte_end = i;
      break;
    }
    ++cp;
  }
  if (byte_start == std::string_view::npos || byte_end == std::string_view::npos ||
      start > end) {
    throw DataError(fmt::format("span [{}, {}) is outside a text of {} characters",
                                start, end, CodePointLength(s)));
  }
  return {byte_start, byte_end};
}

std::string MentionExample::mention() const {
  auto [b, e] = CodePointRangeToBytes(text, start, end);
  return text.substr(b, e - b);
}

std::string MentionExample::WithMention(std::string_view surface) const {
  auto [b, e] = CodePointRangeToBytes(text, start, end);
  std::string out = text.substr(0, b);
  out += surface;
  out += text.substr(e);
  return out;
}

std::vector<MentionExample> ParseDataset(std::istream& in,
                                         const std::string& source,
                                         const LabelHierarchy& h) {
  std::vector<MentionExample> out;
  std::map<std::string, std::size_t> by_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return DataError(fmt::format("{}:{}: {}", source, lineno, why));
    };
    MentionExample ex;
    try {
      json j = json::parse(line);
      ex.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                     : j.at("id").dump();
      ex.text = j.at("text").get<std::string>();
      ex.start = j.at("start").get<std::size_t>();
      ex.end = j.at("end").get<std::size_t>();
      ex.label = LabelPath::Parse(j.at("label").get<std::string>());
    } catch (const json::exception& e) {
      throw fail(fmt::format("malformed line: {}", e.what()));
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
    std::size_t len = CodePointLength(ex.text);
    if (!(ex.start < ex.end && ex.end <= len)) {
      throw fail(fmt::format("mention span [{}, {}) outside text of length {}",
                             ex.start, ex.end, len));
    }
    if (!h.Contains(ex.label)) {
      throw fail(fmt::format("label {} is not in the hierarchy", ex.label.str()));
    }
    auto it = by_id.find(ex.id);
    if (it != by_id.end()) {
      MentionExample& kept = out[it->second];
      spdlog::warn("{}:{}: id {} has several labels; keeping the longest path",
                   source, lineno, ex.id);
      if (ex.label.depth() > kept.label.depth()) kept = std::move(ex);
      continue;
    }
    by_id.emplace(ex.id, out.size());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<MentionExample> LoadDataset(const std::string& path,
                                        const LabelHierarchy& h) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open dataset {}", path));
  return ParseDataset(in, path, h);
}

std::vector<LabelPath> ScanLabels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open dataset {}", path));
  std::set<LabelPath> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.insert(LabelPath::Parse(json::parse(line).at("label").get<std::string>()));
    } catch (const json::exception& e) {
      throw DataError(fmt::format("{}:{}: malformed line: {}", path, lineno, e.what()));
    } catch (const ParseError& e) {
      throw DataError(fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return {labels.begin(), labels.end()};
}

void WriteDataset(const std::string& path,
                  const std::vector<MentionExample>& examples) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path));
  for (const auto& ex : examples) {
    out << json{{"id", ex.id},
                {"text", ex.text},
                {"start", ex.start},
                {"end", ex.end},
                {"label", ex.label.str()}}
               .dump()
        << '\n';
  }
}

FewShotSplit SampleFewShot(const std::vector<MentionExample>& data,
                           const LabelHierarchy& h, std::size_t shots,
                           std::uint64_t seed) {
  if (shots == 0) throw ConfigError("shots must be >= 1");
  std::vector<std::vector<const MentionExample*>> groups(h.size());
  for (const auto& ex : data) groups[h.IndexOf(ex.label)].push_back(&ex);
  std::mt19937_64 rng(seed);
  FewShotSplit split;
  for (std::size_t y = 0; y < h.size(); ++y) {
    auto& group = groups[y];
    if (group.size() < 2 * shots) {
      throw DataError(fmt::format("label {} has {} examples; {}-shot sampling "
                                  "needs {}",
                                  h.label(y).str(), group.size(), shots,
                                  2 * shots));
    }
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t i = 0; i < shots; ++i) split.train.push_back(*group[i]);
    for (std::size_t i = shots; i < 2 * shots; ++i) split.dev.push_back(*group[i]);
  }
  return split;
}

}  // namespace fewtype
