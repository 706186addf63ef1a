// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fewtype/hierarchy.h"

namespace fewtype {

// One (context, mention, label) triple. start/end are Unicode code point
// offsets into text, end exclusive.
struct MentionExample {
  std::string id;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  LabelPath label{{"unset"}};

  std::string mention() const;
  // The context with the mention span replaced by `surface`.
  std::string WithMention(std::string_view surface) const;
};

// Byte range of code points [start, end) in a UTF-8 string. Throws DataError
// when the range exceeds the string.
std::pair<std::size_t, std::size_t> CodePointRangeToBytes(std::string_view s,
                                                          std::size_t start,
                                                          std::size_t end);
std::size_t CodePointLength(std::string_view s);

// JSONL with fields id, text, start, end, label. Lines naming an id that was
// already seen are multi-label duplicates; the longest path is kept.
std::vector<MentionExample> LoadDataset(const std::string& path,
                                        const LabelHierarchy& h);
std::vector<MentionExample> ParseDataset(std::istream& in,
                                         const std::string& source,
                                         const LabelHierarchy& h);

// Every label path named in a dataset file, without hierarchy validation.
std::vector<LabelPath> ScanLabels(const std::string& path);

void WriteDataset(const std::string& path,
                  const std::vector<MentionExample>& examples);

struct FewShotSplit {
  std::vector<MentionExample> train;
  std::vector<MentionExample> dev;
};

// Exactly K train and K dev examples per hierarchy label, disjoint and
// deterministic in `seed`. Throws DataError naming the first label with fewer
// than 2K examples.
FewShotSplit SampleFewShot(const std::vector<MentionExample>& data,
                           const LabelHierarchy& h, std::size_t shots,
                           std::uint64_t seed);

}  // namespace fewtype
