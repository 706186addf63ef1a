// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fewtype {

// A "/"-separated type label such as /organization/company. Segments are
// stored lowercase; ordering is the lexicographic order of the serialized
// form.
class LabelPath {
 public:
  // Throws ParseError if `s` does not start with "/" or has an empty segment.
  static LabelPath Parse(std::string_view s);

  explicit LabelPath(std::vector<std::string> segments);

  const std::vector<std::string>& segments() const { return segments_; }
  std::size_t depth() const { return segments_.size(); }
  const std::string& leaf() const { return segments_.back(); }
  const std::string& str() const { return serialized_; }

  // The path with the last segment removed; nullopt for single-segment paths.
  std::optional<LabelPath> Prefix() const;

  bool operator==(const LabelPath& other) const {
    return serialized_ == other.serialized_;
  }
  std::strong_ordering operator<=>(const LabelPath& other) const {
    return serialized_ <=> other.serialized_;
  }

 private:
  std::vector<std::string> segments_;
  std::string serialized_;
};

// Extra surface names per label, keyed by serialized path.
using ExtraNames = std::map<std::string, std::vector<std::string>>;

// Rooted forest of type labels. Labels are indexed 0..size()-1 in sorted path
// order; that index is also the row of the label in the correlation matrix.
// Immutable after construction.
class LabelHierarchy {
 public:
  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

  // Throws ContractError on an empty input and DataError on duplicates.
  static LabelHierarchy Build(const std::vector<LabelPath>& paths,
                              const ExtraNames& extra_names = {});

  std::size_t size() const { return labels_.size(); }
  const std::vector<LabelPath>& labels() const { return labels_; }
  const LabelPath& label(std::size_t index) const { return labels_.at(index); }

  bool Contains(const LabelPath& l) const;
  // Throws DataError for labels outside the hierarchy.
  std::size_t IndexOf(const LabelPath& l) const;

  std::size_t parent(std::size_t index) const { return parent_.at(index); }
  bool is_root(std::size_t index) const { return parent(index) == kNoParent; }
  const std::vector<std::size_t>& children(std::size_t index) const {
    return children_.at(index);
  }
  std::vector<std::size_t> siblings(std::size_t index) const;
  const std::vector<std::string>& names(std::size_t index) const {
    return names_.at(index);
  }

  // Unordered sibling pairs (i < j), each listed once.
  std::vector<std::pair<std::size_t, std::size_t>> SiblingPairs() const;

  // {l} plus every transitive parent inside the hierarchy.
  std::set<LabelPath> AncestorClosure(const LabelPath& l) const;
  std::vector<std::size_t> AncestorClosure(std::size_t index) const;

 private:
  std::vector<LabelPath> labels_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> roots_;
  std::vector<std::vector<std::string>> names_;
};

// Splits a segment such as "sports_team" on non-alphanumerics.
std::vector<std::string> DefaultNames(std::string_view segment);

// Reads the optional hierarchy file: a JSON object mapping label paths to
// arrays of extra names. Keys are canonicalized through LabelPath::Parse.
ExtraNames LoadExtraNames(const std::string& path);

}  // namespace fewtype
