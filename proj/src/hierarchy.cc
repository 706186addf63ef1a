// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/hierarchy.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>
#include "json.hpp"

#include "fewtype/error.h"

namespace fewtype {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string Join(const std::vector<std::string>& segments) {
  std::string out;
  for (const auto& s : segments) {
    out += '/';
    out += s;
  }
  return out;
}

}  // namespace

LabelPath LabelPath::Parse(std::string_view s) {
  if (s.empty() || s.front() != '/') {
    throw ParseError(fmt::format("label path '{}' must start with '/'", s));
  }
  std::vector<std::string> segments;
  std::size_t pos = 1;
  while (true) {
    std::size_t next = s.find('/', pos);
    std::string_view seg = s.substr(pos, next == std::string_view::npos
                                             ? std::string_view::npos
                                             : next - pos);
    if (seg.empty()) {
      throw ParseError(fmt::format("label path '{}' has an empty segment at "
                                   "position {}",
                                   s, segments.size() + 1));
    }
    segments.push_back(Lower(seg));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return LabelPath(std::move(segments));
}

LabelPath::LabelPath(std::vector<std::string> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw ParseError("label path has no segments");
  for (const auto& seg : segments_) {
    if (seg.empty()) throw ParseError("label path has an empty segment");
  }
  serialized_ = Join(segments_);
}

std::optional<LabelPath> LabelPath::Prefix() const {
  if (segments_.size() < 2) return std::nullopt;
  return LabelPath(
      std::vector<std::string>(segments_.begin(), segments_.end() - 1));
}

std::vector<std::string> DefaultNames(std::string_view segment) {
  std::vector<std::string> names;
  std::string cur;
  for (char c : segment) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      names.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) names.push_back(std::move(cur));
  return names;
}

LabelHierarchy LabelHierarchy::Build(const std::vector<LabelPath>& paths,
                                     const ExtraNames& extra_names) {
  if (paths.empty()) throw ContractError("cannot build an empty hierarchy");
  LabelHierarchy h;
  h.labels_ = paths;
  std::sort(h.labels_.begin(), h.labels_.end());
  auto dup = std::adjacent_find(h.labels_.begin(), h.labels_.end());
  if (dup != h.labels_.end()) {
    throw DataError(fmt::format("duplicate label path {}", dup->str()));
  }
  const std::size_t n = h.labels_.size();
  for (std::size_t i = 0; i < n; ++i) h.index_[h.labels_[i].str()] = i;

  h.parent_.assign(n, kNoParent);
  h.children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    auto prefix = h.labels_[i].Prefix();
    if (prefix) {
      auto it = h.index_.find(prefix->str());
      if (it != h.index_.end()) {
        h.parent_[i] = it->second;
        h.children_[it->second].push_back(i);
        continue;
      }
    }
    h.roots_.push_back(i);
  }

  h.names_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> names = DefaultNames(h.labels_[i].leaf());
    auto extra = extra_names.find(h.labels_[i].str());
    if (extra != extra_names.end()) {
      for (const auto& raw : extra->second) {
        const std::string name = Lower(raw);
        if (name.empty()) continue;
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          names.push_back(name);
        }
      }
    }
    if (names.empty()) names.push_back(h.labels_[i].leaf());
    h.names_[i] = std::move(names);
  }
  for (const auto& [key, _] : extra_names) {
    if (!h.index_.contains(key)) {
      throw DataError(fmt::format("extra names given for unknown label {}", key));
    }
  }
  return h;
}

bool LabelHierarchy::Contains(const LabelPath& l) const {
  return index_.contains(l.str());
}

std::size_t LabelHierarchy::IndexOf(const LabelPath& l) const {
  auto it = index_.find(l.str());
  if (it == index_.end()) {
    throw DataError(fmt::format("unknown label {}", l.str()));
  }
  return it->second;
}

std::vector<std::size_t> LabelHierarchy::siblings(std::size_t index) const {
  const auto& group = is_root(index) ? roots_ : children_.at(parent(index));
  std::vector<std::size_t> out;
  for (std::size_t s : group) {
    if (s != index) out.push_back(s);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> LabelHierarchy::SiblingPairs()
    const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto add_group = [&pairs](const std::vector<std::size_t>& group) {
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        pairs.emplace_back(std::min(group[a], group[b]),
                           std::max(group[a], group[b]));
      }
    }
  };
  add_group(roots_);
  for (const auto& group : children_) add_group(group);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::size_t> LabelHierarchy::AncestorClosure(
    std::size_t index) const {
  std::vector<std::size_t> out;
  for (std::size_t cur = index; cur != kNoParent; cur = parent_.at(cur)) {
    out.push_back(cur);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<LabelPath> LabelHierarchy::AncestorClosure(const LabelPath& l) const {
  std::set<LabelPath> out;
  for (std::size_t i : AncestorClosure(IndexOf(l))) out.insert(labels_[i]);
  return out;
}

ExtraNames LoadExtraNames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open hierarchy file {}", path));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(fmt::format("hierarchy file {}: {}", path, e.what()));
  }
  if (!doc.is_object()) {
    throw DataError(fmt::format("hierarchy file {} must be a JSON object", path));
  }
  ExtraNames out;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array()) {
      throw DataError(fmt::format("hierarchy file {}: names for {} must be an "
                                  "array",
                                  path, key));
    }
    auto& names = out[LabelPath::Parse(key).str()];
    for (const auto& v : value) {
      if (!v.is_string()) {
        throw DataError(fmt::format("hierarchy file {}: non-string name under {}",
                                    path, key));
      }
      names.push_back(Lower(v.get<std::string>()));
    }
  }
  return out;
}

}  // namespace fewtype
