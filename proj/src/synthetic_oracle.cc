// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/synthetic_oracle.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

using nlohmann::json;

SyntheticOracle::SyntheticOracle(Vocab vocab, Fallback fallback)
    : vocab_(std::move(vocab)), fallback_(fallback) {
  uniform_.probs.assign(vocab_.size(), 1.0);
  uniform_ = ExcludeSpecial(uniform_, vocab_);
}

std::string SyntheticOracle::FillsFingerprint(const Fills& filled) {
  std::string out;
  for (const auto& [pos, id] : filled) {
    if (!out.empty()) out += ',';
    out += fmt::format("{}:{}", pos, id);
  }
  return out;
}

std::string SyntheticOracle::Key(const std::string& prompt, std::size_t mask,
                                 const Fills& filled) {
  return fmt::format("{}\x1f{}\x1f{}", prompt, mask, FillsFingerprint(filled));
}

void SyntheticOracle::AddEntry(const std::string& prompt, std::size_t mask,
                               const Fills& filled, TokenDistribution d) {
  CheckNormalized(d, vocab_.size());
  std::string key = Key(prompt, mask, filled);
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].dist = std::move(d);
    return;
  }
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(Entry{prompt, mask, filled, std::move(d)});
}

void SyntheticOracle::AddTopEntry(
    const std::string& prompt, std::size_t mask, const Fills& filled,
    const std::vector<std::pair<TokenId, double>>& top) {
  TokenDistribution d;
  d.probs.assign(vocab_.size(), 0.0);
  std::vector<bool> listed(vocab_.size(), false);
  double mass = 0.0;
  for (const auto& [id, p] : top) {
    vocab_.token(id);  // range check
    if (p < 0.0) throw ContractError("oracle entry has a negative probability");
    d.probs[static_cast<std::size_t>(id)] += p;
    listed[static_cast<std::size_t>(id)] = true;
    mass += p;
  }
  if (mass > 1.0 + 1e-9) {
    throw ContractError(fmt::format("oracle entry mass {} exceeds 1", mass));
  }
  std::size_t rest = 0;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!listed[i] && !vocab_.is_special(static_cast<TokenId>(i))) ++rest;
  }
  double leftover = 1.0 - mass;
  if (rest > 0 && leftover > 0.0) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (!listed[i] && !vocab_.is_special(static_cast<TokenId>(i))) {
        d.probs[i] = leftover / static_cast<double>(rest);
      }
    }
  }
  AddEntry(prompt, mask, filled, std::move(d));
}

const TokenDistribution& SyntheticOracle::Lookup(const std::string& prompt,
                                                 std::size_t mask,
                                                 const Fills& filled) const {
  auto it = index_.find(Key(prompt, mask, filled));
  if (it == index_.end() && !filled.empty()) {
    it = index_.find(Key(prompt, mask, {}));
  }
  if (it != index_.end()) return entries_[it->second].dist;
  if (fallback_ == Fallback::kError) {
    throw ContractError(fmt::format(
        "synthetic oracle has no entry for mask {} of '{}' with fills [{}]",
        mask, prompt, FillsFingerprint(filled)));
  }
  return uniform_;
}

std::vector<TokenDistribution> SyntheticOracle::MaskDistributions(
    const RenderedPrompt& prompt, const Fills& filled) {
  CheckMaskQuery(prompt, filled);
  std::vector<TokenDistribution> out;
  for (std::size_t pos : prompt.mask_positions) {
    if (filled.contains(pos)) continue;
    out.push_back(Lookup(prompt.text, pos, filled));
  }
  return out;
}

std::vector<TokenId> SyntheticOracle::Tokenize(std::string_view text) {
  std::vector<TokenId> ids;
  std::istringstream words{std::string(text)};
  std::string word;
  auto unk = vocab_.find("[UNK]");
  auto piece = [&](const std::string& p) {
    if (auto id = vocab_.find(p)) {
      ids.push_back(*id);
    } else if (unk) {
      ids.push_back(*unk);
    } else {
      throw ContractError(
          fmt::format("synthetic oracle cannot tokenize piece '{}'", p));
    }
  };
  while (words >> word) {
    if (auto id = vocab_.find(word)) {
      ids.push_back(*id);
      continue;
    }
    for (std::size_t i = 0; i < word.size(); ++i) {
      std::string ch(1, word[i]);
      piece(i == 0 ? ch : "##" + ch);
    }
  }
  return ids;
}

SyntheticOracle SyntheticOracle::FromJson(const json& doc) {
  try {
    const json& v = doc.at("vocab");
    std::set<TokenId> special;
    for (const auto& id : v.value("special_ids", json::array())) {
      special.insert(id.get<TokenId>());
    }
    Vocab vocab(v.at("tokens").get<std::vector<std::string>>(),
                v.at("mask_token").get<std::string>(), std::move(special));
    std::string fb = doc.value("fallback", std::string("uniform"));
    if (fb != "uniform" && fb != "error") {
      throw DataError(fmt::format("unknown oracle fallback '{}'", fb));
    }
    SyntheticOracle oracle(std::move(vocab),
                           fb == "error" ? Fallback::kError : Fallback::kUniform);
    auto to_id = [&oracle](const json& j) -> TokenId {
      if (j.is_string()) {
        auto id = oracle.vocab_.find(j.get<std::string>());
        if (!id) {
          throw DataError(fmt::format("oracle entry names unknown token {}",
                                      j.dump()));
        }
        return *id;
      }
      return j.get<TokenId>();
    };
    for (const auto& e : doc.value("entries", json::array())) {
      Fills filled;
      const json fills = e.value("filled", json::object());
      for (const auto& [pos, id] : fills.items()) {
        filled[std::stoul(pos)] = to_id(id);
      }
      std::string prompt = e.at("prompt").get<std::string>();
      std::size_t mask = e.at("mask").get<std::size_t>();
      if (e.contains("probs")) {
        oracle.AddEntry(prompt, mask, filled,
                        TokenDistribution{e["probs"].get<std::vector<double>>()});
      } else {
        std::vector<std::pair<TokenId, double>> top;
        for (const auto& [tok, p] : e.at("top").items()) {
          auto id = oracle.vocab_.find(tok);
          if (!id) throw DataError(fmt::format("unknown oracle token '{}'", tok));
          top.emplace_back(*id, p.get<double>());
        }
        oracle.AddTopEntry(prompt, mask, filled, top);
      }
    }
    return oracle;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed oracle file: {}", e.what()));
  } catch (const ContractError& e) {
    throw DataError(fmt::format("malformed oracle file: {}", e.what()));
  }
}

SyntheticOracle SyntheticOracle::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open oracle file {}", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("oracle file {}: {}", path, e.what()));
  }
  return FromJson(doc);
}

json SyntheticOracle::ToJson() const {
  json special = json::array();
  for (TokenId id : vocab_.special_ids()) special.push_back(id);
  json entries = json::array();
  for (const auto& e : entries_) {
    json filled = json::object();
    for (const auto& [pos, id] : e.filled) filled[std::to_string(pos)] = id;
    entries.push_back({{"prompt", e.prompt},
                       {"mask", e.mask},
                       {"filled", filled},
                       {"probs", e.dist.probs}});
  }
  return {{"vocab",
           {{"tokens", vocab_.tokens()},
            {"mask_token", vocab_.mask_token()},
            {"special_ids", special}}},
          {"fallback", fallback_ == Fallback::kError ? "error" : "uniform"},
          {"entries", entries}};
}

}  // namespace fewtype
