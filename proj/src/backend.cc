// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/backend.h"

#include <cmath>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

namespace {

constexpr std::string_view kWordPieceCont = "##";
constexpr std::string_view kBpeSpace = "\xC4\xA0";       // U+0120 'Ġ'
constexpr std::string_view kSentencePieceSpace = "\xE2\x96\x81";  // U+2581

SubwordStyle DetectStyle(const std::vector<std::string>& tokens) {
  bool bpe = false, sp = false;
  for (const auto& t : tokens) {
    if (t.starts_with(kBpeSpace)) bpe = true;
    if (t.starts_with(kSentencePieceSpace)) sp = true;
  }
  if (bpe) return SubwordStyle::kByteLevelBpe;
  if (sp) return SubwordStyle::kSentencePiece;
  return SubwordStyle::kWordPiece;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens, std::string mask_token,
             std::set<TokenId> special_ids)
    : id_to_token_(std::move(tokens)),
      mask_token_(std::move(mask_token)),
      special_ids_(std::move(special_ids)) {
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    auto [it, inserted] =
        token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw ContractError(
          fmt::format("vocab: duplicate token '{}'", id_to_token_[i]));
    }
  }
  auto mask = token_to_id_.find(mask_token_);
  if (mask == token_to_id_.end()) {
    throw ContractError(
        fmt::format("vocab: mask token '{}' not in vocab", mask_token_));
  }
  mask_id_ = mask->second;
  for (TokenId id : special_ids_) {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
      throw ContractError(fmt::format("vocab: special id {} out of range", id));
    }
  }
  special_ids_.insert(mask_id_);
  style_ = DetectStyle(id_to_token_);
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw ContractError(fmt::format("token id {} out of range", id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

std::string Vocab::Surface(TokenId id) const {
  std::string_view t = token(id);
  switch (style_) {
    case SubwordStyle::kWordPiece:
      if (t.starts_with(kWordPieceCont) && t.size() > kWordPieceCont.size()) {
        t.remove_prefix(kWordPieceCont.size());
      }
      break;
    case SubwordStyle::kByteLevelBpe:
      if (t.starts_with(kBpeSpace)) t.remove_prefix(kBpeSpace.size());
      break;
    case SubwordStyle::kSentencePiece:
      if (t.starts_with(kSentencePieceSpace)) {
        t.remove_prefix(kSentencePieceSpace.size());
      }
      break;
  }
  return std::string(t);
}

std::string Vocab::Detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    const std::string& t = token(id);
    bool starts_word = true;
    switch (style_) {
      case SubwordStyle::kWordPiece:
        starts_word = !(t.starts_with(kWordPieceCont) &&
                        t.size() > kWordPieceCont.size());
        break;
      case SubwordStyle::kByteLevelBpe:
        starts_word = t.starts_with(kBpeSpace);
        break;
      case SubwordStyle::kSentencePiece:
        starts_word = t.starts_with(kSentencePieceSpace);
        break;
    }
    if (starts_word && !out.empty()) out += ' ';
    out += Surface(id);
  }
  return out;
}

std::uint64_t Vocab::Fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : id_to_token_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

bool Vocab::operator==(const Vocab& other) const {
  return id_to_token_ == other.id_to_token_ &&
         mask_token_ == other.mask_token_ &&
         special_ids_ == other.special_ids_;
}

std::vector<std::vector<TokenDistribution>>
MaskedLmProvider::MaskDistributionsBatch(std::span<const MaskQuery> queries) {
  std::vector<std::vector<TokenDistribution>> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    out.push_back(MaskDistributions(q.prompt, q.filled));
  }
  return out;
}

void CheckMaskQuery(const RenderedPrompt& prompt, const Fills& filled) {
  if (prompt.mask_positions.empty()) {
    throw ContractError("mask query: prompt has no masks");
  }
  for (const auto& [pos, id] : filled) {
    if (pos >= prompt.mask_positions.size()) {
      throw ContractError(
          fmt::format("mask query: filled position {} is not a mask", pos));
    }
  }
  if (filled.size() >= prompt.mask_positions.size()) {
    throw ContractError("mask query: every mask is already filled");
  }
}

std::size_t CountOccurrences(std::string_view text, std::string_view sentinel) {
  if (sentinel.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = text.find(sentinel); pos != std::string_view::npos;
       pos = text.find(sentinel, pos + sentinel.size())) {
    ++count;
  }
  return count;
}

TokenDistribution ExcludeSpecial(const TokenDistribution& d,
                                 const Vocab& vocab) {
  TokenDistribution out = d;
  for (TokenId id : vocab.special_ids()) {
    if (static_cast<std::size_t>(id) < out.probs.size()) {
      out.probs[static_cast<std::size_t>(id)] = 0.0;
    }
  }
  double total = 0.0;
  for (double p : out.probs) total += p;
  if (total > 0.0) {
    for (double& p : out.probs) p /= total;
  }
  return out;
}

void CheckNormalized(const TokenDistribution& d, std::size_t vocab_size,
                     double tol) {
  if (d.probs.size() != vocab_size) {
    throw ContractError(fmt::format("distribution has {} entries, vocab has {}",
                                    d.probs.size(), vocab_size));
  }
  double total = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractError("distribution has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tol) {
    throw ContractError(fmt::format("distribution sums to {}", total));
  }
}

}  // namespace fewtype
