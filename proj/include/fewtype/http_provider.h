// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

#include "fewtype/backend.h"

namespace fewtype {

struct HttpProviderOptions {
  // Maximum number of requests in flight for MaskDistributionsBatch.
  std::size_t max_in_flight = 4;
  // Extra attempts after a failed request before a TransportError escapes.
  int retries = 2;
  int timeout_seconds = 60;
};

// Client for the inference service wire protocol:
//   GET  /v1/vocab       -> {tokens, mask_token, special_ids}
//   POST /v1/tokenize    {text}          -> {ids}
//   POST /v1/mask_probs  {text, filled}  -> {distributions}
// `filled` is a JSON object keyed by decimal mask index.
class HttpProvider : public MaskedLmProvider {
 public:
  // `endpoint` is scheme://host:port, e.g. http://127.0.0.1:8080.
  explicit HttpProvider(std::string endpoint, HttpProviderOptions options = {});

  const Vocab& vocab() override;
  std::vector<TokenDistribution> MaskDistributions(
      const RenderedPrompt& prompt, const Fills& filled) override;
  std::vector<TokenId> Tokenize(std::string_view text) override;
  std::vector<std::vector<TokenDistribution>> MaskDistributionsBatch(
      std::span<const MaskQuery> queries) override;

 private:
  nlohmann::json Get(const std::string& path);
  nlohmann::json Post(const std::string& path, const nlohmann::json& body);

  std::string endpoint_;
  HttpProviderOptions options_;
  std::once_flag vocab_once_;
  std::optional<Vocab> vocab_;
};

// Wire encodings shared by the client and any server implementing the
// protocol.
nlohmann::json VocabToWire(const Vocab& vocab);
Vocab VocabFromWire(const nlohmann::json& j);
nlohmann::json FillsToWire(const Fills& filled);
Fills FillsFromWire(const nlohmann::json& j);

}  // namespace fewtype
