// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/http_provider.h"

#include <atomic>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"

#include "fewtype/error.h"

namespace fewtype {

using nlohmann::json;

json VocabToWire(const Vocab& vocab) {
  json special = json::array();
  for (TokenId id : vocab.special_ids()) special.push_back(id);
  return {{"tokens", vocab.tokens()},
          {"mask_token", vocab.mask_token()},
          {"special_ids", special}};
}

Vocab VocabFromWire(const json& j) {
  std::set<TokenId> special;
  for (const auto& id : j.value("special_ids", json::array())) {
    special.insert(id.get<TokenId>());
  }
  return Vocab(j.at("tokens").get<std::vector<std::string>>(),
               j.at("mask_token").get<std::string>(), std::move(special));
}

json FillsToWire(const Fills& filled) {
  json out = json::object();
  for (const auto& [pos, id] : filled) out[std::to_string(pos)] = id;
  return out;
}

Fills FillsFromWire(const json& j) {
  Fills out;
  for (const auto& [pos, id] : j.items()) {
    out[std::stoul(pos)] = id.get<TokenId>();
  }
  return out;
}

HttpProvider::HttpProvider(std::string endpoint, HttpProviderOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

json HttpProvider::Get(const std::string& path) {
  return Post(path, json());
}

json HttpProvider::Post(const std::string& path, const json& body) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    httplib::Result res =
        body.is_null() ? client.Get(path)
                       : client.Post(path, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw TransportError(
            fmt::format("{}{}: malformed response: {}", endpoint_, path, e.what()));
      }
    } else if (res->status == 400) {
      throw ContractError(
          fmt::format("{}{} rejected request: {}", endpoint_, path, res->body));
    } else {
      last_error = fmt::format("HTTP {}", res->status);
    }
    if (attempt < options_.retries) {
      spdlog::warn("{}{} failed ({}), retrying", endpoint_, path, last_error);
    }
  }
  throw TransportError(
      fmt::format("{}{} failed: {}", endpoint_, path, last_error));
}

const Vocab& HttpProvider::vocab() {
  std::call_once(vocab_once_, [this] {
    json j = Get("/v1/vocab");
    try {
      vocab_ = VocabFromWire(j);
    } catch (const json::exception& e) {
      throw TransportError(fmt::format("malformed /v1/vocab response: {}", e.what()));
    }
  });
  return *vocab_;
}

std::vector<TokenId> HttpProvider::Tokenize(std::string_view text) {
  json j = Post("/v1/tokenize", {{"text", text}});
  try {
    return j.at("ids").get<std::vector<TokenId>>();
  } catch (const json::exception& e) {
    throw TransportError(fmt::format("malformed /v1/tokenize response: {}", e.what()));
  }
}

std::vector<TokenDistribution> HttpProvider::MaskDistributions(
    const RenderedPrompt& prompt, const Fills& filled) {
  CheckMaskQuery(prompt, filled);
  json j = Post("/v1/mask_probs",
                {{"text", prompt.text}, {"filled", FillsToWire(filled)}});
  std::vector<TokenDistribution> out;
  try {
    for (const auto& d : j.at("distributions")) {
      out.push_back(TokenDistribution{d.get<std::vector<double>>()});
    }
  } catch (const json::exception& e) {
    throw TransportError(
        fmt::format("malformed /v1/mask_probs response: {}", e.what()));
  }
  std::size_t expected = prompt.mask_positions.size() - filled.size();
  if (out.size() != expected) {
    throw TransportError(fmt::format(
        "/v1/mask_probs returned {} distributions, expected {}", out.size(),
        expected));
  }
  return out;
}

std::vector<std::vector<TokenDistribution>> HttpProvider::MaskDistributionsBatch(
    std::span<const MaskQuery> queries) {
  std::vector<std::vector<TokenDistribution>> out(queries.size());
  std::vector<std::exception_ptr> errors(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        out[i] = MaskDistributions(queries[i].prompt, queries[i].filled);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n = std::min(options_.max_in_flight, queries.size());
  std::vector<std::jthread> threads;
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  threads.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace fewtype
