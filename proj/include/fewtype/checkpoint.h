// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "fewtype/interpreter.h"

namespace fewtype {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to resume or serve a trained matrix.
struct Checkpoint {
  CorrelationMatrix matrix;
  std::optional<OptimizerState> optimizer;
  std::uint64_t vocab_fingerprint = 0;
  // First epoch (1-based) that has not run yet.
  std::size_t next_epoch = 1;
  nlohmann::json extra = nlohmann::json::object();
};

// {"rows", "cols", "data"} with data in row-major order.
nlohmann::json MatrixToJson(const Matrix& m);
Matrix MatrixFromJson(const nlohmann::json& j);

nlohmann::json CheckpointToJson(const Checkpoint& ckpt);
Checkpoint CheckpointFromJson(const nlohmann::json& j);

// Writes via a temporary file and rename.
void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);

// Throws DataError if the file is malformed or its vocab fingerprint differs
// from `expected_fingerprint`.
Checkpoint LoadCheckpoint(const std::string& path,
                          std::uint64_t expected_fingerprint);

}  // namespace fewtype
