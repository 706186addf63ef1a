// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/checkpoint.h"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

using nlohmann::json;

json MatrixToJson(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix MatrixFromJson(const json& j) {
  auto rows = j.at("rows").get<Eigen::Index>();
  auto cols = j.at("cols").get<Eigen::Index>();
  auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<std::size_t>(rows * cols) != data.size()) {
    throw DataError("checkpoint matrix shape does not match its data");
  }
  return Eigen::Map<Matrix>(data.data(), rows, cols);
}

json CheckpointToJson(const Checkpoint& ckpt) {
  json labels = json::array();
  for (const auto& l : ckpt.matrix.labels) labels.push_back(l.str());
  json j = {{"format", "fewtype-checkpoint"},
            {"version", kCheckpointVersion},
            {"labels", labels},
            {"vocab_fingerprint", fmt::format("{:016x}", ckpt.vocab_fingerprint)},
            {"next_epoch", ckpt.next_epoch},
            {"u", MatrixToJson(ckpt.matrix.u)},
            {"extra", ckpt.extra}};
  if (ckpt.optimizer) {
    const auto& o = *ckpt.optimizer;
    j["optimizer"] = {{"step", o.step},   {"total_steps", o.total_steps},
                      {"lr", o.lr},       {"beta1", o.beta1},
                      {"beta2", o.beta2}, {"eps", o.eps},
                      {"m", MatrixToJson(o.m)}, {"v", MatrixToJson(o.v)}};
  }
  return j;
}

Checkpoint CheckpointFromJson(const json& j) {
  try {
    if (j.at("format") != "fewtype-checkpoint") {
      throw DataError("not a fewtype checkpoint");
    }
    int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError(fmt::format("unsupported checkpoint version {}", version));
    }
    Checkpoint ckpt;
    for (const auto& l : j.at("labels")) {
      ckpt.matrix.labels.push_back(LabelPath::Parse(l.get<std::string>()));
    }
    ckpt.matrix.u = MatrixFromJson(j.at("u"));
    if (ckpt.matrix.labels.size() != ckpt.matrix.num_labels()) {
      throw DataError("checkpoint label list does not match the matrix rows");
    }
    ckpt.vocab_fingerprint =
        std::stoull(j.at("vocab_fingerprint").get<std::string>(), nullptr, 16);
    ckpt.next_epoch = j.value("next_epoch", std::size_t{1});
    ckpt.extra = j.value("extra", json::object());
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      OptimizerState s;
      s.step = o.at("step").get<std::int64_t>();
      s.total_steps = o.at("total_steps").get<std::int64_t>();
      s.lr = o.at("lr").get<double>();
      s.beta1 = o.at("beta1").get<double>();
      s.beta2 = o.at("beta2").get<double>();
      s.eps = o.at("eps").get<double>();
      s.m = MatrixFromJson(o.at("m"));
      s.v = MatrixFromJson(o.at("v"));
      ckpt.optimizer = std::move(s);
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed checkpoint: {}", e.what()));
  } catch (const std::logic_error& e) {
    throw DataError(fmt::format("malformed checkpoint: {}", e.what()));
  }
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError(fmt::format("cannot write checkpoint {}", path));
    out << CheckpointToJson(ckpt).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::string& path,
                          std::uint64_t expected_fingerprint) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open checkpoint {}", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("checkpoint {}: {}", path, e.what()));
  }
  Checkpoint ckpt = CheckpointFromJson(j);
  if (ckpt.vocab_fingerprint != expected_fingerprint) {
    throw DataError(fmt::format(
        "checkpoint {} was trained against a different vocabulary "
        "(fingerprint {:016x}, provider {:016x})",
        path, ckpt.vocab_fingerprint, expected_fingerprint));
  }
  return ckpt;
}

}  // namespace fewtype
