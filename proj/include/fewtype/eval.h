// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fewtype/hierarchy.h"

namespace fewtype {

struct EvalResult {
  double strict_acc = 0.0;
  double loose_micro_f1 = 0.0;
  double loose_macro_f1 = 0.0;
  std::size_t n = 0;
};

// Strict accuracy and loose micro/macro F1 over ancestor closures of the gold
// and predicted paths. Throws ContractError on an empty list and DataError on
// labels outside `h`.
EvalResult Evaluate(const std::vector<std::pair<LabelPath, LabelPath>>& pairs,
                    const LabelHierarchy& h);

nlohmann::json EvalResultToJson(const EvalResult& r);
std::string FormatEvalTable(const EvalResult& r);

}  // namespace fewtype
