// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/eval.h"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "fewtype/error.h"

namespace fewtype {

namespace {

double F1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

EvalResult Evaluate(const std::vector<std::pair<LabelPath, LabelPath>>& pairs,
                    const LabelHierarchy& h) {
  if (pairs.empty()) throw ContractError("evaluate: no examples");
  EvalResult r;
  r.n = pairs.size();
  std::size_t exact = 0;
  double sum_overlap = 0.0, sum_pred = 0.0, sum_gold = 0.0;
  double sum_precision = 0.0, sum_recall = 0.0;
  for (const auto& [gold, pred] : pairs) {
    auto g = h.AncestorClosure(h.IndexOf(gold));
    auto p = h.AncestorClosure(h.IndexOf(pred));
    std::vector<std::size_t> both;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(),
                          std::back_inserter(both));
    if (g == p) ++exact;
    const auto overlap = static_cast<double>(both.size());
    sum_overlap += overlap;
    sum_pred += static_cast<double>(p.size());
    sum_gold += static_cast<double>(g.size());
    sum_precision += overlap / static_cast<double>(p.size());
    sum_recall += overlap / static_cast<double>(g.size());
  }
  const auto n = static_cast<double>(r.n);
  r.strict_acc = static_cast<double>(exact) / n;
  r.loose_macro_f1 = F1(sum_precision / n, sum_recall / n);
  r.loose_micro_f1 = F1(sum_overlap / sum_pred, sum_overlap / sum_gold);
  return r;
}

nlohmann::json EvalResultToJson(const EvalResult& r) {
  return {{"n", r.n},
          {"strict_acc", r.strict_acc},
          {"loose_micro_f1", r.loose_micro_f1},
          {"loose_macro_f1", r.loose_macro_f1}};
}

std::string FormatEvalTable(const EvalResult& r) {
  return fmt::format(
      "{:<16}{:>10}\n{:<16}{:>10.4f}\n{:<16}{:>10.4f}\n{:<16}{:>10.4f}\n",
      "examples", r.n, "strict acc", r.strict_acc, "loose micro-F1",
      r.loose_micro_f1, "loose macro-F1", r.loose_macro_f1);
}

}  // namespace fewtype
