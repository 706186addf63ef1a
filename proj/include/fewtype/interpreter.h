// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fewtype/backend.h"
#include "fewtype/hierarchy.h"

namespace fewtype {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Hyperparams {
  double alpha = 0.1;        // init bias towards label-name tokens
  double epsilon = 0.1;      // label smoothing for generated instances
  double lambda = 1.0;       // hierarchy regularizer weight
  double lambda_new = 1.0;   // generated-instance loss weight
  std::size_t instances = 5; // M
  std::size_t epochs = 30;   // T
  std::size_t shots = 5;     // K
  double lr = 1e-2;
  std::size_t beam_width = 10;
  std::size_t batch_size = 8;

  // Throws ConfigError on out-of-range values.
  void Validate() const;
};

// Row y, column w holds the correlation score between label y and token w.
// Rows follow LabelHierarchy index order.
struct CorrelationMatrix {
  Matrix u;
  std::vector<LabelPath> labels;

  std::size_t num_labels() const { return static_cast<std::size_t>(u.rows()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(u.cols()); }
};

// Adam with a linearly decaying learning rate.
struct OptimizerState {
  std::int64_t step = 0;
  std::int64_t total_steps = 1;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Matrix m;
  Matrix v;

  static OptimizerState Create(const Matrix& like, double lr,
                               std::int64_t total_steps);
  double EffectiveLr() const;
};

// Tokenizes every label name and drops special/unknown pieces (logged).
// Result is indexed like the hierarchy; inner lists are sorted and unique.
std::vector<std::vector<TokenId>> ResolveNameTokens(const LabelHierarchy& h,
                                                    MaskedLmProvider& provider);

// Name-token entries get (1-a)/|y| + a/(|V|-|y|), everything else a/(|V|-|y|),
// where |y| is the number of name tokens of the row's label. A label without
// name tokens gets a uniform 1/|V| row.
CorrelationMatrix InitCorrelation(
    const LabelHierarchy& h, std::size_t vocab_size,
    const std::vector<std::vector<TokenId>>& name_tokens, double alpha);

// p(y|w): softmax of column w.
Vector WordToType(const Matrix& u, TokenId w);

// All of p(y|w) at once.
Matrix ColumnSoftmax(const Matrix& u);

// p(y|h) = sum_w p(y|w) p(w|h).
Vector MapToLabels(const Matrix& u, const TokenDistribution& d);
Vector MapToLabels(const Matrix& column_softmax, const Eigen::Ref<const Vector>& d);

// Cosine of two rows; 0 if either has zero norm.
double RowCosine(const Matrix& u, std::size_t a, std::size_t b);

// Sum over labels with a parent of 1 - cos(child row, parent row).
double InclusiveLoss(const Matrix& u, const LabelHierarchy& h);

// Sum over unordered sibling pairs of cos(row_i, row_j).
double ExclusiveLoss(const Matrix& u, const LabelHierarchy& h);

inline constexpr double kProbFloor = 1e-12;

// -log pred[gold], with pred floored at kProbFloor.
double CeLoss(const Vector& pred, std::size_t gold);

// KL(target || pred) with both sides floored at kProbFloor.
double KlLoss(const Vector& target, const Vector& pred);

struct LossTerms {
  double ce = 0.0;
  double inc = 0.0;
  double exc = 0.0;
  double new_instances = 0.0;
};

struct LossWeights {
  double lambda = 1.0;
  double lambda_new = 1.0;
  double beta = 0.0;
};

// ce + lambda*exc + lambda*inc + beta*lambda_new*new.
double TotalLoss(const LossTerms& terms, const LossWeights& w);

struct LabeledDist {
  Vector dist;  // p(w|h), length |V|
  std::size_t gold;
};

struct SoftTargetDist {
  Vector dist;    // p(w|h), length |V|
  Vector target;  // smoothed label vector, length |Y|
};

// `ce` is the mean over `labeled`, `new_instances` the mean over `augmented`;
// an empty list contributes 0.
struct Batch {
  std::vector<LabeledDist> labeled;
  std::vector<SoftTargetDist> augmented;
};

LossTerms EvaluateLoss(const Matrix& u, const Batch& batch,
                       const LabelHierarchy& h);

struct LossGradient {
  LossTerms terms;
  double total = 0.0;
  Matrix grad;
};

// Analytic dL_total/dU. Terms whose weight is zero are skipped entirely.
// Throws ContractError on an empty batch.
LossGradient GradTotal(const Matrix& u, const Batch& batch,
                       const LabelHierarchy& h, const LossWeights& w);

// One Adam update using the current decayed learning rate, then step += 1.
void AdamStep(Matrix& u, OptimizerState& state, const Matrix& grad);

}  // namespace fewtype
