// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "fewtype/interpreter.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fewtype/error.h"

namespace fewtype {

void Hyperparams::Validate() const {
  auto require = [](bool ok, std::string_view what) {
    if (!ok) throw ConfigError(fmt::format("hyperparameter out of range: {}", what));
  };
  require(alpha >= 0.0 && alpha < 1.0, "alpha must be in [0,1)");
  require(epsilon >= 0.0 && epsilon < 1.0, "epsilon must be in [0,1)");
  require(lambda >= 0.0, "lambda must be >= 0");
  require(lambda_new >= 0.0, "lambda_new must be >= 0");
  require(instances >= 1, "instances (M) must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(shots >= 1, "shots must be >= 1");
  require(lr > 0.0, "lr must be > 0");
  require(beam_width >= 1, "beam_width must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
}

OptimizerState OptimizerState::Create(const Matrix& like, double lr,
                                      std::int64_t total_steps) {
  OptimizerState s;
  s.lr = lr;
  s.total_steps = std::max<std::int64_t>(total_steps, 1);
  s.m = Matrix::Zero(like.rows(), like.cols());
  s.v = Matrix::Zero(like.rows(), like.cols());
  return s;
}

double OptimizerState::EffectiveLr() const {
  double frac = 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
  return lr * std::max(0.0, frac);
}

std::vector<std::vector<TokenId>> ResolveNameTokens(const LabelHierarchy& h,
                                                    MaskedLmProvider& provider) {
  const Vocab& vocab = provider.vocab();
  std::vector<std::vector<TokenId>> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (const auto& name : h.names(i)) {
      std::vector<TokenId> ids = provider.Tokenize(name);
      bool dropped = false;
      for (TokenId id : ids) {
        if (vocab.is_special(id)) {
          dropped = true;
        } else {
          out[i].push_back(id);
        }
      }
      if (dropped || ids.empty()) {
        spdlog::warn("label {}: name '{}' has unresolvable pieces; dropped them",
                     h.label(i).str(), name);
      }
    }
    std::sort(out[i].begin(), out[i].end());
    out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
    if (out[i].empty()) {
      spdlog::warn("label {} has no resolvable name tokens; using a uniform row",
                   h.label(i).str());
    }
  }
  return out;
}

CorrelationMatrix InitCorrelation(
    const LabelHierarchy& h, std::size_t vocab_size,
    const std::vector<std::vector<TokenId>>& name_tokens, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha {} is outside [0,1)", alpha));
  }
  if (name_tokens.size() != h.size()) {
    throw ContractError("name token lists do not match the hierarchy");
  }
  const auto V = static_cast<double>(vocab_size);
  CorrelationMatrix cm;
  cm.labels = h.labels();
  cm.u.resize(static_cast<Eigen::Index>(h.size()),
              static_cast<Eigen::Index>(vocab_size));
  for (std::size_t y = 0; y < h.size(); ++y) {
    const auto& names = name_tokens[y];
    auto row = cm.u.row(static_cast<Eigen::Index>(y));
    if (names.empty()) {
      row.setConstant(1.0 / V);
      continue;
    }
    const auto n = static_cast<double>(names.size());
    const double base = n < V ? alpha / (V - n) : 0.0;
    row.setConstant(base);
    for (TokenId w : names) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
        throw ContractError(fmt::format("name token {} out of range", w));
      }
      row(w) = (1.0 - alpha) / n + base;
    }
  }
  return cm;
}

Vector WordToType(const Matrix& u, TokenId w) {
  Vector col = u.col(w);
  col.array() -= col.maxCoeff();
  col = col.array().exp();
  return col / col.sum();
}

Matrix ColumnSoftmax(const Matrix& u) {
  Matrix p = u;
  Eigen::RowVectorXd max = p.colwise().maxCoeff();
  p.rowwise() -= max;
  p = p.array().exp();
  Eigen::RowVectorXd sum = p.colwise().sum();
  p.array().rowwise() /= sum.array();
  return p;
}

Vector MapToLabels(const Matrix& column_softmax,
                   const Eigen::Ref<const Vector>& d) {
  return column_softmax * d;
}

Vector MapToLabels(const Matrix& u, const TokenDistribution& d) {
  if (d.probs.size() != static_cast<std::size_t>(u.cols())) {
    throw ContractError("distribution size does not match the matrix");
  }
  Eigen::Map<const Vector> dv(d.probs.data(), u.cols());
  return MapToLabels(ColumnSoftmax(u), dv);
}

double RowCosine(const Matrix& u, std::size_t a, std::size_t b) {
  // One pass with a shared summation order, so identical rows give exactly 1.
  const double* ra = u.data() + static_cast<Eigen::Index>(a) * u.cols();
  const double* rb = u.data() + static_cast<Eigen::Index>(b) * u.cols();
  double dot = 0.0, saa = 0.0, sbb = 0.0;
  for (Eigen::Index w = 0; w < u.cols(); ++w) {
    dot += ra[w] * rb[w];
    saa += ra[w] * ra[w];
    sbb += rb[w] * rb[w];
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return dot / std::sqrt(saa * sbb);
}

double InclusiveLoss(const Matrix& u, const LabelHierarchy& h) {
  double loss = 0.0;
  for (std::size_t y = 0; y < h.size(); ++y) {
    if (!h.is_root(y)) loss += 1.0 - RowCosine(u, y, h.parent(y));
  }
  return loss;
}

double ExclusiveLoss(const Matrix& u, const LabelHierarchy& h) {
  double loss = 0.0;
  for (const auto& [a, b] : h.SiblingPairs()) loss += RowCosine(u, a, b);
  return loss;
}

double CeLoss(const Vector& pred, std::size_t gold) {
  return -std::log(std::max(pred(static_cast<Eigen::Index>(gold)), kProbFloor));
}

double KlLoss(const Vector& target, const Vector& pred) {
  double kl = 0.0;
  for (Eigen::Index y = 0; y < target.size(); ++y) {
    if (target(y) <= 0.0) continue;
    double t = std::max(target(y), kProbFloor);
    kl += target(y) * (std::log(t) - std::log(std::max(pred(y), kProbFloor)));
  }
  return kl;
}

double TotalLoss(const LossTerms& t, const LossWeights& w) {
  return t.ce + w.lambda * t.exc + w.lambda * t.inc +
         w.beta * w.lambda_new * t.new_instances;
}

LossTerms EvaluateLoss(const Matrix& u, const Batch& batch,
                       const LabelHierarchy& h) {
  LossTerms terms;
  Matrix p = ColumnSoftmax(u);
  for (const auto& ex : batch.labeled) {
    terms.ce += CeLoss(MapToLabels(p, ex.dist), ex.gold);
  }
  if (!batch.labeled.empty()) terms.ce /= static_cast<double>(batch.labeled.size());
  for (const auto& ex : batch.augmented) {
    terms.new_instances += KlLoss(ex.target, MapToLabels(p, ex.dist));
  }
  if (!batch.augmented.empty()) {
    terms.new_instances /= static_cast<double>(batch.augmented.size());
  }
  terms.inc = InclusiveLoss(u, h);
  terms.exc = ExclusiveLoss(u, h);
  return terms;
}

namespace {

// Adds scale * d cos(row a, row b) / d(row a, row b) into grad.
void AccumulateCosineGrad(const Matrix& u, std::size_t a, std::size_t b,
                          double scale, Matrix& grad) {
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  const auto ra = u.row(ia);
  const auto rb = u.row(ib);
  double na = ra.norm(), nb = rb.norm();
  if (na == 0.0 || nb == 0.0) return;
  double cos = ra.dot(rb) / (na * nb);
  grad.row(ia) += scale * (rb / (na * nb) - cos * ra / (na * na));
  grad.row(ib) += scale * (ra / (na * nb) - cos * rb / (nb * nb));
}

// Backpropagates dL/dq (q = P d) into dL/dU:
// dL/du[a,w] = d_w P[a,w] (g_a - sum_y g_y P[y,w]).
void AccumulateMappingGrad(const Matrix& p, const Vector& d, const Vector& g,
                           double scale, Matrix& grad) {
  Eigen::RowVectorXd s = g.transpose() * p;
  Eigen::ArrayXXd term = p.array().colwise() * g.array();
  term -= p.array().rowwise() * s.array();
  term.rowwise() *= d.transpose().array();
  grad.array() += scale * term;
}

}  // namespace

LossGradient GradTotal(const Matrix& u, const Batch& batch,
                       const LabelHierarchy& h, const LossWeights& w) {
  if (batch.labeled.empty() && batch.augmented.empty()) {
    throw ContractError("gradient requested for an empty batch");
  }
  LossGradient out;
  out.grad = Matrix::Zero(u.rows(), u.cols());
  Matrix p = ColumnSoftmax(u);

  if (!batch.labeled.empty()) {
    const double scale = 1.0 / static_cast<double>(batch.labeled.size());
    for (const auto& ex : batch.labeled) {
      Vector q = MapToLabels(p, ex.dist);
      const auto gold = static_cast<Eigen::Index>(ex.gold);
      out.terms.ce += CeLoss(q, ex.gold);
      if (q(gold) < kProbFloor) continue;  // clamped: flat
      Vector g = Vector::Zero(q.size());
      g(gold) = -1.0 / q(gold);
      AccumulateMappingGrad(p, ex.dist, g, scale, out.grad);
    }
    out.terms.ce *= scale;
  }

  const double new_weight = w.beta * w.lambda_new;
  if (!batch.augmented.empty()) {
    const double scale = 1.0 / static_cast<double>(batch.augmented.size());
    for (const auto& ex : batch.augmented) {
      Vector q = MapToLabels(p, ex.dist);
      out.terms.new_instances += KlLoss(ex.target, q);
      if (new_weight == 0.0) continue;
      Vector g = Vector::Zero(q.size());
      for (Eigen::Index y = 0; y < q.size(); ++y) {
        if (ex.target(y) > 0.0 && q(y) >= kProbFloor) g(y) = -ex.target(y) / q(y);
      }
      AccumulateMappingGrad(p, ex.dist, g, new_weight * scale, out.grad);
    }
    out.terms.new_instances *= scale;
  }

  out.terms.inc = InclusiveLoss(u, h);
  out.terms.exc = ExclusiveLoss(u, h);
  if (w.lambda != 0.0) {
    for (std::size_t y = 0; y < h.size(); ++y) {
      if (!h.is_root(y)) AccumulateCosineGrad(u, y, h.parent(y), -w.lambda, out.grad);
    }
    for (const auto& [a, b] : h.SiblingPairs()) {
      AccumulateCosineGrad(u, a, b, w.lambda, out.grad);
    }
  }
  out.total = TotalLoss(out.terms, w);
  return out;
}

void AdamStep(Matrix& u, OptimizerState& s, const Matrix& grad) {
  if (grad.rows() != u.rows() || grad.cols() != u.cols() ||
      s.m.rows() != u.rows() || s.m.cols() != u.cols()) {
    throw ContractError("adam: shape mismatch");
  }
  const double lr = s.EffectiveLr();
  s.step += 1;
  const auto t = static_cast<double>(s.step);
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  if (lr == 0.0) return;
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  u.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.eps);
}

}  // namespace fewtype
