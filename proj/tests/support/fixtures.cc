// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

namespace fewtype::testing {

Vocab SmallVocab(const std::vector<std::string>& words) {
  std::vector<std::string> tokens{"[PAD]", "[UNK]", "[MASK]"};
  tokens.insert(tokens.end(), words.begin(), words.end());
  return Vocab(std::move(tokens), "[MASK]", {0, 1, 2});
}

SyntheticOracle SmallOracle(const std::vector<std::string>& words,
                            SyntheticOracle::Fallback fallback) {
  return SyntheticOracle(SmallVocab(words), fallback);
}

std::vector<std::string> NumberedWords(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt::format("w{}", i));
  return out;
}

LabelHierarchy Hierarchy(const std::vector<std::string>& paths) {
  std::vector<LabelPath> labels;
  for (const auto& p : paths) labels.push_back(LabelPath::Parse(p));
  return LabelHierarchy::Build(labels);
}

TokenDistribution RandomDistribution(std::mt19937_64& rng, std::size_t n,
                                     const std::vector<TokenId>& zero_ids) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& x : p) sum += (x = e(rng));
  for (TokenId id : zero_ids) {
    sum -= p[static_cast<std::size_t>(id)];
    p[static_cast<std::size_t>(id)] = 0.0;
  }
  for (auto& x : p) x /= sum;
  return {p};
}

Vector RandomSimplex(std::mt19937_64& rng, std::size_t n) {
  auto d = RandomDistribution(rng, n);
  return Eigen::Map<Vector>(d.probs.data(), static_cast<Eigen::Index>(n));
}

Matrix RandomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                    double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

LabelHierarchy RandomHierarchy(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::string> paths;
  std::vector<std::string> parents;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = fmt::format("t{}", i);
    std::uniform_int_distribution<std::size_t> pick(0, parents.size());
    std::size_t j = parents.empty() ? 0 : pick(rng);
    std::string path = (j == 0 || parents.empty()) ? "/" + name
                                                   : parents[j - 1] + "/" + name;
    paths.push_back(path);
    if (LabelPath::Parse(path).depth() < 3) parents.push_back(path);
  }
  return Hierarchy(paths);
}

Matrix FiniteDifference(const Matrix& u, const Batch& b, const LabelHierarchy& h,
                        const LossWeights& w, double step) {
  Matrix g(u.rows(), u.cols());
  Matrix x = u;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      x(i, j) = u(i, j) + step;
      double up = TotalLoss(EvaluateLoss(x, b, h), w);
      x(i, j) = u(i, j) - step;
      double down = TotalLoss(EvaluateLoss(x, b, h), w);
      x(i, j) = u(i, j);
      g(i, j) = (up - down) / (2 * step);
    }
  }
  return g;
}

Batch RandomBatch(std::mt19937_64& rng, std::size_t labels, std::size_t vocab,
                  std::size_t n_labeled, std::size_t n_aug) {
  Batch b;
  std::uniform_int_distribution<std::size_t> gold(0, labels - 1);
  for (std::size_t i = 0; i < n_labeled; ++i) {
    b.labeled.push_back({RandomSimplex(rng, vocab), gold(rng)});
  }
  for (std::size_t i = 0; i < n_aug; ++i) {
    b.augmented.push_back({RandomSimplex(rng, vocab), RandomSimplex(rng, labels)});
  }
  return b;
}

std::vector<std::pair<LabelPath, LabelPath>> RandomPairs(
    std::mt19937_64& rng, const std::vector<LabelPath>& labels, std::size_t n,
    double exact_rate) {
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::bernoulli_distribution copy(exact_rate);
  std::vector<std::pair<LabelPath, LabelPath>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const LabelPath& gold = labels[pick(rng)];
    out.emplace_back(gold, copy(rng) ? gold : labels[pick(rng)]);
  }
  return out;
}

LabelHierarchy TwoLevelHierarchy(std::size_t roots, std::size_t children) {
  std::vector<std::string> paths;
  for (std::size_t r = 0; r < roots; ++r) {
    paths.push_back(fmt::format("/r{}", r));
    for (std::size_t c = 0; c < children; ++c) paths.push_back(fmt::format("/r{}/c{}", r, c));
  }
  return Hierarchy(paths);
}

namespace {

std::set<std::string> Prefixes(const LabelPath& l) {
  std::set<std::string> out;
  std::string acc;
  for (const auto& seg : l.segments()) {
    acc += "/" + seg;
    out.insert(acc);
  }
  return out;
}

double HarmonicF1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

ReferenceMetrics ComputeReferenceMetrics(
    const std::vector<std::pair<LabelPath, LabelPath>>& pairs) {
  double exact = 0, both = 0, npred = 0, ngold = 0, sp = 0, sr = 0;
  for (const auto& [gold, pred] : pairs) {
    const auto g = Prefixes(gold);
    const auto p = Prefixes(pred);
    double common = 0;
    for (const auto& x : p) common += g.count(x);
    exact += g == p;
    both += common;
    npred += p.size();
    ngold += g.size();
    sp += common / p.size();
    sr += common / g.size();
  }
  const double n = pairs.size();
  return {exact / n, HarmonicF1(both / npred, both / ngold), HarmonicF1(sp / n, sr / n)};
}

std::vector<Enumerated> EnumerateFills(MaskedLmProvider& provider,
                                       const RenderedPrompt& prompt, std::size_t k) {
  const Vocab& vocab = provider.vocab();
  std::vector<TokenId> ordinary;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (!vocab.is_special(static_cast<TokenId>(i))) ordinary.push_back(static_cast<TokenId>(i));
  }
  std::vector<Enumerated> out;
  std::vector<std::size_t> digit(k, 0);
  while (true) {
    std::vector<TokenId> ids;
    for (std::size_t d : digit) ids.push_back(ordinary[d]);
    double score = 0.0;
    bool alive = true;
    for (std::size_t i = 0; i < k && alive; ++i) {
      Fills filled;
      for (std::size_t j = 0; j < i; ++j) filled[prompt.mask_positions[j]] = ids[j];
      const auto dists = provider.MaskDistributions(prompt, filled);
      const auto& probs = dists.at(0).probs;
      double ordinary_mass = 0.0;
      for (TokenId t : ordinary) ordinary_mass += probs[static_cast<std::size_t>(t)];
      const double p = probs[static_cast<std::size_t>(ids[i])] / ordinary_mass;
      if (!(p > 0.0)) alive = false;
      score += std::log(p);
    }
    if (alive) out.push_back({ids, score});
    std::size_t pos = k;
    while (pos > 0 && ++digit[pos - 1] == ordinary.size()) digit[--pos] = 0;
    if (pos == 0) break;
  }
  std::sort(out.begin(), out.end(), [](const Enumerated& a, const Enumerated& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ids < b.ids;
  });
  return out;
}

SyntheticOracle RandomFillOracle(std::mt19937_64& rng, std::size_t ordinary,
                                 const RenderedPrompt& prompt, std::size_t k,
                                 double zero_rate) {
  std::vector<std::string> tokens{"[PAD]", "[MASK]"};
  for (std::size_t i = 0; i < ordinary; ++i) tokens.push_back(fmt::format("w{}", i));
  SyntheticOracle oracle(Vocab(tokens, "[MASK]", {0}));
  const std::size_t V = tokens.size();
  std::bernoulli_distribution zero(zero_rate);
  std::exponential_distribution<double> mass(1.0);
  auto random_dist = [&] {
    std::vector<double> p(V, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < V; ++i) {
      if (i == 1 || zero(rng)) continue;  // the mask itself never gets mass
      sum += (p[i] = mass(rng));
    }
    if (sum == 0.0) sum += (p[2] = 1.0);
    for (auto& x : p) x /= sum;
    return TokenDistribution{p};
  };
  // Prefixes over every token id, so fills of any ordinary token are tabled.
  std::vector<std::vector<TokenId>> prefixes{{}};
  for (std::size_t step = 0; step < k; ++step) {
    std::vector<std::vector<TokenId>> longer;
    for (const auto& pre : prefixes) {
      Fills filled;
      for (std::size_t j = 0; j < pre.size(); ++j) filled[prompt.mask_positions[j]] = pre[j];
      oracle.AddEntry(prompt.text, prompt.mask_positions[step], filled, random_dist());
      for (std::size_t t = 2; t < V; ++t) {
        auto next = pre;
        next.push_back(static_cast<TokenId>(t));
        longer.push_back(std::move(next));
      }
    }
    prefixes = std::move(longer);
  }
  return oracle;
}

ToyWorld::ToyWorld()
    : h(Hierarchy({"/animal", "/animal/dog", "/tool"})),
      oracle(SmallOracle({"animal", "dog", "tool", "rex", "fido", "spot", "hammer",
                          "saw", "drill", "cat", "wrench", "lion", "pliers", "sat",
                          "there"})) {
  const std::vector<std::array<std::string, 3>> rows = {
      {"t1", "cat", "/animal"},      {"t2", "rex", "/animal/dog"},
      {"t3", "hammer", "/tool"},     {"t4", "lion", "/animal"},
      {"t5", "fido", "/animal/dog"}, {"t6", "saw", "/tool"},
      {"d1", "spot", "/animal/dog"}, {"d2", "drill", "/tool"},
      {"d3", "wrench", "/tool"}};
  for (const auto& [id, word, label] : rows) {
    MentionExample ex{id, word + " sat there", 0, word.size(), LabelPath::Parse(label)};
    const std::string name = label.substr(label.rfind('/') + 1);
    const TokenId t = *oracle.vocab().find(name);
    oracle.AddTopEntry(RenderTyping(spec, ex.text, word).text, 0, {}, {{t, 0.5}});
    (id[0] == 't' ? train : dev).push_back(ex);
  }
}

TrainOptions ToyWorld::Options() const {
  TrainOptions o;
  o.hp.epochs = 6;
  o.hp.batch_size = 4;
  o.hp.instances = 2;
  o.hp.beam_width = 3;
  o.hp.lr = 0.05;
  o.seed = 5;
  return o;
}

void ToyWorld::WriteTo(const std::filesystem::path& dir) const {
  WriteFile(dir / "oracle.json", oracle.ToJson().dump());
  nlohmann::json hier = nlohmann::json::object();
  for (const auto& l : h.labels()) hier[l.str()] = nlohmann::json::array();
  WriteFile(dir / "hierarchy.json", hier.dump());
  WriteDataset((dir / "train.jsonl").string(), train);
  WriteDataset((dir / "dev.jsonl").string(), dev);
}

std::filesystem::path E2eFixtureDir() {
  return std::filesystem::path(FEWTYPE_SOURCE_DIR) / "fixtures" / "e2e";
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("fewtype-test-{}-{}", ::getpid(), counter++);
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace fewtype::testing
