#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rcdetect/errors.hpp"
#include "rcdetect/features.hpp"
#include "rcdetect/metrics.hpp"
#include "rcdetect/rng.hpp"
#include "rcdetect/traffic.hpp"

namespace rcdetect {

struct LabeledDataset {
  std::vector<FeatureRow> x;
  std::vector<Label> y;

  std::size_t size() const { return x.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x[0].size(); }

  void validate() const {
    if (x.size() != y.size())
      throw ShapeError("dataset has " + std::to_string(x.size()) + " rows but " +
                       std::to_string(y.size()) + " labels");
    for (const auto& r : x) {
      if (r.size() != dim()) throw ShapeError("inconsistent feature dimensions in dataset");
      for (double v : r)
        if (!std::isfinite(v)) throw ShapeError("non-finite feature value in dataset");
    }
  }
};

// ---------------------------------------------------------------------------
// Fixed linear threshold rule.

struct LinearDecisionRule {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.0;
};

// ATTACKED iff w.x + b > threshold, strictly: boundary points are NORMAL.
inline Label apply_linear_rule(const LinearDecisionRule& rule, const FeatureRow& x) {
  if (rule.weights.size() != x.size())
    throw ShapeError("rule has " + std::to_string(rule.weights.size()) +
                     " weights but input has " + std::to_string(x.size()));
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += rule.weights[j] * x[j];
  s += rule.bias;
  return s > rule.threshold ? Label::ATTACKED : Label::NORMAL;
}

// ---------------------------------------------------------------------------
// Decision tree (CART-style, Gini).

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double split = 0.0;    // x[feature] <= split goes left
  int32_t left = -1;
  int32_t right = -1;
  Label label = Label::NORMAL;
  uint64_t count_normal = 0;
  uint64_t count_attacked = 0;
};

struct TreeParams {
  uint32_t max_depth = 12;
  uint32_t min_leaf = 1;           // minimum samples on each side of a split
  uint32_t feature_subsample = 0;  // features tried per split; 0 = all
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Label predict(const FeatureRow& x) const {
    const TreeNode* n = &nodes.at(0);
    while (n->feature >= 0) {
      if (static_cast<std::size_t>(n->feature) >= x.size())
        throw ShapeError("tree splits on feature " + std::to_string(n->feature) +
                         " but input has " + std::to_string(x.size()));
      n = &nodes[x[n->feature] <= n->split ? n->left : n->right];
    }
    return n->label;
  }

  // Fraction of attacked training samples in the reached leaf; the tree's
  // decision score.
  double attacked_fraction(const FeatureRow& x) const {
    const TreeNode* n = &nodes.at(0);
    while (n->feature >= 0) n = &nodes[x[n->feature] <= n->split ? n->left : n->right];
    uint64_t total = n->count_normal + n->count_attacked;
    return total == 0 ? 0.0 : static_cast<double>(n->count_attacked) / static_cast<double>(total);
  }
};

namespace detail {

inline double gini(uint64_t n_normal, uint64_t n_attacked) {
  uint64_t n = n_normal + n_attacked;
  if (n == 0) return 0.0;
  double pn = static_cast<double>(n_normal) / static_cast<double>(n);
  double pa = static_cast<double>(n_attacked) / static_cast<double>(n);
  return 1.0 - pn * pn - pa * pa;
}

struct TreeBuilder {
  const LabeledDataset& data;
  const TreeParams& params;
  Rng& rng;
  std::vector<TreeNode> nodes;

  // Chooses which features a node may split on. Drawing happens even when
  // every feature is kept so the RNG stream does not depend on data values.
  std::vector<std::size_t> candidate_features() {
    std::size_t d = data.dim();
    std::size_t take = params.feature_subsample == 0
                           ? d
                           : std::min<std::size_t>(params.feature_subsample, d);
    std::vector<std::size_t> all(d);
    for (std::size_t j = 0; j < d; ++j) all[j] = j;
    if (take >= d) return all;
    // Partial Fisher-Yates: the first `take` entries form the sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.next_below(d - i));
      std::swap(all[i], all[j]);
    }
    all.resize(take);
    std::sort(all.begin(), all.end());  // deterministic tie-breaking order
    return all;
  }

  int32_t build(std::vector<std::size_t>& idx, uint32_t depth) {
    uint64_t n_norm = 0, n_att = 0;
    for (std::size_t i : idx) (data.y[i] == Label::ATTACKED ? n_att : n_norm)++;

    TreeNode leaf;
    leaf.count_normal = n_norm;
    leaf.count_attacked = n_att;
    leaf.label = n_att >= n_norm ? Label::ATTACKED : Label::NORMAL;

    bool pure = n_norm == 0 || n_att == 0;
    bool can_split = !pure && depth < params.max_depth &&
                     idx.size() >= 2 * static_cast<std::size_t>(params.min_leaf);
    if (!can_split) {
      nodes.push_back(leaf);
      return static_cast<int32_t>(nodes.size() - 1);
    }

    // Best (feature, midpoint) by weighted Gini; first candidate wins ties.
    auto features = candidate_features();
    double best_impurity = std::numeric_limits<double>::infinity();
    int32_t best_feature = -1;
    double best_split = 0.0;
    std::vector<std::pair<double, Label>> column(idx.size());
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < idx.size(); ++i)
        column[i] = {data.x[idx[i]][f], data.y[idx[i]]};
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      uint64_t left_norm = 0, left_att = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (column[i].second == Label::ATTACKED ? left_att : left_norm)++;
        if (column[i].first == column[i + 1].first) continue;  // not a boundary
        uint64_t nl = left_norm + left_att;
        uint64_t nr = idx.size() - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        double impurity =
            (static_cast<double>(nl) * gini(left_norm, left_att) +
             static_cast<double>(nr) * gini(n_norm - left_norm, n_att - left_att)) /
            static_cast<double>(idx.size());
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int32_t>(f);
          best_split = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
        }
      }
    }
    if (best_feature < 0) {  // no admissible boundary on any candidate feature
      nodes.push_back(leaf);
      return static_cast<int32_t>(nodes.size() - 1);
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx)
      (data.x[i][best_feature] <= best_split ? left_idx : right_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    TreeNode internal = leaf;
    internal.feature = best_feature;
    internal.split = best_split;
    nodes.push_back(internal);
    auto self = static_cast<int32_t>(nodes.size() - 1);
    nodes[self].left = build(left_idx, depth + 1);
    nodes[self].right = build(right_idx, depth + 1);
    return self;
  }
};

}  // namespace detail

inline DecisionTree train_decision_tree(const LabeledDataset& data, const TreeParams& params,
                                        Rng& rng) {
  data.validate();
  if (data.size() == 0) throw EmptyTrainingError("cannot grow a tree from an empty dataset");
  if (params.min_leaf == 0) throw ParamError("min_leaf must be at least 1");
  detail::TreeBuilder builder{data, params, rng, {}};
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Build into a scratch vector, then rotate the root to slot 0.
  int32_t root = builder.build(idx, 0);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  if (root != 0) std::swap(tree.nodes[0], tree.nodes[root]);  // unreachable with this builder
  return tree;
}

// ---------------------------------------------------------------------------
// Random forest (bagging).

struct ForestParams {
  uint32_t n_trees = 25;
  uint32_t max_depth = 12;
  uint32_t min_leaf = 1;
  uint32_t feature_subsample = 0;  // 0 = floor(sqrt(dim)), at least 1
};

struct RandomForest {
  std::vector<DecisionTree> trees;

  // Share of trees voting ATTACKED; 0.5 is the decision boundary.
  double vote_fraction(const FeatureRow& x) const {
    if (trees.empty()) throw ShapeError("forest has no trees");
    std::size_t votes = 0;
    for (const auto& t : trees)
      if (t.predict(x) == Label::ATTACKED) ++votes;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }

  // Majority vote; exact ties go to ATTACKED.
  Label predict(const FeatureRow& x) const {
    return vote_fraction(x) >= 0.5 ? Label::ATTACKED : Label::NORMAL;
  }
};

inline RandomForest train_random_forest(const LabeledDataset& data, const ForestParams& params,
                                        uint64_t seed) {
  data.validate();
  if (data.size() < 2) throw EmptyTrainingError("bagging needs at least 2 samples");
  if (params.n_trees == 0) throw ParamError("forest needs at least one tree");

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  tp.feature_subsample =
      params.feature_subsample != 0
          ? params.feature_subsample
          : std::max<uint32_t>(
                1, static_cast<uint32_t>(std::sqrt(static_cast<double>(data.dim()))));

  RandomForest forest;
  forest.trees.reserve(params.n_trees);
  for (uint32_t t = 0; t < params.n_trees; ++t) {
    // Each tree has its own stream, so training could be reordered or run in
    // parallel without changing the result.
    Rng rng(Rng::derive(seed, t));
    LabeledDataset boot;
    boot.x.reserve(data.size());
    boot.y.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto pick = static_cast<std::size_t>(rng.next_below(data.size()));
      boot.x.push_back(data.x[pick]);
      boot.y.push_back(data.y[pick]);
    }
    forest.trees.push_back(train_decision_tree(boot, tp, rng));
  }
  return forest;
}

// ---------------------------------------------------------------------------
// Soft-margin linear SVM, primal subgradient solver.

struct LinearSVM {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;
  uint32_t epochs = 0;
  // [0] is the objective of the zero model; [k] the best objective seen
  // through epoch k (the returned model is that best iterate, the standard
  // convention for subgradient methods, which are not descent methods).
  std::vector<double> epoch_objectives;

  double decision(const FeatureRow& x) const {
    if (x.size() != weights.size())
      throw ShapeError("margin input has " + std::to_string(x.size()) +
                       " values, model expects " + std::to_string(weights.size()));
    // Dot product first, bias added last: summation order is part of the
    // reproducibility contract.
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
    return s + bias;
  }

  Label predict(const FeatureRow& x) const {
    return decision(x) > 0.0 ? Label::ATTACKED : Label::NORMAL;
  }
};

// (1/2)|w|^2 + C * sum_i hinge(y_i * (w.x_i + b))
inline double svm_objective(const std::vector<double>& w, double b, const LabeledDataset& data,
                            double C) {
  double reg = 0.0;
  for (double wj : w) reg += wj * wj;
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double margin = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * data.x[i][j];
    margin += b;
    double ym = (data.y[i] == Label::ATTACKED ? 1.0 : -1.0) * margin;
    if (ym < 1.0) hinge += 1.0 - ym;
  }
  return 0.5 * reg + C * hinge;
}

// Expects standardized features. Per-sample subgradient steps with rate
// 1/(lambda*t), lambda = 1/(C*N); order reshuffled every epoch from the seed.
inline LinearSVM train_svm(const LabeledDataset& data, double C, uint32_t epochs,
                           uint64_t seed) {
  data.validate();
  if (data.size() == 0) throw EmptyTrainingError("cannot fit a margin to an empty dataset");
  if (!(C > 0)) throw ParamError("SVM C must be positive");
  if (epochs == 0) throw ParamError("SVM needs at least one epoch");
  bool has_a = false, has_n = false;
  for (Label l : data.y) (l == Label::ATTACKED ? has_a : has_n) = true;
  if (!has_a || !has_n)
    throw DegenerateTrainingError("margin training needs both classes present");

  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const double cn = C * static_cast<double>(n);

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  LinearSVM best;
  best.weights = w;
  best.bias = b;
  best.C = C;
  best.epochs = epochs;
  double best_obj = svm_objective(w, b, data, C);
  best.epoch_objectives.push_back(best_obj);

  Rng shuffler(Rng::derive(seed, 0xface));
  std::vector<std::size_t> order(n);
  uint64_t t = 0;
  for (uint32_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffler.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      double gamma = 1.0 / static_cast<double>(t);  // = lambda * (1/(lambda*t))
      double yi = data.y[i] == Label::ATTACKED ? 1.0 : -1.0;
      double margin = 0.0;
      for (std::size_t j = 0; j < d; ++j) margin += w[j] * data.x[i][j];
      margin += b;
      if (yi * margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j)
          w[j] = (1.0 - gamma) * w[j] + gamma * cn * yi * data.x[i][j];
        b += gamma * cn * yi;
      } else {
        for (std::size_t j = 0; j < d; ++j) w[j] = (1.0 - gamma) * w[j];
      }
      // Project onto the ball that must contain the optimum: the minimizer of
      // 0.5|w|^2 + C*sum(hinge) has |w|^2 <= 2*C*N (zero model bound), and the
      // classical subgradient analysis uses radius sqrt(C*N).  Without this
      // step the huge early iterates (gamma near 1) can park the trajectory so
      // far out that the 1/t decay never brings it back within any practical
      // epoch budget.  The bias is scaled with the weights so the decision
      // boundary keeps its position.  Summation order is part of the
      // reproducibility contract.
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) norm2 += w[j] * w[j];
      if (norm2 > cn) {
        double scale = std::sqrt(cn / norm2);
        for (std::size_t j = 0; j < d; ++j) w[j] *= scale;
        b *= scale;
      }
    }
    double obj = svm_objective(w, b, data, C);
    if (obj <= best_obj) {
      best_obj = obj;
      best.weights = w;
      best.bias = b;
    }
    best.epoch_objectives.push_back(best_obj);
  }
  return best;
}

// ---------------------------------------------------------------------------
// K-nearest-neighbors.

struct KnnModel {
  uint32_t k = 5;
  std::vector<FeatureRow> x;  // standardized training rows
  std::vector<Label> y;

  Label predict(const FeatureRow& probe) const {
    if (!x.empty() && probe.size() != x[0].size())
      throw ShapeError("probe dimension mismatch");
    // (squared distance, index): index order breaks distance ties.
    std::vector<std::pair<double, std::size_t>> dist(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < probe.size(); ++j) {
        double dv = probe[j] - x[i][j];
        d2 += dv * dv;
      }
      dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    uint32_t att = 0;
    for (uint32_t i = 0; i < k; ++i)
      if (y[dist[i].second] == Label::ATTACKED) ++att;
    return 2 * att > k ? Label::ATTACKED : Label::NORMAL;  // k odd: never equal
  }

  double attacked_share(const FeatureRow& probe) const {
    std::vector<std::pair<double, std::size_t>> dist(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < probe.size(); ++j) {
        double dv = probe[j] - x[i][j];
        d2 += dv * dv;
      }
      dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    uint32_t att = 0;
    for (uint32_t i = 0; i < k; ++i)
      if (y[dist[i].second] == Label::ATTACKED) ++att;
    return static_cast<double>(att) / static_cast<double>(k);
  }
};

inline KnnModel train_knn(const LabeledDataset& data, uint32_t k) {
  data.validate();
  if (data.size() == 0) throw EmptyTrainingError("no neighbors to store");
  if (k % 2 == 0) throw ParamError("neighbor count must be odd to avoid vote ties");
  if (k > data.size())
    throw ParamError("neighbor count " + std::to_string(k) + " exceeds dataset size " +
                     std::to_string(data.size()));
  KnnModel m;
  m.k = k;
  m.x = data.x;
  m.y = data.y;
  return m;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes.

struct NbModel {
  // Index 0 = NORMAL, 1 = ATTACKED.
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;  // floored

  double log_likelihood(std::size_t cls, const FeatureRow& x) const {
    double ll = log_prior[cls];
    for (std::size_t j = 0; j < x.size(); ++j) {
      double v = variance[cls][j];
      double dv = x[j] - mean[cls][j];
      ll += -0.5 * std::log(2.0 * std::numbers::pi * v) - dv * dv / (2.0 * v);
    }
    return ll;
  }

  Label predict(const FeatureRow& x) const {
    if (x.size() != mean[0].size()) throw ShapeError("probe dimension mismatch");
    // >= : exact ties resolve to ATTACKED.
    return log_likelihood(1, x) >= log_likelihood(0, x) ? Label::ATTACKED : Label::NORMAL;
  }

  double log_odds(const FeatureRow& x) const {
    return log_likelihood(1, x) - log_likelihood(0, x);
  }
};

inline NbModel train_nb(const LabeledDataset& data, double variance_floor = 1e-9) {
  data.validate();
  if (data.size() == 0) throw EmptyTrainingError("cannot fit class densities to nothing");
  const std::size_t d = data.dim();
  NbModel m;
  std::array<uint64_t, 2> count{};
  for (std::size_t c = 0; c < 2; ++c) {
    m.mean[c].assign(d, 0.0);
    m.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t c = data.y[i] == Label::ATTACKED ? 1 : 0;
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += data.x[i][j];
  }
  for (std::size_t c = 0; c < 2; ++c) {
    if (count[c] == 0) {
      // Absent class: prior 0 (log -inf) makes it unreachable; densities inert.
      m.log_prior[c] = -std::numeric_limits<double>::infinity();
      m.variance[c].assign(d, 1.0);
      continue;
    }
    m.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(data.size()));
    for (std::size_t j = 0; j < d; ++j) m.mean[c][j] /= static_cast<double>(count[c]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t c = data.y[i] == Label::ATTACKED ? 1 : 0;
    for (std::size_t j = 0; j < d; ++j) {
      double dv = data.x[i][j] - m.mean[c][j];
      m.variance[c][j] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    if (count[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      m.variance[c][j] /= static_cast<double>(count[c]);
      if (m.variance[c][j] < variance_floor) m.variance[c][j] = variance_floor;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Unified trained-model wrapper.

enum class ModelKind : uint8_t { DT, RF, SVM, KNN, NB };
enum class ModelProtocol : uint8_t { TCP, UDP, GENERAL };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::DT: return "dt";
    case ModelKind::RF: return "rf";
    case ModelKind::SVM: return "svm";
    case ModelKind::KNN: return "knn";
    default: return "nb";
  }
}

inline const char* to_string(ModelProtocol p) {
  switch (p) {
    case ModelProtocol::TCP: return "tcp";
    case ModelProtocol::UDP: return "udp";
    default: return "general";
  }
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "dt") return ModelKind::DT;
  if (s == "rf") return ModelKind::RF;
  if (s == "svm") return ModelKind::SVM;
  if (s == "knn") return ModelKind::KNN;
  if (s == "nb") return ModelKind::NB;
  throw ParseError("unknown model kind \"" + s + "\"");
}

inline ModelProtocol model_protocol_from_string(const std::string& s) {
  if (s == "tcp") return ModelProtocol::TCP;
  if (s == "udp") return ModelProtocol::UDP;
  if (s == "general") return ModelProtocol::GENERAL;
  throw ParseError("unknown model protocol \"" + s + "\"");
}

struct ModelSpec {
  ModelKind kind = ModelKind::RF;
  uint32_t n_trees = 25;
  uint32_t max_depth = 12;
  uint32_t min_leaf = 1;
  uint32_t feature_subsample = 0;
  double C = 1.0;
  uint32_t epochs = 50;
  uint32_t k = 5;
};

// A model plus the preprocessing it was trained with. predict() takes raw
// (unstandardized) feature rows.
struct TrainedModel {
  ModelKind kind = ModelKind::RF;
  ModelProtocol protocol = ModelProtocol::GENERAL;
  StandardizationParams standardization;
  std::variant<DecisionTree, RandomForest, LinearSVM, KnnModel, NbModel> model;

  Label predict(const FeatureRow& raw) const {
    FeatureRow x = standardization.apply(raw);
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
  }

  // Real-valued decision score, larger = more attack-like. The natural scale
  // differs per kind (margin, vote share, leaf fraction, log-odds).
  double score(const FeatureRow& raw) const {
    FeatureRow x = standardization.apply(raw);
    if (const auto* svm = std::get_if<LinearSVM>(&model)) return svm->decision(x);
    if (const auto* rf = std::get_if<RandomForest>(&model)) return rf->vote_fraction(x);
    if (const auto* dt = std::get_if<DecisionTree>(&model)) return dt->attacked_fraction(x);
    if (const auto* knn = std::get_if<KnnModel>(&model)) return knn->attacked_share(x);
    return std::get<NbModel>(model).log_odds(x);
  }

  std::vector<Label> predict_all(const std::vector<FeatureRow>& raws) const {
    std::vector<Label> out;
    out.reserve(raws.size());
    for (const auto& r : raws) out.push_back(predict(r));
    return out;
  }
};

inline TrainedModel train_model(const LabeledDataset& raw, const ModelSpec& spec,
                                ModelProtocol protocol, uint64_t seed) {
  raw.validate();
  if (raw.size() < 2) throw EmptyTrainingError("model training needs at least 2 samples");
  TrainedModel tm;
  tm.kind = spec.kind;
  tm.protocol = protocol;
  tm.standardization = learn_standardization(raw.x);
  LabeledDataset data;
  data.x = apply_standardization(tm.standardization, raw.x);
  data.y = raw.y;

  switch (spec.kind) {
    case ModelKind::DT: {
      TreeParams tp{spec.max_depth, spec.min_leaf, spec.feature_subsample};
      Rng rng(Rng::derive(seed, 0x7ee));
      tm.model = train_decision_tree(data, tp, rng);
      break;
    }
    case ModelKind::RF: {
      ForestParams fp{spec.n_trees, spec.max_depth, spec.min_leaf, spec.feature_subsample};
      tm.model = train_random_forest(data, fp, seed);
      break;
    }
    case ModelKind::SVM:
      tm.model = train_svm(data, spec.C, spec.epochs, seed);
      break;
    case ModelKind::KNN:
      tm.model = train_knn(data, spec.k);
      break;
    case ModelKind::NB:
      tm.model = train_nb(data);
      break;
  }
  return tm;
}

// ---------------------------------------------------------------------------
// Data splitting and model selection.

// K disjoint folds covering {0..n-1}, sizes differing by at most 1, over a
// seeded permutation.
inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                         uint64_t seed) {
  if (k < 2) throw ParamError("cross-validation needs at least 2 folds");
  if (k > n)
    throw ParamError("cannot make " + std::to_string(k) + " folds from " + std::to_string(n) +
                     " samples");
  Rng rng(Rng::derive(seed, 0xf01d));
  std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t base = n / k;
  std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t take = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + take);
    pos += take;
  }
  return folds;
}

// Index of the candidate scoring highest on the validation set under the
// given criterion; earlier candidate wins ties. UNDEFINED scores lose to any
// defined score.
inline std::size_t select_best_model(const std::vector<TrainedModel>& candidates,
                                     const LabeledDataset& validation,
                                     const std::string& criterion) {
  if (candidates.empty()) throw ParamError("no candidate models to select from");
  if (validation.size() == 0) throw ParamError("model selection needs a validation set");
  validation.validate();
  if (criterion != "accuracy" && criterion != "pod" && criterion != "f1")
    throw ParamError("unknown selection criterion \"" + criterion +
                     "\" (expected accuracy, pod, or f1)");

  std::optional<Ratio> best_score;
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ConfusionMatrix m = confusion(candidates[c].predict_all(validation.x), validation.y);
    std::optional<Ratio> s;
    if (criterion == "accuracy")
      s = core_metrics(m).acc;
    else if (criterion == "pod")
      s = probability_metrics(m).p_d;
    else
      s = prf1(m).f1;
    if (s && (!best_score || *s > *best_score)) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

}  // namespace rcdetect
