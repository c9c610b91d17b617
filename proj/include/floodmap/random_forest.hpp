/* Copyright 2026 The floodmap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Random Forest of binary CART trees with Gini splits.
//
// Trees are grown from per-feature presorted sample orders: every node owns
// the same contiguous range in each feature's order, and a split stably
// partitions those ranges. Split quality is compared in exact integer
// arithmetic so the chosen split never depends on rounding, and every tree
// draws from its own generator seeded by mix_seed(seed, tree_index).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodmap/error.hpp"
#include "floodmap/parallel.hpp"
#include "floodmap/random.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

/// n x f feature matrix (row-major) with optional {0,1} labels. NaN rows are
/// rejected: nodata pixels must be filtered before assembly.
class SampleMatrix {
 public:
  SampleMatrix() = default;

  SampleMatrix(std::size_t n, std::size_t f, std::vector<float> features, std::vector<std::uint8_t> labels = {})
      : n_(n), f_(f), features_(std::move(features)), labels_(std::move(labels)) {
    if (f_ == 0) fail(Errc::kShape, "sample matrix needs at least one feature");
    if (features_.size() != n_ * f_) fail(Errc::kShape, "feature buffer size differs from n*f");
    if (!labels_.empty() && labels_.size() != n_) fail(Errc::kShape, "label count differs from sample count");
    for (float v : features_)
      if (!std::isfinite(v)) fail(Errc::kValue, "sample matrix contains a non-finite feature value");
    for (auto l : labels_)
      if (l > 1) fail(Errc::kValue, "labels must be 0 or 1");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t f() const noexcept { return f_; }
  bool has_labels() const noexcept { return !labels_.empty(); }

  float at(std::size_t i, std::size_t j) const noexcept { return features_[i * f_ + j]; }
  std::span<const float> row(std::size_t i) const noexcept { return {features_.data() + i * f_, f_}; }
  std::uint8_t label(std::size_t i) const noexcept { return labels_[i]; }
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }
  std::span<const float> features() const noexcept { return features_; }

 private:
  std::size_t n_ = 0;
  std::size_t f_ = 0;
  std::vector<float> features_;
  std::vector<std::uint8_t> labels_;
};

// ---------------------------------------------------------------------------
// Impurity and split search
// ---------------------------------------------------------------------------

inline double gini_impurity(std::uint64_t n0, std::uint64_t n1) {
  const std::uint64_t n = n0 + n1;
  if (n == 0) fail(Errc::kEmptyNode, "Gini impurity of an empty node");
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

/// Weighted Gini decrease g(P) - (nL/n) g(L) - (nR/n) g(R).
inline double gini_decrease(std::uint64_t l0, std::uint64_t l1, std::uint64_t r0, std::uint64_t r1) {
  const double nl = static_cast<double>(l0 + l1);
  const double nr = static_cast<double>(r0 + r1);
  const double n = nl + nr;
  return gini_impurity(l0 + r0, l1 + r1) - nl / n * gini_impurity(l0, l1) - nr / n * gini_impurity(r0, r1);
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

namespace rf_detail {

using i128 = __int128;

/// Split score Q = (l0^2 + l1^2)/nL + (r0^2 + r1^2)/nR held as an exact
/// fraction. For a fixed parent, the Gini decrease is strictly increasing in Q.
struct Score {
  i128 num = 0;
  i128 den = 1;

  static Score of(std::uint64_t l0, std::uint64_t l1, std::uint64_t r0, std::uint64_t r1) {
    const i128 nl = static_cast<i128>(l0) + l1;
    const i128 nr = static_cast<i128>(r0) + r1;
    const i128 sl = static_cast<i128>(l0) * l0 + static_cast<i128>(l1) * l1;
    const i128 sr = static_cast<i128>(r0) * r0 + static_cast<i128>(r1) * r1;
    return {sl * nr + sr * nl, nl * nr};
  }

  bool greater_than(const Score& o) const { return num * o.den > o.num * den; }

  /// True when the split lowers the parent's impurity at all.
  bool improves(std::uint64_t p0, std::uint64_t p1) const {
    const i128 n = static_cast<i128>(p0) + p1;
    const i128 sp = static_cast<i128>(p0) * p0 + static_cast<i128>(p1) * p1;
    return num * n > sp * den;
  }
};

/// Weighted totals must keep Score products inside 128 bits (n^5 < 2^127).
inline constexpr std::uint64_t kMaxWeightedSamples = 40'000'000;

/// Running best split across features, scanned in ascending feature order
/// and ascending threshold order; only strictly better candidates replace.
struct BestSplit {
  bool found = false;
  Split split;
  Score score;
  std::uint64_t left0 = 0, left1 = 0;

  void offer(std::size_t feature, double threshold, std::uint64_t l0, std::uint64_t l1, std::uint64_t r0,
             std::uint64_t r1) {
    Score s = Score::of(l0, l1, r0, r1);
    if (!s.improves(l0 + r0, l1 + r1)) return;
    if (found && !s.greater_than(score)) return;
    found = true;
    score = s;
    split = {feature, threshold, gini_decrease(l0, l1, r0, r1)};
    left0 = l0;
    left1 = l1;
  }
};

/// Scans one feature given samples in ascending value order.
/// value(k), label(k), weight(k) address the k-th sample of that order.
template <class Value, class Label, class Weight>
void scan_feature(std::size_t feature, std::size_t count, std::uint64_t total0, std::uint64_t total1,
                  std::uint64_t min_leaf, Value&& value, Label&& label, Weight&& weight, BestSplit& best) {
  std::uint64_t l0 = 0, l1 = 0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const std::uint64_t w = weight(k);
    if (label(k) == 0)
      l0 += w;
    else
      l1 += w;
    const float a = value(k);
    const float b = value(k + 1);
    if (!(a < b)) continue;
    const std::uint64_t r0 = total0 - l0;
    const std::uint64_t r1 = total1 - l1;
    if (l0 + l1 < min_leaf || r0 + r1 < min_leaf) continue;
    // float + float is exact in double, so a <= mid < b always holds
    const double mid = (static_cast<double>(a) + static_cast<double>(b)) * 0.5;
    best.offer(feature, mid, l0, l1, r0, r1);
  }
}

}  // namespace rf_detail

/// Best CART split over the candidate features, at midpoints between
/// consecutive distinct values. Returns nullopt when no split strictly lowers
/// the impurity (or every split violates min_samples_leaf).
inline std::optional<Split> best_split(const SampleMatrix& samples, std::vector<std::size_t> candidate_features,
                                       std::uint64_t min_samples_leaf = 1) {
  if (!samples.has_labels()) fail(Errc::kValue, "best_split needs labelled samples");
  std::sort(candidate_features.begin(), candidate_features.end());
  std::uint64_t t0 = 0, t1 = 0;
  for (auto l : samples.labels()) (l == 0 ? t0 : t1)++;
  rf_detail::BestSplit best;
  std::vector<std::uint32_t> order(samples.n());
  for (std::size_t feat : candidate_features) {
    if (feat >= samples.f()) fail(Errc::kShape, "candidate feature index out of range");
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return samples.at(a, feat) < samples.at(b, feat); });
    rf_detail::scan_feature(
        feat, order.size(), t0, t1, min_samples_leaf, [&](std::size_t k) { return samples.at(order[k], feat); },
        [&](std::size_t k) { return samples.label(order[k]); }, [](std::size_t) { return std::uint64_t{1}; }, best);
  }
  if (!best.found) return std::nullopt;
  return best.split;
}

// ---------------------------------------------------------------------------
// Trees and forests
// ---------------------------------------------------------------------------

struct ForestParams {
  int n_trees = 100;
  std::optional<int> mtry;  // defaults to floor(sqrt(f))
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  std::optional<int> max_depth;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  int resolved_mtry(std::size_t f) const {
    return mtry ? *mtry : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(f)))));
  }
};

/// Flat tree node. Leaves have feature == -1; counts are weighted class
/// counts of the training samples that reached the node.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint8_t cls = 0;
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary decision tree stored in preorder; node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) fail(Errc::kFormat, "tree has no nodes");
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  std::uint8_t predict(std::span<const float> row) const {
    std::int32_t i = 0;
    for (;;) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
      if (node.is_leaf()) return node.cls;
      i = static_cast<double>(row[static_cast<std::size_t>(node.feature)]) <= node.threshold ? node.left : node.right;
    }
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      const auto& node = nodes_[static_cast<std::size_t>(i)];
      if (!node.is_leaf()) {
        stack.push_back({node.left, d + 1});
        stack.push_back({node.right, d + 1});
      }
    }
    return best;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, ForestParams params, std::vector<double> importances,
         std::vector<std::string> feature_names)
      : trees_(std::move(trees)),
        params_(params),
        importances_(std::move(importances)),
        feature_names_(std::move(feature_names)) {
    if (trees_.empty()) fail(Errc::kValue, "forest has no trees");
    if (importances_.size() != feature_names_.size()) fail(Errc::kShape, "importances and feature names differ in length");
  }

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const ForestParams& params() const noexcept { return params_; }
  const std::vector<double>& importances() const noexcept { return importances_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  std::size_t feature_count() const noexcept { return feature_names_.size(); }

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& j);

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
  std::vector<double> importances_;
  std::vector<std::string> feature_names_;
};

namespace rf_detail {

/// Column copies and per-feature (value, index) sort orders shared by all trees.
struct Presorted {
  std::vector<std::vector<float>> columns;
  std::vector<std::vector<std::uint32_t>> order;

  explicit Presorted(const SampleMatrix& s) : columns(s.f()), order(s.f()) {
    for (std::size_t j = 0; j < s.f(); ++j) {
      auto& col = columns[j];
      col.resize(s.n());
      for (std::size_t i = 0; i < s.n(); ++i) col[i] = s.at(i, j);
      auto& ord = order[j];
      ord.resize(s.n());
      std::iota(ord.begin(), ord.end(), 0u);
      std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
        return col[a] < col[b] || (col[a] == col[b] && a < b);
      });
    }
  }
};

struct TreeResult {
  DecisionTree tree;
  std::vector<double> importance;  // raw, n_node/n_total weighted decreases
};

inline TreeResult grow_tree(const SampleMatrix& samples, const Presorted& pre, const ForestParams& params,
                            std::size_t tree_index) {
  const std::size_t n = samples.n();
  const std::size_t f = samples.f();
  const auto mtry = static_cast<std::size_t>(params.resolved_mtry(f));
  Rng rng = make_rng(params.seed, tree_index);

  std::vector<std::uint32_t> weight(n, 0);
  if (params.bootstrap) {
    for (std::size_t k = 0; k < n; ++k) weight[uniform_index(rng, n)]++;
  } else {
    std::fill(weight.begin(), weight.end(), 1u);
  }

  // Active samples in each feature's sorted order.
  std::vector<std::vector<std::uint32_t>> order(f);
  for (std::size_t j = 0; j < f; ++j) {
    order[j].reserve(n);
    for (auto i : pre.order[j])
      if (weight[i] > 0) order[j].push_back(i);
  }
  const std::size_t active = order[0].size();
  std::uint64_t total_weight = 0;
  for (auto w : weight) total_weight += w;

  const auto labels = samples.labels();
  std::vector<std::uint8_t> goes_left(n, 0);
  std::vector<std::uint32_t> scratch(active);
  std::vector<std::size_t> features(f);

  std::vector<TreeNode> nodes;
  std::vector<double> importance(f, 0.0);

  struct Pending {
    std::size_t begin, end, depth;
    std::int32_t parent;
    bool is_left;
  };
  std::vector<Pending> stack{{0, active, 0, -1, false}};

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();

    const auto id = static_cast<std::int32_t>(nodes.size());
    if (job.parent >= 0) {
      auto& parent = nodes[static_cast<std::size_t>(job.parent)];
      (job.is_left ? parent.left : parent.right) = id;
    }

    TreeNode node;
    const auto& base = order[0];
    for (std::size_t k = job.begin; k < job.end; ++k) {
      const auto i = base[k];
      (labels[i] == 0 ? node.n0 : node.n1) += weight[i];
    }
    node.cls = node.n1 > node.n0 ? 1 : 0;
    nodes.push_back(node);

    const std::uint64_t node_weight = node.n0 + node.n1;
    const bool pure = node.n0 == 0 || node.n1 == 0;
    const bool too_small = node_weight < static_cast<std::uint64_t>(std::max(params.min_samples_split, 2));
    const bool too_deep = params.max_depth && job.depth >= static_cast<std::size_t>(*params.max_depth);
    if (pure || too_small || too_deep) continue;

    // mtry distinct features via a partial Fisher-Yates shuffle.
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t k = 0; k < mtry; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(uniform_index(rng, f - k));
      std::swap(features[k], features[pick]);
    }
    std::vector<std::size_t> candidates(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(mtry));
    std::sort(candidates.begin(), candidates.end());

    BestSplit best;
    for (std::size_t feat : candidates) {
      const auto& ord = order[feat];
      const auto& col = pre.columns[feat];
      const std::size_t b = job.begin;
      scan_feature(
          feat, job.end - job.begin, node.n0, node.n1, static_cast<std::uint64_t>(std::max(params.min_samples_leaf, 1)),
          [&](std::size_t k) { return col[ord[b + k]]; }, [&](std::size_t k) { return labels[ord[b + k]]; },
          [&](std::size_t k) { return static_cast<std::uint64_t>(weight[ord[b + k]]); }, best);
    }
    if (!best.found) continue;

    auto& stored = nodes[static_cast<std::size_t>(id)];
    stored.feature = static_cast<std::int32_t>(best.split.feature);
    stored.threshold = best.split.threshold;
    importance[best.split.feature] +=
        static_cast<double>(node_weight) / static_cast<double>(total_weight) * best.split.impurity_decrease;

    const auto& split_col = pre.columns[best.split.feature];
    std::size_t left_count = 0;
    for (std::size_t k = job.begin; k < job.end; ++k) {
      const auto i = base[k];
      goes_left[i] = static_cast<double>(split_col[i]) <= best.split.threshold ? 1 : 0;
      left_count += goes_left[i];
    }
    for (std::size_t j = 0; j < f; ++j) {
      auto& ord = order[j];
      std::size_t l = 0, r = left_count;
      for (std::size_t k = job.begin; k < job.end; ++k) {
        const auto i = ord[k];
        scratch[goes_left[i] ? l++ : r++] = i;
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(job.end - job.begin),
                ord.begin() + static_cast<std::ptrdiff_t>(job.begin));
    }
    const std::size_t mid = job.begin + left_count;
    stack.push_back({mid, job.end, job.depth + 1, id, false});
    stack.push_back({job.begin, mid, job.depth + 1, id, true});
  }
  return {DecisionTree(std::move(nodes)), std::move(importance)};
}

}  // namespace rf_detail

inline std::vector<std::string> default_feature_names(std::size_t f) {
  if (f == canonical_feature_bands().size()) {
    std::vector<std::string> names;
    for (const auto& b : canonical_feature_bands()) names.push_back(b.to_string());
    return names;
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < f; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

/// Trains the forest. Output is identical for any thread count.
inline Forest fit_forest(const SampleMatrix& samples, ForestParams params, unsigned threads = 1,
                         std::vector<std::string> feature_names = {}) {
  if (!samples.has_labels()) fail(Errc::kValue, "training samples need labels");
  if (samples.n() < 2) fail(Errc::kDegenerateTraining, "need at least two samples");
  if (params.n_trees < 1) fail(Errc::kValue, "n_trees must be >= 1");
  const int mtry = params.resolved_mtry(samples.f());
  if (mtry < 1 || static_cast<std::size_t>(mtry) > samples.f()) fail(Errc::kValue, "mtry must lie in [1, f]");
  params.mtry = mtry;
  if (params.min_samples_leaf < 1 || params.min_samples_split < 1) fail(Errc::kValue, "min_samples_* must be >= 1");
  if (params.max_depth && *params.max_depth < 0) fail(Errc::kValue, "max_depth must be non-negative");
  if (samples.n() > rf_detail::kMaxWeightedSamples) fail(Errc::kValue, "too many training samples");
  std::size_t ones = 0;
  for (auto l : samples.labels()) ones += l;
  if (ones == 0 || ones == samples.n()) fail(Errc::kDegenerateTraining, "training labels contain a single class");
  if (feature_names.empty()) feature_names = default_feature_names(samples.f());
  if (feature_names.size() != samples.f()) fail(Errc::kShape, "feature name count differs from feature count");

  const rf_detail::Presorted pre(samples);
  std::vector<rf_detail::TreeResult> results(static_cast<std::size_t>(params.n_trees));
  parallel_for(results.size(), resolve_threads(threads),
               [&](std::size_t t) { results[t] = rf_detail::grow_tree(samples, pre, params, t); });

  std::vector<DecisionTree> trees;
  std::vector<double> importance(samples.f(), 0.0);
  for (auto& r : results) {
    for (std::size_t j = 0; j < importance.size(); ++j) importance[j] += r.importance[j];
    trees.push_back(std::move(r.tree));
  }
  double sum = 0.0;
  for (auto& v : importance) {
    v /= static_cast<double>(params.n_trees);
    sum += v;
  }
  if (sum > 0.0) {
    for (auto& v : importance) v /= sum;
  } else {
    std::fill(importance.begin(), importance.end(), 1.0 / static_cast<double>(importance.size()));
  }
  return Forest(std::move(trees), params, std::move(importance), std::move(feature_names));
}

struct ForestPrediction {
  std::vector<std::uint8_t> labels;
  std::vector<double> vote_fraction;
};

/// Majority vote: label 1 only when strictly more than half the trees say 1.
inline ForestPrediction predict_forest(const Forest& forest, const SampleMatrix& samples, unsigned threads = 1) {
  if (samples.f() != forest.feature_count())
    fail(Errc::kShape, "forest expects " + std::to_string(forest.feature_count()) + " features, samples have " +
                           std::to_string(samples.f()));
  ForestPrediction out;
  out.labels.resize(samples.n());
  out.vote_fraction.resize(samples.n());
  const std::size_t n_trees = forest.trees().size();
  parallel_chunks(samples.n(), resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t votes = 0;
      for (const auto& tree : forest.trees()) votes += tree.predict(samples.row(i));
      out.labels[i] = 2 * votes > n_trees ? 1 : 0;
      out.vote_fraction[i] = static_cast<double>(votes) / static_cast<double>(n_trees);
    }
  });
  return out;
}

/// Per-pixel prediction over a feature stack. Pixels with any NaN band are nodata.
inline Mask predict_raster(const Forest& forest, const Raster& stack, unsigned threads = 1) {
  if (stack.band_count() != forest.feature_count())
    fail(Errc::kShape, "forest expects " + std::to_string(forest.feature_count()) + " bands, stack has " +
                           std::to_string(stack.band_count()));
  const std::size_t f = stack.band_count();
  const std::size_t n = stack.width() * stack.height();
  const std::size_t n_trees = forest.trees().size();
  std::vector<std::uint8_t> out(n);
  parallel_chunks(n, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    std::vector<float> row(f);
    for (std::size_t i = begin; i < end; ++i) {
      bool nodata = false;
      for (std::size_t j = 0; j < f; ++j) {
        row[j] = stack.band(j)[i];
        nodata = nodata || std::isnan(row[j]);
      }
      if (nodata) {
        out[i] = kMaskNoData;
        continue;
      }
      std::size_t votes = 0;
      for (const auto& tree : forest.trees()) votes += tree.predict(row);
      out[i] = 2 * votes > n_trees ? kMaskFlood : kMaskDry;
    }
  });
  return Mask(stack.width(), stack.height(), std::move(out));
}

inline std::vector<std::pair<std::string, double>> feature_importance(const Forest& forest) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < forest.feature_count(); ++j)
    out.emplace_back(forest.feature_names()[j], forest.importances()[j]);
  return out;
}

/// Gathers labelled samples for the given pixel indices of a stack + mask.
/// Pixels that are nodata in either input are skipped.
inline SampleMatrix samples_from_pixels(const Raster& stack, const Mask* labels, std::span<const std::size_t> pixels) {
  const std::size_t f = stack.band_count();
  std::vector<float> feats;
  std::vector<std::uint8_t> lab;
  feats.reserve(pixels.size() * f);
  if (labels) lab.reserve(pixels.size());
  for (std::size_t p : pixels) {
    if (labels && (*labels)[p] == kMaskNoData) continue;
    bool nodata = false;
    for (std::size_t j = 0; j < f; ++j) nodata = nodata || std::isnan(stack.band(j)[p]);
    if (nodata) continue;
    for (std::size_t j = 0; j < f; ++j) feats.push_back(stack.band(j)[p]);
    if (labels) lab.push_back((*labels)[p]);
  }
  const std::size_t n = feats.size() / f;
  return SampleMatrix(n, f, std::move(feats), std::move(lab));
}

// ---------------------------------------------------------------------------
// forest.json
// ---------------------------------------------------------------------------

namespace rf_detail {

inline nlohmann::json node_json(const std::vector<TreeNode>& nodes, std::int32_t i) {
  const TreeNode& n = nodes[static_cast<std::size_t>(i)];
  nlohmann::json j;
  j["counts"] = {n.n0, n.n1};
  if (n.is_leaf()) {
    j["kind"] = "leaf";
    j["class"] = n.cls;
  } else {
    j["kind"] = "internal";
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = node_json(nodes, n.left);
    j["right"] = node_json(nodes, n.right);
  }
  return j;
}

inline void parse_node(const nlohmann::json& j, std::vector<TreeNode>& nodes, std::size_t f) {
  TreeNode n;
  const auto& counts = j.at("counts");
  n.n0 = counts.at(0).get<std::uint64_t>();
  n.n1 = counts.at(1).get<std::uint64_t>();
  const auto kind = j.at("kind").get<std::string>();
  const std::size_t id = nodes.size();
  if (kind == "leaf") {
    n.cls = j.at("class").get<std::uint8_t>();
    if (n.cls > 1) fail(Errc::kFormat, "leaf class must be 0 or 1");
    nodes.push_back(n);
    return;
  }
  if (kind != "internal") fail(Errc::kFormat, "unknown node kind '" + kind + "'");
  n.feature = j.at("feature").get<std::int32_t>();
  if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= f) fail(Errc::kFormat, "node feature out of range");
  n.threshold = j.at("threshold").get<double>();
  n.cls = n.n1 > n.n0 ? 1 : 0;
  nodes.push_back(n);
  nodes[id].left = static_cast<std::int32_t>(nodes.size());
  parse_node(j.at("left"), nodes, f);
  nodes[id].right = static_cast<std::int32_t>(nodes.size());
  parse_node(j.at("right"), nodes, f);
}

}  // namespace rf_detail

inline nlohmann::json Forest::to_json() const {
  nlohmann::json j;
  nlohmann::json p;
  p["n_trees"] = params_.n_trees;
  p["mtry"] = params_.mtry ? nlohmann::json(*params_.mtry) : nlohmann::json(nullptr);
  p["min_samples_split"] = params_.min_samples_split;
  p["min_samples_leaf"] = params_.min_samples_leaf;
  p["max_depth"] = params_.max_depth ? nlohmann::json(*params_.max_depth) : nlohmann::json(nullptr);
  p["bootstrap"] = params_.bootstrap;
  p["seed"] = params_.seed;
  j["params"] = p;
  j["feature_names"] = feature_names_;
  j["importances"] = importances_;
  j["trees"] = nlohmann::json::array();
  for (const auto& t : trees_) j["trees"].push_back(rf_detail::node_json(t.nodes(), 0));
  return j;
}

inline Forest Forest::from_json(const nlohmann::json& j) {
  try {
    ForestParams params;
    const auto& p = j.at("params");
    params.n_trees = p.at("n_trees").get<int>();
    if (!p.at("mtry").is_null()) params.mtry = p.at("mtry").get<int>();
    params.min_samples_split = p.at("min_samples_split").get<int>();
    params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    if (!p.at("max_depth").is_null()) params.max_depth = p.at("max_depth").get<int>();
    params.bootstrap = p.at("bootstrap").get<bool>();
    params.seed = p.at("seed").get<std::uint64_t>();
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    auto importances = j.at("importances").get<std::vector<double>>();
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      rf_detail::parse_node(t, nodes, names.size());
      trees.emplace_back(std::move(nodes));
    }
    if (trees.size() != static_cast<std::size_t>(params.n_trees)) fail(Errc::kFormat, "tree count differs from n_trees");
    return Forest(std::move(trees), params, std::move(importances), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, std::string("bad forest document: ") + e.what());
  }
}

}  // namespace floodmap
