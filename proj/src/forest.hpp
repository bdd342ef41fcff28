/*
 * Copyright 2026 The Escalade Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Random Forest binary classifier with minority-class oversampling.
//
// Trees are CART-style with Gini impurity. Candidate thresholds are midpoints
// between sorted distinct values; ties between equally good splits go to the
// lowest feature index, then the lowest threshold. Each tree draws from its
// own RNG stream derived from (seed, tree index), so the model is identical
// whatever the thread count.

#ifndef ESCALADE_FOREST_HPP_
#define ESCALADE_FOREST_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace escalade {

struct TrainConfig {
  int n_trees = 100;
  std::optional<int> max_depth;  // unlimited when empty
  int min_samples_split = 2;
  int features_per_split = 5;  // ceil(sqrt(22))
  std::uint64_t seed = 0;
  bool balance = true;
  bool bootstrap = true;
  // Worker threads; 0 means hardware concurrency. Does not affect the model.
  int threads = 0;

  void Validate() const;

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.n_trees == b.n_trees && a.max_depth == b.max_depth &&
           a.min_samples_split == b.min_samples_split &&
           a.features_per_split == b.features_per_split && a.seed == b.seed &&
           a.balance == b.balance && a.bootstrap == b.bootstrap;
  }
};

struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<std::uint8_t> labels;  // 0 or 1

  std::size_t size() const { return rows.size(); }
  void Add(const FeatureVector& x, bool label) {
    rows.push_back(x);
    labels.push_back(label ? 1 : 0);
  }
  std::size_t positives() const;

  // Checks that every row has exactly kFeatureCount values.
  static Dataset FromRaw(std::span<const std::vector<double>> rows,
                         std::span<const std::uint8_t> labels);
};

// Keeps every majority row once, in order, then appends the minority rows
// replicated until both classes have the same count. Each minority row is
// used floor(majority / minority) times; the remainder goes to a seeded
// random subset. Balanced input is returned unchanged.
Dataset Oversample(const Dataset& data, std::uint64_t seed);

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0;       // go left when x <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Bootstrap-weighted class counts of the training rows reaching the node.
  std::uint64_t negatives = 0;
  std::uint64_t positives = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& Leaf(const FeatureVector& x) const;
  // Leaf-majority vote; a tied leaf votes negative.
  bool Vote(const FeatureVector& x) const;
  int depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

inline constexpr int kModelFormatVersion = 1;

struct ForestModel {
  std::vector<DecisionTree> trees;
  TrainConfig config;
  int format_version = kModelFormatVersion;
  // Customer-profile window the training features were computed with.
  int window_months = 6;

  // Fraction of trees voting positive.
  double Confidence(const FeatureVector& x) const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

struct Prediction {
  EscalationRisk risk;
  double confidence = 0;
};

ForestModel Train(const Dataset& data, const TrainConfig& config);

// Single tree on exactly the given weighted rows; exposed for tests.
DecisionTree GrowTree(const Dataset& data, std::span<const std::uint32_t> weights,
                      const TrainConfig& config, std::uint64_t tree_seed);

Prediction Predict(const ForestModel& model, const FeatureVector& x);
Prediction Predict(const ForestModel& model, std::span<const double> x);

std::string SerializeModel(const ForestModel& model);
ForestModel ParseModel(std::string_view text);
void SaveModel(const ForestModel& model, const std::string& path);
ForestModel LoadModel(const std::string& path);

}  // namespace escalade

#endif  // ESCALADE_FOREST_HPP_
