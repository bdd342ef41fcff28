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

#include "forest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace escalade {

void TrainConfig::Validate() const {
  if (n_trees < 1) Fail(ErrorCode::kValidation, "n_trees must be >= 1");
  if (max_depth && *max_depth < 0) {
    Fail(ErrorCode::kValidation, "max_depth must be >= 0");
  }
  if (min_samples_split < 2) {
    Fail(ErrorCode::kValidation, "min_samples_split must be >= 2");
  }
  if (features_per_split < 1 ||
      features_per_split > static_cast<int>(kFeatureCount)) {
    Fail(ErrorCode::kValidation, "features_per_split must be in [1,22]");
  }
  if (threads < 0) Fail(ErrorCode::kValidation, "threads must be >= 0");
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Dataset Dataset::FromRaw(std::span<const std::vector<double>> rows,
                         std::span<const std::uint8_t> labels) {
  if (rows.size() != labels.size()) {
    Fail(ErrorCode::kValidation, "row and label counts differ");
  }
  Dataset out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != kFeatureCount) {
      Fail(ErrorCode::kValidation,
           "feature arity mismatch: expected 22, got " +
               std::to_string(rows[i].size()));
    }
    FeatureVector fv;
    std::copy(rows[i].begin(), rows[i].end(), fv.values.begin());
    out.Add(fv, labels[i] != 0);
  }
  return out;
}

namespace {

// Source row of every row of the balanced dataset, in output order.
std::vector<std::uint32_t> BalancedSources(const Dataset& data,
                                           std::uint64_t seed) {
  if (data.rows.size() != data.labels.size()) {
    Fail(ErrorCode::kValidation, "row and label counts differ");
  }
  const std::size_t pos = data.positives();
  const std::size_t neg = data.size() - pos;
  if (pos == 0 || neg == 0) {
    Fail(ErrorCode::kValidation, "cannot balance single-class data");
  }
  std::vector<std::uint32_t> sources;
  if (pos == neg) {
    sources.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      sources[i] = static_cast<std::uint32_t>(i);
    }
    return sources;
  }

  const std::uint8_t minority_label = pos < neg ? 1 : 0;
  std::vector<std::uint32_t> minority;
  sources.reserve(2 * std::max(pos, neg));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == minority_label) {
      minority.push_back(static_cast<std::uint32_t>(i));
    } else {
      sources.push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::size_t majority = data.size() - minority.size();
  const std::size_t base = majority / minority.size();
  const std::size_t remainder = majority % minority.size();

  // Partial Fisher-Yates: the first `remainder` slots get one extra copy.
  std::vector<std::size_t> order(minority.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(DeriveSeed(seed, 0x6f76657273616d70ULL));
  for (std::size_t i = 0; i < remainder; ++i) {
    const std::size_t j = i + rng.Uniform(order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<std::uint8_t> extra(minority.size(), 0);
  for (std::size_t i = 0; i < remainder; ++i) extra[order[i]] = 1;

  for (std::size_t m = 0; m < minority.size(); ++m) {
    sources.insert(sources.end(), base + extra[m], minority[m]);
  }
  return sources;
}

}  // namespace

Dataset Oversample(const Dataset& data, std::uint64_t seed) {
  const auto sources = BalancedSources(data, seed);
  Dataset out;
  out.rows.reserve(sources.size());
  out.labels.reserve(sources.size());
  for (const auto r : sources) {
    out.rows.push_back(data.rows[r]);
    out.labels.push_back(data.labels[r]);
  }
  return out;
}

namespace {

// Column-major copy of the dataset plus, per feature, the rows sorted by
// (value, row). Shared read-only by all trees.
struct Columns {
  explicit Columns(const Dataset& data) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      auto& column = values[f];
      column.resize(data.size());
      for (std::size_t r = 0; r < data.size(); ++r) {
        column[r] = data.rows[r].values[f];
      }
      auto& order = sorted[f];
      order.resize(data.size());
      for (std::size_t r = 0; r < data.size(); ++r) {
        order[r] = static_cast<std::uint32_t>(r);
      }
      std::sort(order.begin(), order.end(),
                [&](std::uint32_t a, std::uint32_t b) {
                  return column[a] != column[b] ? column[a] < column[b] : a < b;
                });
    }
  }
  std::size_t rows() const { return values[0].size(); }
  std::array<std::vector<double>, kFeatureCount> values;
  std::array<std::vector<std::uint32_t>, kFeatureCount> sorted;
};

double WeightedGini(double pos, double neg) {
  const double total = pos + neg;
  if (total <= 0) return 0;
  return total - (pos * pos + neg * neg) / total;
}

class TreeBuilder {
 public:
  TreeBuilder(const Columns& columns, std::span<const std::uint8_t> labels,
              std::span<const std::uint32_t> weights, const TrainConfig& config,
              Rng& rng)
      : columns_(columns),
        labels_(labels),
        weights_(weights),
        config_(config),
        rng_(rng),
        mark_(weights.size(), 0) {
    for (std::size_t r = 0; r < weights.size(); ++r) {
      if (weights[r] > 0) {
        items_.push_back({static_cast<std::uint32_t>(r), weights[r]});
      }
    }
  }

  DecisionTree Build() {
    DecisionTree tree;
    if (items_.empty()) {
      Fail(ErrorCode::kValidation, "cannot grow a tree on an empty sample");
    }
    struct Pending {
      std::int32_t node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Pending> stack;
    tree.nodes.push_back(MakeNode(0, items_.size()));
    stack.push_back({0, 0, items_.size(), 0});
    while (!stack.empty()) {
      const Pending cur = stack.back();
      stack.pop_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(cur.node)];
      const std::uint64_t total = node.negatives + node.positives;
      if (node.negatives == 0 || node.positives == 0) continue;
      if (config_.max_depth && cur.depth >= *config_.max_depth) continue;
      if (total < static_cast<std::uint64_t>(config_.min_samples_split)) continue;

      const auto split = FindSplit(cur.begin, cur.end);
      if (!split) continue;

      const auto& column = columns_.values[static_cast<std::size_t>(split->feature)];
      const auto mid_it = std::stable_partition(
          items_.begin() + static_cast<std::ptrdiff_t>(cur.begin),
          items_.begin() + static_cast<std::ptrdiff_t>(cur.end),
          [&](const Item& it) { return column[it.row] <= split->threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - items_.begin());

      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(MakeNode(cur.begin, mid));
      const auto right = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(MakeNode(mid, cur.end));
      TreeNode& parent = tree.nodes[static_cast<std::size_t>(cur.node)];
      parent.feature = split->feature;
      parent.threshold = split->threshold;
      parent.left = left;
      parent.right = right;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({right, mid, cur.end, cur.depth + 1});
      stack.push_back({left, cur.begin, mid, cur.depth + 1});
    }
    return tree;
  }

 private:
  struct Item {
    std::uint32_t row;
    std::uint32_t weight;
  };
  struct Split {
    std::int32_t feature;
    double threshold;
    double impurity;
  };
  struct Entry {
    double value;
    std::uint32_t row;
    std::uint32_t weight;
  };

  TreeNode MakeNode(std::size_t begin, std::size_t end) const {
    TreeNode node;
    for (std::size_t i = begin; i < end; ++i) {
      if (labels_[items_[i].row]) {
        node.positives += items_[i].weight;
      } else {
        node.negatives += items_[i].weight;
      }
    }
    return node;
  }

  static bool Better(const Split& a, const std::optional<Split>& best) {
    if (!best) return true;
    if (a.impurity != best->impurity) return a.impurity < best->impurity;
    if (a.feature != best->feature) return a.feature < best->feature;
    return a.threshold < best->threshold;
  }

  std::optional<Split> FindSplit(std::size_t begin, std::size_t end) {
    ++stamp_;
    for (std::size_t i = begin; i < end; ++i) mark_[items_[i].row] = stamp_;
    std::array<std::int32_t, kFeatureCount> order;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      order[f] = static_cast<std::int32_t>(f);
    }
    std::optional<Split> best;
    int informative = 0;
    // Features are drawn one at a time without replacement; constant features
    // do not count toward features_per_split.
    for (std::size_t i = 0;
         i < kFeatureCount && informative < config_.features_per_split; ++i) {
      const std::size_t j = i + rng_.Uniform(kFeatureCount - i);
      std::swap(order[i], order[j]);
      const std::int32_t f = order[i];
      if (EvaluateFeature(f, begin, end, best)) ++informative;
    }
    return best;
  }

  // Fills scratch_ with the node's rows ordered by (value, row). Large nodes
  // filter the presorted column; small ones sort their own rows.
  void Gather(std::int32_t feature, std::size_t begin, std::size_t end) {
    const auto f = static_cast<std::size_t>(feature);
    const auto& column = columns_.values[f];
    const std::size_t m = end - begin;
    scratch_.clear();
    if (m * 16 >= columns_.rows()) {
      for (const auto row : columns_.sorted[f]) {
        if (mark_[row] == stamp_) {
          scratch_.push_back({column[row], row, weights_[row]});
        }
      }
      return;
    }
    for (std::size_t i = begin; i < end; ++i) {
      const Item& it = items_[i];
      scratch_.push_back({column[it.row], it.row, it.weight});
    }
    std::sort(scratch_.begin(), scratch_.end(),
              [](const Entry& a, const Entry& b) {
                return a.value != b.value ? a.value < b.value : a.row < b.row;
              });
  }

  // Returns false when the feature is constant over the node.
  bool EvaluateFeature(std::int32_t feature, std::size_t begin, std::size_t end,
                       std::optional<Split>& best) {
    Gather(feature, begin, end);
    if (scratch_.front().value == scratch_.back().value) return false;
    std::uint64_t pos_total = 0, neg_total = 0;
    for (const Entry& e : scratch_) {
      (labels_[e.row] ? pos_total : neg_total) += e.weight;
    }
    std::uint64_t pos_left = 0, neg_left = 0;
    for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
      const Entry& e = scratch_[i];
      (labels_[e.row] ? pos_left : neg_left) += e.weight;
      const double next = scratch_[i + 1].value;
      if (!(e.value < next)) continue;
      double threshold = e.value + (next - e.value) / 2;
      if (!(threshold < next)) threshold = e.value;
      const double impurity =
          WeightedGini(static_cast<double>(pos_left),
                       static_cast<double>(neg_left)) +
          WeightedGini(static_cast<double>(pos_total - pos_left),
                       static_cast<double>(neg_total - neg_left));
      const Split candidate{feature, threshold, impurity};
      if (Better(candidate, best)) best = candidate;
    }
    return true;
  }

  const Columns& columns_;
  std::span<const std::uint8_t> labels_;
  std::span<const std::uint32_t> weights_;
  const TrainConfig& config_;
  Rng& rng_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<Item> items_;
  std::vector<Entry> scratch_;
};

DecisionTree GrowWithColumns(const Columns& columns,
                             std::span<const std::uint8_t> labels,
                             std::span<const std::uint32_t> weights,
                             const TrainConfig& config, Rng& rng) {
  TreeBuilder builder(columns, labels, weights, config, rng);
  return builder.Build();
}

}  // namespace

const TreeNode& DecisionTree::Leaf(const FeatureVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(
        x.values[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                      : n.right);
  }
  return nodes[i];
}

bool DecisionTree::Vote(const FeatureVector& x) const {
  const TreeNode& leaf = Leaf(x);
  return leaf.positives > leaf.negatives;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    for (const auto c : {nodes[i].left, nodes[i].right}) {
      d[static_cast<std::size_t>(c)] = d[i] + 1;
      deepest = std::max(deepest, d[i] + 1);
    }
  }
  return deepest;
}

double ForestModel::Confidence(const FeatureVector& x) const {
  if (trees.empty()) return 0;
  std::size_t votes = 0;
  for (const auto& tree : trees) votes += tree.Vote(x) ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

DecisionTree GrowTree(const Dataset& data, std::span<const std::uint32_t> weights,
                      const TrainConfig& config, std::uint64_t tree_seed) {
  config.Validate();
  if (weights.size() != data.size()) {
    Fail(ErrorCode::kValidation, "weight count differs from row count");
  }
  const Columns columns(data);
  Rng rng(tree_seed);
  return GrowWithColumns(columns, data.labels, weights, config, rng);
}

ForestModel Train(const Dataset& input, const TrainConfig& config) {
  config.Validate();
  if (input.rows.size() != input.labels.size()) {
    Fail(ErrorCode::kValidation, "row and label counts differ");
  }
  if (input.size() == 0) Fail(ErrorCode::kValidation, "empty training set");

  // Trees are grown on the distinct input rows; oversampled replicas and
  // bootstrap draws become per-row weights.
  std::vector<std::uint32_t> sources;
  if (config.balance) {
    sources = BalancedSources(input, config.seed);
  } else {
    sources.resize(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
      sources[i] = static_cast<std::uint32_t>(i);
    }
  }
  const Dataset& data = input;
  const Columns columns(data);

  ForestModel model;
  model.config = config;
  model.trees.resize(static_cast<std::size_t>(config.n_trees));

  const auto grow = [&](std::size_t t) {
    Rng rng(DeriveSeed(config.seed, t));
    std::vector<std::uint32_t> weights(data.size(), 0);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < sources.size(); ++i) {
        ++weights[sources[rng.Uniform(sources.size())]];
      }
    } else {
      for (const auto r : sources) ++weights[r];
    }
    model.trees[t] = GrowWithColumns(columns, data.labels, weights, config, rng);
  };

  unsigned workers = config.threads > 0
                         ? static_cast<unsigned>(config.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.n_trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) grow(t);
    return model;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < model.trees.size(); t = next++) {
        try {
          grow(t);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return model;
}

Prediction Predict(const ForestModel& model, const FeatureVector& x) {
  const double confidence = model.Confidence(x);
  return Prediction{EscalationRisk::FromConfidence(confidence), confidence};
}

Prediction Predict(const ForestModel& model, std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    Fail(ErrorCode::kValidation, "feature arity mismatch: expected 22, got " +
                                     std::to_string(x.size()));
  }
  FeatureVector fv;
  std::copy(x.begin(), x.end(), fv.values.begin());
  return Predict(model, fv);
}

namespace {

using nlohmann::ordered_json;
constexpr std::string_view kFormatName = "escalade.forest";

[[noreturn]] void ModelError(const std::string& what) {
  Fail(ErrorCode::kValidation, "invalid model: " + what);
}

}  // namespace

std::string SerializeModel(const ForestModel& model) {
  ordered_json j;
  j["format"] = kFormatName;
  j["format_version"] = model.format_version;
  j["feature_names"] = ordered_json::array();
  for (const auto name : kFeatureNames) j["feature_names"].push_back(name);
  ordered_json cfg;
  cfg["n_trees"] = model.config.n_trees;
  cfg["max_depth"] = model.config.max_depth ? ordered_json(*model.config.max_depth)
                                            : ordered_json(nullptr);
  cfg["min_samples_split"] = model.config.min_samples_split;
  cfg["features_per_split"] = model.config.features_per_split;
  cfg["seed"] = model.config.seed;
  cfg["balance"] = model.config.balance;
  cfg["bootstrap"] = model.config.bootstrap;
  j["config"] = cfg;
  j["window_months"] = model.window_months;
  ordered_json trees = ordered_json::array();
  for (const auto& tree : model.trees) {
    ordered_json feature = ordered_json::array(), threshold = ordered_json::array(),
                 left = ordered_json::array(), right = ordered_json::array(),
                 neg = ordered_json::array(), pos = ordered_json::array();
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      neg.push_back(n.negatives);
      pos.push_back(n.positives);
    }
    ordered_json t;
    t["feature"] = std::move(feature);
    t["threshold"] = std::move(threshold);
    t["left"] = std::move(left);
    t["right"] = std::move(right);
    t["negatives"] = std::move(neg);
    t["positives"] = std::move(pos);
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel ParseModel(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    ModelError("truncated or malformed JSON");
  }
  try {
    if (j.value("format", std::string()) != kFormatName) {
      ModelError("not an escalade forest");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      ModelError("unsupported format_version " + std::to_string(version) +
                 " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    const auto& names = j.at("feature_names");
    if (!names.is_array() || names.size() != kFeatureCount) {
      ModelError("feature arity mismatch");
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (names[i].get<std::string>() != kFeatureNames[i]) {
        ModelError("feature order mismatch at " + std::to_string(i) + ": " +
                   names[i].get<std::string>());
      }
    }
    ForestModel model;
    model.format_version = version;
    const auto& cfg = j.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    if (!cfg.at("max_depth").is_null()) {
      model.config.max_depth = cfg.at("max_depth").get<int>();
    }
    model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    model.config.features_per_split = cfg.at("features_per_split").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.balance = cfg.at("balance").get<bool>();
    model.config.bootstrap = cfg.at("bootstrap").get<bool>();
    model.config.Validate();
    model.window_months = j.at("window_months").get<int>();
    if (model.window_months < 1) ModelError("window_months must be >= 1");

    const auto& trees = j.at("trees");
    if (!trees.is_array() ||
        trees.size() != static_cast<std::size_t>(model.config.n_trees)) {
      ModelError("tree count does not match config");
    }
    for (const auto& t : trees) {
      const auto& feature = t.at("feature");
      const std::size_t n = feature.size();
      if (n == 0) ModelError("empty tree");
      for (const char* key :
           {"threshold", "left", "right", "negatives", "positives"}) {
        if (t.at(key).size() != n) ModelError("ragged tree arrays");
      }
      DecisionTree tree;
      tree.nodes.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        TreeNode& node = tree.nodes[i];
        node.feature = feature[i].get<std::int32_t>();
        node.threshold = t["threshold"][i].get<double>();
        node.left = t["left"][i].get<std::int32_t>();
        node.right = t["right"][i].get<std::int32_t>();
        node.negatives = t["negatives"][i].get<std::uint64_t>();
        node.positives = t["positives"][i].get<std::uint64_t>();
        if (node.feature >= static_cast<std::int32_t>(kFeatureCount) ||
            node.feature < -1) {
          ModelError("split feature index out of range");
        }
        if (node.is_leaf()) {
          if (node.negatives + node.positives == 0) {
            ModelError("leaf with zero count");
          }
        } else {
          // Children always follow their parent in preorder layout.
          const auto in_range = [&](std::int32_t c) {
            return c > static_cast<std::int32_t>(i) &&
                   c < static_cast<std::int32_t>(n);
          };
          if (!in_range(node.left) || !in_range(node.right)) {
            ModelError("child index out of range");
          }
        }
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    ModelError(e.what());
  }
}

void SaveModel(const ForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kRuntime, "cannot write model file " + path);
  out << SerializeModel(model);
  if (!out) Fail(ErrorCode::kRuntime, "failed writing model file " + path);
}

ForestModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kUsage, "cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseModel(buf.str());
}

}  // namespace escalade
