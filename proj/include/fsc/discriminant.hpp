// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsc/clustering.hpp"

namespace fsc {

enum class FeatureKind { Categorical, Numeric };

/// Categorical labels of one auxiliary variable, or its constant value per
/// secret when every aux curve of that variable is constant.
struct AuxLabels {
  FeatureKind kind = FeatureKind::Categorical;
  /// Label id (categorical) or constant value (numeric), one per hyper-trace.
  std::vector<double> values;
  /// Display text per label id, e.g. "L3" or "L2 (3*y)".
  std::vector<std::string> label_text;
};

/// Clusters the aux_index-th aux curves of all hyper-traces (hierarchical,
/// complete link) and turns cluster ids into labels.
AuxLabels label_aux(const std::vector<HyperTrace> &hypertraces,
                    std::size_t aux_index, double eps_aux, std::size_t max_k,
                    const DistanceSpec &spec);

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Categorical;
  std::vector<std::string> label_text;
};

struct LabeledRow {
  std::vector<double> secret;
  std::vector<double> features;
  int target = 0;
};

/*
 * Binary CART tree. Internal nodes test `feature == value` (categorical) or
 * `feature <= value` (numeric); rows satisfying the test go to `pass`.
 */
struct TreeNode {
  bool leaf = true;
  int feature = -1;
  FeatureKind kind = FeatureKind::Categorical;
  double value = 0.0;
  int pass = -1;
  int fail = -1;
  int cluster = 0;
  std::vector<std::size_t> histogram;
};

struct DecisionTree {
  std::vector<TreeNode> nodes; // nodes[0] is the root
  std::vector<Feature> features;
  std::size_t classes = 0;

  std::size_t height() const;
  std::size_t leaf_count() const;
};

struct TreeOptions {
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;
};

/// Best split of a row subset by Gini impurity decrease.
struct Split {
  int feature = -1;
  FeatureKind kind = FeatureKind::Categorical;
  double value = 0.0;
  double gain = 0.0;
};

double gini(const std::vector<std::size_t> &histogram, std::size_t total);

/// Candidate splits scanned in (feature, value) order; a later candidate
/// replaces the incumbent only with a strictly larger gain.
std::optional<Split> best_split(const std::vector<LabeledRow> &rows,
                                const std::vector<std::size_t> &subset,
                                const std::vector<Feature> &features,
                                std::size_t classes, std::size_t min_leaf);

DecisionTree learn_tree(const std::vector<LabeledRow> &rows,
                        const std::vector<Feature> &features,
                        const TreeOptions &options = {});

int predict(const DecisionTree &tree, const std::vector<double> &features);

double training_accuracy(const DecisionTree &tree,
                         const std::vector<LabeledRow> &rows);

/// Seeded shuffle, contiguous folds, mean held-out accuracy over folds.
double cross_validate(const std::vector<LabeledRow> &rows,
                      const std::vector<Feature> &features,
                      std::size_t folds = 20, std::uint64_t seed = 0,
                      const TreeOptions &options = {});

struct Discriminant {
  ClusterResult clusters;
  DecisionTree tree;
  std::size_t size() const { return clusters.k; }
};

/// Labels every aux variable and pairs the labels with cluster ids.
struct LabeledData {
  std::vector<Feature> features;
  std::vector<LabeledRow> rows;
};

LabeledData label_hypertraces(const std::vector<HyperTrace> &hypertraces,
                              const std::vector<std::string> &aux_names,
                              const ClusterResult &clusters, double eps_aux,
                              std::size_t max_k, const DistanceSpec &aux_spec);

/// Mean over hyper-traces of d(timing curve, centroid of predicted leaf).
double discriminant_error(const std::vector<HyperTrace> &hypertraces,
                          const std::vector<LabeledRow> &rows,
                          const Discriminant &disc, const DistanceSpec &spec);

std::string tree_to_text(const DecisionTree &tree);
std::string tree_to_dot(const DecisionTree &tree);

} // namespace fsc
