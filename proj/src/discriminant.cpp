// SPDX-License-Identifier: Apache-2.0

#include "fsc/discriminant.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "fsc/format.hpp"

namespace fsc {

namespace {

constexpr double kConstantTolerance = 1e-9;
constexpr double kLinearTolerance = 1e-6;
constexpr double kGainTolerance = 1e-12;

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// "b*y", "a + b*y" or "a" when the curve is affine in y, empty otherwise.
std::string linear_form(const FunctionalCurve &curve) {
  const DistanceGrid<double> grid(curve.lo(), curve.hi(), DistanceSpec{0});
  const Eigen::VectorXd v = sample_curve(curve, grid.nodes, 0);
  Eigen::MatrixXd design(v.size(), 2);
  design.col(0).setOnes();
  design.col(1) = grid.nodes;
  const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(v);
  if ((design * ab - v).cwiseAbs().maxCoeff() >= kLinearTolerance)
    return {};
  const double a = std::abs(ab[0]) < kLinearTolerance ? 0.0 : ab[0];
  const double b = std::abs(ab[1]) < kLinearTolerance ? 0.0 : ab[1];
  if (b == 0.0)
    return short_number(a);
  const std::string slope = short_number(b) + "*y";
  return a == 0.0 ? slope : short_number(a) + " + " + slope;
}

} // namespace

AuxLabels label_aux(const std::vector<HyperTrace> &hypertraces,
                    std::size_t aux_index, double eps_aux, std::size_t max_k,
                    const DistanceSpec &spec) {
  if (hypertraces.empty())
    throw ValidationError("no hyper-traces to label");
  std::vector<FunctionalCurve> curves;
  curves.reserve(hypertraces.size());
  for (const auto &h : hypertraces) {
    if (aux_index >= h.aux_curves.size())
      throw InvalidSpecError("aux index out of range");
    curves.push_back(h.aux_curves[aux_index]);
  }

  AuxLabels out;
  const DistanceGrid<double> grid(curves[0].lo(), curves[0].hi(),
                                  DistanceSpec{0, spec.norm, spec.grid_n});
  std::vector<double> constants;
  bool all_constant = true;
  for (const auto &c : curves) {
    const Eigen::VectorXd v = sample_curve(c, grid.nodes, 0);
    if (v.maxCoeff() - v.minCoeff() >= kConstantTolerance) {
      all_constant = false;
      break;
    }
    constants.push_back(round9(v[0]));
  }
  if (all_constant) {
    out.kind = FeatureKind::Numeric;
    out.values = std::move(constants);
    return out;
  }

  // Identical curves always share a cluster; cluster each shape once.
  std::vector<FunctionalCurve> unique;
  std::vector<std::size_t> which(curves.size());
  std::map<std::vector<double>, std::size_t> seen;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<double> key(curves[i].coefficients.data(),
                            curves[i].coefficients.data() +
                                curves[i].coefficients.size());
    auto [it, inserted] = seen.try_emplace(std::move(key), unique.size());
    if (inserted)
      unique.push_back(curves[i]);
    which[i] = it->second;
  }
  const ClusterResult clusters = cluster_curves(
      unique, std::min(max_k, unique.size()), spec, eps_aux,
      Algorithm::Hierarchical);

  out.kind = FeatureKind::Categorical;
  out.values.resize(curves.size());
  out.label_text.assign(clusters.k, {});
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const int label = clusters.assignment[which[i]];
    out.values[i] = label;
    auto &text = out.label_text[static_cast<std::size_t>(label)];
    if (text.empty()) {
      text = "L" + std::to_string(label + 1);
      const std::string form = linear_form(curves[i]);
      if (!form.empty())
        text += " (" + form + ")";
    }
  }
  return out;
}

double gini(const std::vector<std::size_t> &histogram, std::size_t total) {
  if (total == 0)
    return 0.0;
  double sum = 0.0;
  for (std::size_t c : histogram) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

namespace {

std::vector<std::size_t> histogram_of(const std::vector<LabeledRow> &rows,
                                      const std::vector<std::size_t> &subset,
                                      std::size_t classes) {
  std::vector<std::size_t> h(classes, 0);
  for (std::size_t i : subset)
    ++h.at(static_cast<std::size_t>(rows[i].target));
  return h;
}

bool passes(FeatureKind kind, double feature_value, double test_value) {
  return kind == FeatureKind::Categorical ? feature_value == test_value
                                          : feature_value <= test_value;
}

} // namespace

namespace {

std::optional<Split> find_split(const std::vector<LabeledRow> &rows,
                                const std::vector<std::size_t> &subset,
                                const std::vector<Feature> &features,
                                std::size_t classes, std::size_t min_leaf,
                                bool allow_zero_gain) {
  const std::size_t n = subset.size();
  const double parent = gini(histogram_of(rows, subset, classes), n);
  std::optional<Split> best;
  std::vector<std::size_t> pass_h(classes), fail_h(classes);
  for (std::size_t f = 0; f < features.size(); ++f) {
    std::set<double> distinct;
    for (std::size_t i : subset)
      distinct.insert(rows[i].features[f]);
    std::vector<double> candidates;
    if (features[f].kind == FeatureKind::Categorical) {
      candidates.assign(distinct.begin(), distinct.end());
    } else {
      for (auto it = distinct.begin(); std::next(it) != distinct.end(); ++it)
        candidates.push_back(0.5 * (*it + *std::next(it)));
    }
    for (double value : candidates) {
      std::fill(pass_h.begin(), pass_h.end(), 0);
      std::fill(fail_h.begin(), fail_h.end(), 0);
      std::size_t n_pass = 0;
      for (std::size_t i : subset) {
        const auto target = static_cast<std::size_t>(rows[i].target);
        if (passes(features[f].kind, rows[i].features[f], value)) {
          ++pass_h[target];
          ++n_pass;
        } else {
          ++fail_h[target];
        }
      }
      const std::size_t n_fail = n - n_pass;
      if (n_pass < min_leaf || n_fail < min_leaf || n_pass == 0 || n_fail == 0)
        continue;
      const double gain =
          parent -
          (static_cast<double>(n_pass) * gini(pass_h, n_pass) +
           static_cast<double>(n_fail) * gini(fail_h, n_fail)) /
              static_cast<double>(n);
      if (gain <= (allow_zero_gain ? -kGainTolerance : kGainTolerance))
        continue;
      if (!best || gain > best->gain + kGainTolerance)
        best = Split{static_cast<int>(f), features[f].kind, value, gain};
    }
  }
  return best;
}

} // namespace

std::optional<Split> best_split(const std::vector<LabeledRow> &rows,
                                const std::vector<std::size_t> &subset,
                                const std::vector<Feature> &features,
                                std::size_t classes, std::size_t min_leaf) {
  return find_split(rows, subset, features, classes, min_leaf, false);
}

DecisionTree learn_tree(const std::vector<LabeledRow> &rows,
                        const std::vector<Feature> &features,
                        const TreeOptions &options) {
  if (rows.empty())
    throw ValidationError("cannot learn a tree from zero rows");
  DecisionTree tree;
  tree.features = features;
  for (const auto &r : rows) {
    if (r.features.size() != features.size())
      throw ValidationError("row arity does not match the feature list");
    if (r.target < 0)
      throw ValidationError("negative cluster id");
    tree.classes = std::max(tree.classes, static_cast<std::size_t>(r.target) + 1);
  }
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_leaf);

  std::function<int(std::vector<std::size_t>, std::size_t)> grow =
      [&](std::vector<std::size_t> subset, std::size_t depth) -> int {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    node.histogram = histogram_of(rows, subset, tree.classes);
    node.cluster = static_cast<int>(
        std::max_element(node.histogram.begin(), node.histogram.end()) -
        node.histogram.begin());
    const bool pure = node.histogram[static_cast<std::size_t>(node.cluster)] ==
                      subset.size();
    const bool depth_left = !options.max_depth || depth < *options.max_depth;
    std::optional<Split> split;
    if (!pure && depth_left) {
      split = best_split(rows, subset, features, tree.classes, min_leaf);
      // gainless fallback, e.g. XOR-shaped targets
      if (!split)
        split = find_split(rows, subset, features, tree.classes, min_leaf, true);
    }
    if (split) {
      std::vector<std::size_t> pass, fail;
      for (std::size_t i : subset)
        (passes(split->kind, rows[i].features[split->feature], split->value)
             ? pass
             : fail)
            .push_back(i);
      node.leaf = false;
      node.feature = split->feature;
      node.kind = split->kind;
      node.value = split->value;
      tree.nodes[id] = node;
      const int p = grow(std::move(pass), depth + 1);
      const int q = grow(std::move(fail), depth + 1);
      tree.nodes[id].pass = p;
      tree.nodes[id].fail = q;
    } else {
      tree.nodes[id] = node;
    }
    return id;
  };

  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    all[i] = i;
  grow(std::move(all), 0);
  return tree;
}

int predict(const DecisionTree &tree, const std::vector<double> &features) {
  if (tree.nodes.empty())
    throw ValidationError("empty decision tree");
  if (features.size() != tree.features.size())
    throw ValidationError("feature arity does not match the tree");
  int id = 0;
  while (!tree.nodes[id].leaf) {
    const auto &node = tree.nodes[id];
    id = passes(node.kind, features[node.feature], node.value) ? node.pass
                                                                : node.fail;
  }
  return tree.nodes[id].cluster;
}

std::size_t DecisionTree::height() const {
  std::size_t best = 0;
  std::function<void(int, std::size_t)> walk = [&](int id, std::size_t depth) {
    const auto &node = nodes[id];
    if (node.leaf) {
      best = std::max(best, depth);
      return;
    }
    walk(node.pass, depth + 1);
    walk(node.fail, depth + 1);
  };
  if (!nodes.empty())
    walk(0, 0);
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode &n) { return n.leaf; }));
}

double training_accuracy(const DecisionTree &tree,
                         const std::vector<LabeledRow> &rows) {
  if (rows.empty())
    return 0.0;
  std::size_t correct = 0;
  for (const auto &r : rows)
    correct += predict(tree, r.features) == r.target;
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

double cross_validate(const std::vector<LabeledRow> &rows,
                      const std::vector<Feature> &features, std::size_t folds,
                      std::uint64_t seed, const TreeOptions &options) {
  const std::size_t n = rows.size();
  if (folds < 2)
    throw InvalidSpecError("cross-validation needs at least 2 folds");
  if (folds > n)
    throw InvalidSpecError("more folds (" + std::to_string(folds) +
                           ") than rows (" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng() % (i + 1)]);

  double total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * n / folds, end = (f + 1) * n / folds;
    std::vector<LabeledRow> train, test;
    for (std::size_t pos = 0; pos < n; ++pos)
      (pos >= begin && pos < end ? test : train).push_back(rows[order[pos]]);
    const DecisionTree tree = learn_tree(train, features, options);
    std::size_t correct = 0;
    for (const auto &r : test)
      correct += predict(tree, r.features) == r.target;
    total += static_cast<double>(correct) / static_cast<double>(test.size());
  }
  return total / static_cast<double>(folds);
}

LabeledData label_hypertraces(const std::vector<HyperTrace> &hypertraces,
                              const std::vector<std::string> &aux_names,
                              const ClusterResult &clusters, double eps_aux,
                              std::size_t max_k, const DistanceSpec &aux_spec) {
  if (clusters.assignment.size() != hypertraces.size())
    throw ValidationError("cluster assignment does not cover the hyper-traces");
  LabeledData data;
  std::vector<AuxLabels> labels;
  for (std::size_t j = 0; j < aux_names.size(); ++j) {
    labels.push_back(label_aux(hypertraces, j, eps_aux, max_k, aux_spec));
    data.features.push_back(
        {aux_names[j], labels.back().kind, labels.back().label_text});
  }
  data.rows.resize(hypertraces.size());
  for (std::size_t i = 0; i < hypertraces.size(); ++i) {
    auto &row = data.rows[i];
    row.secret = hypertraces[i].secret;
    row.target = clusters.assignment[i];
    for (const auto &l : labels)
      row.features.push_back(l.values[i]);
  }
  return data;
}

double discriminant_error(const std::vector<HyperTrace> &hypertraces,
                          const std::vector<LabeledRow> &rows,
                          const Discriminant &disc, const DistanceSpec &spec) {
  if (hypertraces.empty())
    throw ValidationError("no hyper-traces");
  if (rows.size() != hypertraces.size())
    throw ValidationError("one labeled row per hyper-trace is required");
  double sum = 0.0;
  for (std::size_t i = 0; i < hypertraces.size(); ++i) {
    const int leaf = predict(disc.tree, rows[i].features);
    sum += distance(hypertraces[i].timing_curve,
                    disc.clusters.centroids.at(static_cast<std::size_t>(leaf)),
                    spec);
  }
  return sum / static_cast<double>(hypertraces.size());
}

namespace {

std::string test_text(const DecisionTree &tree, const TreeNode &node,
                      bool pass) {
  const auto &feature = tree.features[static_cast<std::size_t>(node.feature)];
  if (node.kind == FeatureKind::Numeric)
    return feature.name + (pass ? " <= " : " > ") + short_number(node.value);
  const auto label = static_cast<std::size_t>(node.value);
  const std::string text = label < feature.label_text.size()
                               ? feature.label_text[label]
                               : short_number(node.value);
  return feature.name + (pass ? " = " : " != ") + text;
}

std::size_t support(const TreeNode &node) {
  std::size_t s = 0;
  for (std::size_t c : node.histogram)
    s += c;
  return s;
}

} // namespace

std::string tree_to_text(const DecisionTree &tree) {
  std::string out;
  std::function<void(int, const std::string &)> walk =
      [&](int id, const std::string &indent) {
        const auto &node = tree.nodes[id];
        if (node.leaf) {
          out += indent + "cluster " + std::to_string(node.cluster) +
                 " [support " + std::to_string(support(node)) + "]\n";
          return;
        }
        out += indent + "|--- " + test_text(tree, node, true) + "\n";
        walk(node.pass, indent + "|   ");
        out += indent + "|--- " + test_text(tree, node, false) + "\n";
        walk(node.fail, indent + "|   ");
      };
  if (!tree.nodes.empty())
    walk(0, "");
  return out;
}

std::string tree_to_dot(const DecisionTree &tree) {
  std::string out = "digraph tree {\n  node [shape=box];\n";
  auto quote = [](std::string s) {
    std::string q;
    for (char c : s) {
      if (c == '"' || c == '\\')
        q += '\\';
      q += c;
    }
    return "\"" + q + "\"";
  };
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto &node = tree.nodes[id];
    std::string label;
    if (node.leaf) {
      label = "cluster " + std::to_string(node.cluster) + "\\nsupport " +
              std::to_string(support(node));
      out += "  n" + std::to_string(id) + " [label=" + quote(label) +
             ", style=rounded];\n";
    } else {
      out += "  n" + std::to_string(id) +
             " [label=" + quote(test_text(tree, node, true)) + "];\n";
      out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.pass) +
             " [label=\"yes\"];\n";
      out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.fail) +
             " [label=\"no\"];\n";
    }
  }
  return out + "}\n";
}

} // namespace fsc
