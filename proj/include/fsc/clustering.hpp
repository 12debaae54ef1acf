// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsc/distance.hpp"
#include "fsc/trace.hpp"

namespace fsc {

/// Unordered index pairs (i < j) that must end up in different clusters.
struct CannotLinkSet {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  bool empty() const { return pairs.empty(); }
  /// Dense adjacency for O(1) lookups, row-major n x n.
  std::vector<std::uint8_t> adjacency() const;
};

/// Pairs (i, j) with D(i, j) > eps. D(i, j) == eps stays linkable.
CannotLinkSet cannot_links(const DistanceMatrix &d, double eps);

enum class Algorithm { Hierarchical, ConstrainedKMeans, NonFunctional };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string &text);

struct ClusterResult {
  std::size_t k = 0;
  std::vector<int> assignment;
  std::vector<FunctionalCurve> centroids;
  Algorithm algorithm = Algorithm::Hierarchical;
  double epsilon = 0.0;
  DistanceSpec spec;

  /// Member indices of each cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const;
};

/// Cluster ids renumbered by first appearance in index order.
std::vector<int> canonical_labels(const std::vector<int> &assignment);

/// True iff every cannot-link pair is split by the assignment.
bool separates(const std::vector<int> &assignment, const CannotLinkSet &links);

/// Agglomerative merge record; `left`/`right` are the smallest member index
/// of each merged cluster (the survivor takes the smaller one).
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
};

/*
 * Complete-linkage dendrogram. At each step the pair of active clusters with
 * the smallest linkage distance merges; equal distances go to the pair whose
 * (smallest member, smallest member) is lexicographically smallest.
 */
struct Dendrogram {
  std::size_t n = 0;
  std::vector<Merge> merges;

  /// Canonically labelled partition with exactly k clusters.
  std::vector<int> cut(std::size_t k) const;
};

Dendrogram complete_linkage(const DistanceMatrix &d);

/// Smallest k <= K whose dendrogram cut separates every cannot-link pair.
/// Centroids are left empty (see fd_clustering).
ClusterResult hierarchical_cluster(const DistanceMatrix &d, std::size_t max_k,
                                   double eps);

/// COP-k-means over row vectors for k = 1..K; returns the first k with a
/// feasible run. Empty clusters of a run are dropped, so the returned k may be
/// below the k that produced it.
ClusterResult constrained_kmeans(const Eigen::MatrixXd &vectors,
                                 const CannotLinkSet &links, std::size_t max_k,
                                 std::uint64_t seed);

/// Derivative samples scaled so that squared Euclidean distance between rows
/// is the Simpson approximation of d_{i,2}^2.
Eigen::MatrixXd kmeans_embedding(std::span<const FunctionalCurve> curves,
                                 const DistanceSpec &spec);

/// Mean of member curves: coefficient average when all members share a
/// basis, otherwise grid-sample average refit on the first member's basis.
FunctionalCurve mean_curve(std::span<const FunctionalCurve> members,
                           const DistanceSpec &spec);

ClusterResult cluster_curves(std::span<const FunctionalCurve> curves,
                             std::size_t max_k, const DistanceSpec &spec,
                             double eps, Algorithm algo,
                             std::uint64_t seed = 0);

/// Distance matrix over the timing curves, cannot-links, clustering and
/// centroids.
ClusterResult fd_clustering(const std::vector<HyperTrace> &hypertraces,
                            std::size_t max_k, const DistanceSpec &spec,
                            double eps, Algorithm algo,
                            std::uint64_t seed = 0);

/// Pointwise baseline: per public value, complete-link clustering of the
/// per-secret mean times under |t - t'|; the largest count wins.
std::size_t nonfunctional_cluster(const TraceSet &traces, double eps);

} // namespace fsc
