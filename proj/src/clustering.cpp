// SPDX-License-Identifier: Apache-2.0

#include "fsc/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace fsc {

std::vector<std::uint8_t> CannotLinkSet::adjacency() const {
  std::vector<std::uint8_t> adj(n * n, 0);
  for (const auto &[i, j] : pairs) {
    adj[i * n + j] = 1;
    adj[j * n + i] = 1;
  }
  return adj;
}

CannotLinkSet cannot_links(const DistanceMatrix &d, double eps) {
  CannotLinkSet links;
  links.n = d.size();
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (d(i, j) > eps)
        links.pairs.emplace_back(i, j);
  return links;
}

std::string to_string(Algorithm algo) {
  switch (algo) {
  case Algorithm::Hierarchical:
    return "hierarchical";
  case Algorithm::ConstrainedKMeans:
    return "constrained-kmeans";
  case Algorithm::NonFunctional:
    return "nonfunctional";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string &text) {
  if (text == "hierarchical")
    return Algorithm::Hierarchical;
  if (text == "constrained-kmeans" || text == "kmeans")
    return Algorithm::ConstrainedKMeans;
  if (text == "nonfunctional")
    return Algorithm::NonFunctional;
  throw InvalidSpecError("unknown clustering algorithm '" + text + "'");
}

std::vector<std::vector<std::size_t>> ClusterResult::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out.at(static_cast<std::size_t>(assignment[i])).push_back(i);
  return out;
}

std::vector<int> canonical_labels(const std::vector<int> &assignment) {
  std::map<int, int> relabel;
  std::vector<int> out(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto [it, inserted] =
        relabel.try_emplace(assignment[i], static_cast<int>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

bool separates(const std::vector<int> &assignment, const CannotLinkSet &links) {
  return std::all_of(links.pairs.begin(), links.pairs.end(), [&](auto p) {
    return assignment[p.first] != assignment[p.second];
  });
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace

std::vector<int> Dendrogram::cut(std::size_t k) const {
  if (k < 1 || k > n)
    throw InvalidSpecError("dendrogram cut must lie in [1, n]");
  DisjointSets sets(n);
  for (std::size_t m = 0; m < n - k; ++m)
    sets.unite(merges[m].left, merges[m].right);
  std::vector<int> roots(n);
  for (std::size_t i = 0; i < n; ++i)
    roots[i] = static_cast<int>(sets.find(i));
  return canonical_labels(roots);
}

Dendrogram complete_linkage(const DistanceMatrix &d) {
  const std::size_t n = d.size();
  Dendrogram tree;
  tree.n = n;
  if (n < 2)
    return tree;
  Eigen::MatrixXd link = d.entries();
  // Active clusters are named by their smallest member and kept sorted.
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  tree.merges.reserve(n - 1);

  while (active.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      const std::size_t a = active[x];
      const double *col = link.col(static_cast<Eigen::Index>(a)).data();
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double v = col[active[y]];
        if (v < best) {
          best = v;
          ba = x;
          bb = y;
        }
      }
    }
    const auto a = static_cast<Eigen::Index>(active[ba]);
    const auto b = static_cast<Eigen::Index>(active[bb]);
    tree.merges.push_back({active[ba], active[bb], best});
    for (std::size_t idx : active) {
      const auto x = static_cast<Eigen::Index>(idx);
      if (x == a || x == b)
        continue;
      const double v = std::max(link(a, x), link(b, x));
      link(a, x) = v;
      link(x, a) = v;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return tree;
}

ClusterResult hierarchical_cluster(const DistanceMatrix &d, std::size_t max_k,
                                   double eps) {
  const std::size_t n = d.size();
  if (n == 0)
    throw ValidationError("nothing to cluster");
  if (max_k < 1)
    throw InvalidSpecError("cluster bound K must be >= 1");
  const Dendrogram tree = complete_linkage(d);
  const CannotLinkSet links = cannot_links(d, eps);

  // A complete-linkage merge height is the largest distance across the two
  // merged clusters, so the cut after m merges keeps every cannot-link pair
  // apart iff none of those m heights exceeds eps.
  std::size_t valid_merges = 0;
  while (valid_merges < tree.merges.size() &&
         tree.merges[valid_merges].height <= eps)
    ++valid_merges;
  const std::size_t k = n - valid_merges;
  const std::size_t bound = std::min(max_k, n);

  if (k > bound) {
    const auto labels = tree.cut(bound);
    for (const auto &[i, j] : links.pairs)
      if (labels[i] == labels[j])
        throw InfeasibleError("no cut with at most " + std::to_string(max_k) +
                                  " clusters separates the cannot-link pair (" +
                                  std::to_string(i) + ", " + std::to_string(j) +
                                  ")",
                              i, j);
    throw InfeasibleError("cluster bound too small", 0, 0);
  }

  ClusterResult result;
  result.k = k;
  result.assignment = tree.cut(k);
  result.algorithm = Algorithm::Hierarchical;
  result.epsilon = eps;
  return result;
}

namespace {

std::optional<std::vector<int>>
cop_kmeans_run(const Eigen::MatrixXd &x,
               const std::vector<std::vector<std::size_t>> &neighbours,
               std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::mt19937_64 rng(seed);

  // Farthest-point initialisation from a seeded first centre.
  std::vector<std::size_t> seeds{static_cast<std::size_t>(rng() % n)};
  Eigen::VectorXd nearest =
      (x.rowwise() - x.row(static_cast<Eigen::Index>(seeds[0])))
          .rowwise()
          .squaredNorm();
  while (seeds.size() < k) {
    Eigen::Index far = 0;
    nearest.maxCoeff(&far);
    seeds.push_back(static_cast<std::size_t>(far));
    nearest = nearest.cwiseMin(
        (x.rowwise() - x.row(far)).rowwise().squaredNorm());
  }
  Eigen::MatrixXd centres(k, x.cols());
  for (std::size_t c = 0; c < k; ++c)
    centres.row(c) = x.row(static_cast<Eigen::Index>(seeds[c]));

  std::vector<int> assign(n, -1), next(n, -1);
  std::vector<std::pair<double, int>> order(k);
  for (int iter = 0; iter < 100; ++iter) {
    std::fill(next.begin(), next.end(), -1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c)
        order[c] = {(centres.row(c) - x.row(i)).squaredNorm(),
                    static_cast<int>(c)};
      std::sort(order.begin(), order.end());
      int chosen = -1;
      for (const auto &[dist, c] : order) {
        const bool clash =
            std::any_of(neighbours[i].begin(), neighbours[i].end(),
                        [&](std::size_t j) { return next[j] == c; });
        if (!clash) {
          chosen = c;
          break;
        }
      }
      if (chosen < 0)
        return std::nullopt;
      next[i] = chosen;
    }
    if (next == assign)
      break;
    assign = next;
    for (std::size_t c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == static_cast<int>(c)) {
          sum += x.row(i);
          ++count;
        }
      if (count)
        centres.row(c) = sum / static_cast<double>(count);
    }
  }
  return canonical_labels(assign);
}

} // namespace

ClusterResult constrained_kmeans(const Eigen::MatrixXd &vectors,
                                 const CannotLinkSet &links, std::size_t max_k,
                                 std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (n == 0)
    throw ValidationError("nothing to cluster");
  if (max_k < 1)
    throw InvalidSpecError("cluster bound K must be >= 1");
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (const auto &[i, j] : links.pairs) {
    neighbours[i].push_back(j);
    neighbours[j].push_back(i);
  }
  for (std::size_t k = 1; k <= std::min(max_k, n); ++k) {
    auto labels = cop_kmeans_run(vectors, neighbours, k, seed);
    if (!labels)
      continue;
    ClusterResult result;
    result.k = static_cast<std::size_t>(
                   *std::max_element(labels->begin(), labels->end())) +
               1;
    result.assignment = std::move(*labels);
    result.algorithm = Algorithm::ConstrainedKMeans;
    return result;
  }
  const auto pair = links.pairs.empty() ? std::pair<std::size_t, std::size_t>{}
                                        : links.pairs.front();
  throw InfeasibleError("constrained k-means found no feasible clustering with "
                        "at most " +
                            std::to_string(max_k) + " clusters",
                        pair.first, pair.second);
}

Eigen::MatrixXd kmeans_embedding(std::span<const FunctionalCurve> curves,
                                 const DistanceSpec &spec) {
  if (curves.empty())
    return {};
  const DistanceGrid<double> grid(curves[0].lo(), curves[0].hi(), spec);
  Eigen::MatrixXd samples = sample_matrix<double>(curves, spec);
  return samples * grid.weights.cwiseSqrt().asDiagonal();
}

FunctionalCurve mean_curve(std::span<const FunctionalCurve> members,
                           const DistanceSpec &spec) {
  if (members.empty())
    throw ValidationError("mean of an empty curve set");
  const bool shared = std::all_of(members.begin(), members.end(), [&](auto &c) {
    return c.basis == members[0].basis;
  });
  FunctionalCurve out;
  out.basis = members[0].basis;
  if (shared) {
    out.coefficients = VectorX<double>::Zero(out.basis.n_basis);
    for (const auto &c : members)
      out.coefficients += c.coefficients;
    out.coefficients /= static_cast<double>(members.size());
    return out;
  }
  DistanceSpec value_spec = spec;
  value_spec.deriv_order = 0;
  const DistanceGrid<double> grid(out.lo(), out.hi(), value_spec);
  const Eigen::VectorXd mean =
      sample_matrix<double>(members, value_spec).colwise().mean().transpose();
  return CurveFitter<double>(grid.nodes, out.basis).fit(mean);
}

ClusterResult cluster_curves(std::span<const FunctionalCurve> curves,
                             std::size_t max_k, const DistanceSpec &spec,
                             double eps, Algorithm algo, std::uint64_t seed) {
  if (!(eps > 0.0))
    throw InvalidSpecError("epsilon must be > 0");
  const DistanceMatrix d = distance_matrix(curves, spec);
  ClusterResult result;
  switch (algo) {
  case Algorithm::Hierarchical:
    result = hierarchical_cluster(d, max_k, eps);
    break;
  case Algorithm::ConstrainedKMeans:
    if (spec.norm != Norm::L2)
      throw UnsupportedNormError(
          "constrained k-means needs the 2-norm distance");
    result = constrained_kmeans(kmeans_embedding(curves, spec),
                                cannot_links(d, eps), max_k, seed);
    break;
  case Algorithm::NonFunctional:
    throw InvalidSpecError("non-functional clustering works on raw traces");
  }
  result.epsilon = eps;
  result.spec = spec;
  for (const auto &group : result.members()) {
    std::vector<FunctionalCurve> member_curves;
    for (std::size_t i : group)
      member_curves.push_back(curves[i]);
    result.centroids.push_back(mean_curve(member_curves, spec));
  }
  return result;
}

ClusterResult fd_clustering(const std::vector<HyperTrace> &hypertraces,
                            std::size_t max_k, const DistanceSpec &spec,
                            double eps, Algorithm algo, std::uint64_t seed) {
  std::vector<FunctionalCurve> curves;
  curves.reserve(hypertraces.size());
  for (const auto &h : hypertraces)
    curves.push_back(h.timing_curve);
  return cluster_curves(curves, max_k, spec, eps, algo, seed);
}

std::size_t nonfunctional_cluster(const TraceSet &traces, double eps) {
  traces.validate();
  std::map<double, std::map<std::vector<double>, std::vector<double>>> cells;
  for (const auto &r : traces.records)
    cells[r.pub[0]][r.secret].push_back(r.time);

  std::size_t best = traces.records.empty() ? 0 : 1;
  for (auto &[y, per_secret] : cells) {
    std::vector<double> means;
    means.reserve(per_secret.size());
    for (auto &[secret, times] : per_secret) {
      std::sort(times.begin(), times.end());
      double sum = 0.0;
      for (double t : times)
        sum += t;
      means.push_back(sum / static_cast<double>(times.size()));
    }
    const auto n = static_cast<Eigen::Index>(means.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        d(i, j) = std::abs(means[i] - means[j]);
    const auto result = hierarchical_cluster(DistanceMatrix(std::move(d)),
                                             means.size(), eps);
    best = std::max(best, result.k);
  }
  return best;
}

} // namespace fsc
