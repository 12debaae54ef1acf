// SPDX-License-Identifier: Apache-2.0

#include "fsc/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fsc/errors.hpp"

namespace fsc {

FunctionalCurve fit_observation(const RemoteObservation &obs,
                                const ClusterResult &clusters,
                                const std::optional<BasisSpec> &basis) {
  if (clusters.centroids.empty())
    throw ValidationError("no cluster centroids to match against");
  const double lo = clusters.centroids.front().lo();
  const double hi = clusters.centroids.front().hi();
  std::map<double, std::pair<double, std::size_t>> cells;
  for (const auto &p : obs.samples) {
    if (!std::isfinite(p.y) || !std::isfinite(p.v))
      throw ValidationError("non-finite observation sample");
    if (p.y < lo || p.y > hi)
      throw DomainError("observation public value " + std::to_string(p.y) +
                        " outside the cluster domain");
    auto &cell = cells[p.y];
    cell.first += p.v;
    ++cell.second;
  }
  std::vector<Point> points;
  for (const auto &[y, cell] : cells)
    points.push_back({y, cell.first / static_cast<double>(cell.second)});
  const BasisSpec b = basis ? *basis : default_basis(lo, hi, points.size());
  if (b.lo != lo || b.hi != hi)
    throw DomainError("observation basis does not cover the cluster domain");
  return fit_curve<double>(points, b);
}

MatchResult match_remote(const RemoteObservation &obs,
                         const ClusterResult &clusters,
                         const DistanceSpec &spec, const MatchOptions &options,
                         const std::vector<FunctionalCurve> &members) {
  if (spec.deriv_order < 1)
    throw ThreatModelError(
        "matching needs deriv_order >= 1: the remote clock offset is unknown");
  validate(spec);
  if (clusters.k == 0)
    throw ValidationError("empty clustering");
  const FunctionalCurve curve = fit_observation(obs, clusters, options.basis);

  MatchResult out;
  out.distances.assign(clusters.k, std::numeric_limits<double>::infinity());
  if (options.target == MatchTarget::Centroid) {
    for (std::size_t c = 0; c < clusters.k; ++c)
      out.distances[c] = distance(curve, clusters.centroids.at(c), spec);
  } else {
    if (members.size() != clusters.assignment.size())
      throw ValidationError("nearest-member matching needs every member curve");
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto &d = out.distances[static_cast<std::size_t>(clusters.assignment[i])];
      d = std::min(d, distance(curve, members[i], spec));
    }
  }
  const auto best = std::min_element(out.distances.begin(), out.distances.end());
  out.cluster = static_cast<int>(best - out.distances.begin());
  if (clusters.k > 1) {
    std::vector<double> sorted = out.distances;
    std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end());
    out.ambiguous = sorted[1] - sorted[0] < clusters.epsilon;
  }
  std::size_t publics = 0;
  {
    std::vector<double> ys;
    for (const auto &p : obs.samples)
      ys.push_back(p.y);
    std::sort(ys.begin(), ys.end());
    publics = static_cast<std::size_t>(
        std::unique(ys.begin(), ys.end()) - ys.begin());
  }
  out.leakage_bits = leakage_bits(clusters.k);
  out.kd_bound = kd_bound(clusters.k, publics);
  return out;
}

double leakage_bits(std::size_t k) {
  if (k < 1)
    throw InvalidSpecError("cluster count must be at least 1");
  return std::log2(static_cast<double>(k));
}

double kd_bound(std::size_t k, std::size_t n) {
  if (k < 1)
    throw InvalidSpecError("cluster count must be at least 1");
  return static_cast<double>(k) * std::log2(static_cast<double>(n) + 1.0);
}

} // namespace fsc
