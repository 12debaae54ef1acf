// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsc/clustering.hpp"

namespace fsc {

/// Timing samples collected against the remote target. The absolute offset
/// between remote and local clocks is unknown to the attacker.
struct RemoteObservation {
  std::vector<Point> samples;
  bool assumed_offset_unknown = true;
};

enum class MatchTarget { Centroid, NearestMember };

struct MatchOptions {
  MatchTarget target = MatchTarget::Centroid;
  /// Basis for the observation fit; the default basis when empty.
  std::optional<BasisSpec> basis;
};

struct MatchResult {
  int cluster = 0;
  /// The two smallest per-cluster distances differ by less than epsilon.
  bool ambiguous = false;
  std::vector<double> distances;
  double leakage_bits = 0.0;
  double kd_bound = 0.0;
};

/// Fits the observation (repeated y values averaged) on the clusters'
/// public domain.
FunctionalCurve fit_observation(const RemoteObservation &obs,
                                const ClusterResult &clusters,
                                const std::optional<BasisSpec> &basis = {});

/// argmin over clusters of d(observation, centroid); ties go to the lowest
/// id. NearestMember scores a cluster by its closest member curve instead and
/// needs `members` (one curve per clustered secret).
MatchResult match_remote(const RemoteObservation &obs,
                         const ClusterResult &clusters,
                         const DistanceSpec &spec,
                         const MatchOptions &options = {},
                         const std::vector<FunctionalCurve> &members = {});

double leakage_bits(std::size_t k);
double kd_bound(std::size_t k, std::size_t n);

} // namespace fsc
