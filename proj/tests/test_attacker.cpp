// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <random>

#include "fsc/attacker.hpp"
#include "fsc/benchgen.hpp"
#include "helpers.hpp"

using namespace fsc;

namespace {

RemoteObservation sample(const std::function<double(double)> &f, double lo,
                         double hi, int n) {
  RemoteObservation o;
  for (int j = 0; j < n; ++j) {
    const double y = lo + (hi - lo) * j / (n - 1);
    o.samples.push_back({y, f(y)});
  }
  return o;
}

ClusterResult two_lines() {
  const auto b = make_basis(0.0, 1.0, 4);
  std::vector<FunctionalCurve> c{
      fsc::testing::sampled_fit([](double y) { return y; }, b),
      fsc::testing::sampled_fit([](double y) { return 2 * y; }, b)};
  return cluster_curves(c, 2, {1, Norm::L2}, 0.1, Algorithm::Hierarchical);
}

} // namespace

TEST_CASE("closed-form matching") {
  const auto cl = two_lines();
  REQUIRE(cl.k == 2);
  const auto obs = sample([](double y) { return 1.9 * y + 5; }, 0, 1, 30);
  const auto m = match_remote(obs, cl, {1, Norm::L2});
  CHECK(m.cluster == 1);
  CHECK(m.distances[1] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(m.distances[0] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(!m.ambiguous);
  CHECK(m.leakage_bits == 1.0);

  const auto mid = sample([](double y) { return 1.52 * y; }, 0, 1, 30);
  CHECK(match_remote(mid, cl, {1, Norm::L2}).ambiguous);
}

TEST_CASE("value distance is refused") {
  const auto cl = two_lines();
  const auto obs = sample([](double y) { return y; }, 0, 1, 10);
  CHECK_THROWS_AS(match_remote(obs, cl, {0, Norm::L2}), ThreatModelError);
}

TEST_CASE("offset invariance and self matching on generated clusters") {
  BenchModel m;
  m.kind = BenchKind::StrcmpJetty;
  const TraceSet t = generate(m, canonical_secrets(m, 60), canonical_publics(m));
  const auto hts = build_hypertraces(t, default_basis(t));
  const auto cl = fd_clustering(hts, hts.size(), {1, Norm::L2}, 0.001,
                                Algorithm::Hierarchical);
  CHECK(cl.k == 20);
  const DistanceSpec spec{1, Norm::L2};
  for (std::size_t c = 0; c < cl.k; ++c) {
    const auto &centroid = cl.centroids[c];
    const auto self = sample([&](double y) { return eval_curve(centroid, y); },
                             1, 100, 100);
    const auto r = match_remote(self, cl, spec);
    CHECK(r.cluster == int(c));
    CHECK(r.distances[c] <= 1e-6);
    for (double off : {0.0, 0.37, 7.0, 250.0}) {
      RemoteObservation shifted = self;
      for (auto &p : shifted.samples)
        p.v += off;
      CHECK(match_remote(shifted, cl, spec).cluster == r.cluster);
    }
  }
  std::vector<FunctionalCurve> members;
  for (const auto &h : hts)
    members.push_back(h.timing_curve);
  const auto obs = sample([&](double y) { return 3.0 + eval_curve(hts[7].timing_curve, y); },
                          1, 100, 100);
  const auto near = match_remote(obs, cl, spec, {MatchTarget::NearestMember}, members);
  CHECK(near.cluster == cl.assignment[7]);
  CHECK(near.distances[cl.assignment[7]] <= 1e-6);
}

TEST_CASE("observations outside the domain") {
  const auto cl = two_lines();
  const auto obs = sample([](double y) { return y; }, 0, 1.5, 10);
  CHECK_THROWS_AS(match_remote(obs, cl, {1, Norm::L2}), DomainError);
  const auto few = sample([](double y) { return y; }, 0, 1, 3);
  CHECK_THROWS_AS(match_remote(few, cl, {1, Norm::L2}), UnderDeterminedError);
}

TEST_CASE("leakage figures") {
  CHECK(leakage_bits(1) == 0.0);
  CHECK(leakage_bits(2) == 1.0);
  CHECK(leakage_bits(20) == doctest::Approx(4.3219).epsilon(1e-4));
  CHECK(kd_bound(1, 0) == 0.0);
  CHECK(kd_bound(20, 800) == doctest::Approx(192.93).epsilon(1e-4));
  CHECK(kd_bound(4, 21123) == doctest::Approx(4 * std::log2(21124.0)).epsilon(1e-12));
  CHECK(std::abs(kd_bound(4, 21123) - 57.4) < 0.1);
  for (std::size_t k = 1; k < 50; ++k) {
    CHECK(leakage_bits(k + 1) > leakage_bits(k));
    CHECK(kd_bound(k + 1, 10) > kd_bound(k, 10));
    CHECK(kd_bound(k, 11) > kd_bound(k, 10));
  }
  CHECK_THROWS(leakage_bits(0));
}
