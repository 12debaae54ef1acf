// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <random>

#include "fsc/benchgen.hpp"
#include "fsc/clustering.hpp"
#include "fsc/mitigation.hpp"

using namespace fsc;

TEST_CASE("quantize examples") {
  CHECK(quantize(3.2, 4.5) == 4.5);
  CHECK(quantize(9.0, 4.5) == 9.0);
  CHECK(quantize(9.1, 4.5) == 13.5);
  CHECK(quantize(0.0, 4.5) == 4.5);
  CHECK_THROWS_AS(quantize(1.0, 0.0), InvalidSpecError);
}

TEST_CASE("quantize properties") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 100.0);
  for (double q : {0.001, 0.3, 4.5, 7.0}) {
    double prev_t = 0.0, prev_q = quantize(0.0, q);
    for (int i = 0; i < 2000; ++i) {
      const double x = prev_t + t(rng) / 200;
      const double y = quantize(x, q);
      CHECK(y >= x);
      const double m = std::round(y / q);
      CHECK(std::abs(y - m * q) <= std::nextafter(y, INFINITY) - y);
      CHECK(y >= prev_q);
      prev_t = x;
      prev_q = y;
    }
  }
}

TEST_CASE("double scheme examples") {
  const std::vector<double> a{3.0};
  CHECK(double_scheme(a, 4.0) == std::vector<double>{4.0});
  const std::vector<double> b{4.0, 4.5};
  CHECK(double_scheme(b, 4.0) == std::vector<double>{4.0, 5.0});
  const std::vector<double> flat(10, 2.5);
  const auto out = double_scheme(flat, 4.0);
  CHECK(std::all_of(out.begin(), out.end(), [](double v) { return v == 4.0; }));
  const std::vector<double> late(5, 100.3);
  const auto l = double_scheme(late, 4.0);
  CHECK(std::all_of(l.begin(), l.end(), [](double v) { return v == 102.0; }));
}

TEST_CASE("double scheme epochs") {
  // Epoch 0 ends at 4 + 63; a later time opens epoch 1 on a multiple of 2.
  const std::vector<double> t{10.2, 67.0, 67.5, 70.1, 71.0, 200.0, 203.5};
  const auto o = double_scheme(t, 4.0);
  CHECK(o[0] == 11.0);
  CHECK(o[1] == 67.0);
  CHECK(o[2] == 68.0);
  CHECK(o[3] == 72.0);
  CHECK(o[4] == 72.0);
  CHECK(o[5] == 200.0);
  CHECK(o[6] == 204.0);
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(0.01);
  std::vector<double> many(5000);
  for (auto &x : many)
    x = e(rng);
  const auto m = double_scheme(many, 4.0);
  for (std::size_t i = 0; i < many.size(); ++i)
    CHECK(m[i] >= many[i]);
}

TEST_CASE("mitigated traces") {
  BenchModel g;
  g.kind = BenchKind::ModpowGabfeed;
  const TraceSet raw = generate(g, canonical_secrets(g, 30), canonical_publics(g));
  double hi = 0.0;
  for (const auto &r : raw.records)
    hi = std::max(hi, r.time);

  const auto q = mitigate_traces(raw, {MitigationKind::Quantize, hi + 1.0});
  for (std::size_t i = 0; i < raw.records.size(); ++i) {
    CHECK(q.records[i].time == hi + 1.0);
    CHECK(q.records[i].aux == raw.records[i].aux);
  }
  const auto hts = build_hypertraces(q, default_basis(q));
  CHECK(fd_clustering(hts, hts.size(), {1, Norm::L2}, 0.01,
                      Algorithm::Hierarchical).k == 1);

  const auto d = mitigate_traces(raw, {MitigationKind::DoubleScheme, 1.0, 4.0});
  for (std::size_t i = 0; i < raw.records.size(); ++i)
    CHECK(d.records[i].time >= raw.records[i].time);
  CHECK_THROWS_AS(mitigate_traces(raw, {MitigationKind::Quantize, -1.0}),
                  InvalidSpecError);
}

TEST_CASE("double scheme runs per secret in public order") {
  TraceSet t;
  t.secret_names = {"s"};
  // Records listed in descending public order; the later public has the
  // large time that forces a miss.
  t.records.push_back({{1}, {2}, {}, 100.0});
  t.records.push_back({{1}, {1}, {}, 5.5});
  t.records.push_back({{2}, {1}, {}, 5.5});
  const auto m = mitigate_traces(t, {MitigationKind::DoubleScheme, 1.0, 4.0});
  CHECK(m.records[1].time == 6.0);
  CHECK(m.records[0].time == 100.0);
  CHECK(m.records[2].time == 6.0);
}
