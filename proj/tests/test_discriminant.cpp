// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "fsc/benchgen.hpp"
#include "fsc/discriminant.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fsc;
using namespace fsc::testing;

namespace {

std::vector<Feature> categorical(std::size_t n) {
  std::vector<Feature> f;
  for (std::size_t j = 0; j < n; ++j)
    f.push_back({"f" + std::to_string(j), FeatureKind::Categorical, {}});
  return f;
}

HyperTrace with_aux(std::vector<double> secret, const FunctionalCurve &timing,
                    std::vector<FunctionalCurve> aux) {
  return {std::move(secret), std::move(aux), timing, 0};
}

} // namespace

TEST_CASE("trivial trees") {
  std::vector<LabeledRow> same{{{1}, {0}, 2}, {{2}, {1}, 2}, {{3}, {0}, 2}};
  const auto t = learn_tree(same, categorical(1));
  CHECK(t.nodes.size() == 1);
  CHECK(t.height() == 0);
  CHECK(predict(t, {5}) == 2);

  std::vector<LabeledRow> two{{{1}, {0}, 0}, {{2}, {1}, 1}};
  const auto s = learn_tree(two, categorical(1));
  REQUIRE(!s.nodes[0].leaf);
  CHECK(s.nodes[0].feature == 0);
  CHECK(s.nodes[0].value == 0.0);
  CHECK(s.leaf_count() == 2);
  CHECK(predict(s, {0}) == 0);
  CHECK(predict(s, {1}) == 1);
  CHECK(predict(s, {25}) == 1); // unseen label takes the != branch
  CHECK_THROWS(learn_tree({}, categorical(1)));
  CHECK_THROWS(predict(s, {0, 1}));
}

TEST_CASE("root split equals exhaustive Gini search") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + trial % 7, nf = 1 + trial % 3;
    std::vector<Feature> feats;
    for (std::size_t f = 0; f < nf; ++f)
      feats.push_back({"f", (trial + f) % 2 ? FeatureKind::Numeric
                                            : FeatureKind::Categorical, {}});
    std::vector<LabeledRow> rows(n);
    for (auto &r : rows) {
      for (std::size_t f = 0; f < nf; ++f)
        r.features.push_back(double(rng() % 4));
      r.target = int(rng() % 3);
    }
    const auto cands = all_splits(rows, feats);
    double best = 0.0;
    for (const auto &c : cands)
      best = std::max(best, c.gain);
    std::vector<std::size_t> subset(n);
    for (std::size_t i = 0; i < n; ++i)
      subset[i] = i;
    const auto got = best_split(rows, subset, feats, 3, 1);
    if (best <= 1e-12) {
      CHECK(!got);
      continue;
    }
    REQUIRE(got);
    CHECK(got->gain == doctest::Approx(best).epsilon(1e-12));
    const auto first = std::find_if(cands.begin(), cands.end(), [&](auto &c) {
      return c.gain >= best - 1e-12;
    });
    CHECK(got->feature == first->feature);
    CHECK(got->value == first->value);
  }
}

TEST_CASE("consistent data is learned exactly and order does not matter") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledRow> rows;
    std::set<std::vector<double>> seen;
    while (rows.size() < 30) {
      std::vector<double> f{double(rng() % 5), double(rng() % 5), double(rng() % 3)};
      if (!seen.insert(f).second)
        continue;
      rows.push_back({{double(rows.size())}, f, int((f[0] + 2 * f[2]) ) % 4});
    }
    auto feats = categorical(3);
    feats[2].kind = FeatureKind::Numeric;
    const auto t = learn_tree(rows, feats);
    CHECK(training_accuracy(t, rows) == 1.0);
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto u = learn_tree(shuffled, feats);
    for (const auto &r : rows)
      CHECK(predict(t, r.features) == predict(u, r.features));
    for (const auto &n : t.nodes) {
      if (!n.leaf)
        continue;
      std::size_t s = 0;
      for (auto h : n.histogram)
        s += h;
      CHECK(s > 0);
    }
  }
}

TEST_CASE("options limit the tree") {
  std::vector<LabeledRow> rows;
  for (int i = 0; i < 8; ++i)
    rows.push_back({{double(i)}, {double(i)}, i % 4});
  std::vector<Feature> num{{"x", FeatureKind::Numeric, {}}};
  CHECK(learn_tree(rows, num, {1, 1}).height() == 1);
  CHECK(learn_tree(rows, num).leaf_count() == 8);
  CHECK(learn_tree(rows, num, {std::nullopt, 4}).leaf_count() <= 2);
}

TEST_CASE("cross-validation") {
  std::vector<LabeledRow> rows;
  for (int i = 0; i < 40; ++i)
    rows.push_back({{double(i)}, {double(i % 2)}, i % 2});
  CHECK(cross_validate(rows, categorical(1), 20, 3) == 1.0);
  CHECK(cross_validate(rows, categorical(1), 20, 3) ==
        cross_validate(rows, categorical(1), 20, 3));
  CHECK_THROWS_AS(cross_validate(rows, categorical(1), 41, 0), InvalidSpecError);

  std::vector<LabeledRow> clash{{{0}, {1}, 0}, {{1}, {1}, 1}, {{2}, {1}, 0}, {{3}, {1}, 1}};
  CHECK(cross_validate(clash, categorical(1), 4, 0) < 1.0);
}

TEST_CASE("prediction error") {
  const auto b = make_basis(0.0, 1.0, 4);
  const auto f = fsc::testing::sampled_fit([](double y) { return y; }, b);
  const auto g = fsc::testing::sampled_fit([](double y) { return 2 * y; }, b);
  const DistanceSpec spec{0, Norm::L2};
  std::vector<HyperTrace> hts{with_aux({0}, f, {}), with_aux({1}, g, {})};
  std::vector<LabeledRow> rows{{{0}, {0}, 0}, {{1}, {1}, 1}};
  const auto feats = categorical(1);

  const auto split = cluster_curves(std::vector<FunctionalCurve>{f, g}, 2, spec,
                                    0.1, Algorithm::Hierarchical);
  REQUIRE(split.k == 2);
  Discriminant d2{split, learn_tree(rows, feats)};
  CHECK(d2.size() == 2);
  CHECK(discriminant_error(hts, rows, d2, spec) <= 1e-12);

  const auto merged = cluster_curves(std::vector<FunctionalCurve>{f, g}, 2,
                                     spec, 10.0, Algorithm::Hierarchical);
  REQUIRE(merged.k == 1);
  std::vector<LabeledRow> one{{{0}, {0}, 0}, {{1}, {1}, 0}};
  Discriminant d1{merged, learn_tree(one, feats)};
  const double mu = discriminant_error(hts, one, d1, spec);
  CHECK(mu == doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-6));
  CHECK(discriminant_error(hts, rows, d2, spec) <= mu);

  std::vector<HyperTrace> single{with_aux({0}, f, {})};
  const auto own = cluster_curves(std::vector<FunctionalCurve>{f}, 1, spec, 0.1,
                                  Algorithm::Hierarchical);
  std::vector<LabeledRow> r1{{{0}, {0}, 0}};
  CHECK(discriminant_error(single, r1, {own, learn_tree(r1, feats)}, spec) == 0.0);
}

TEST_CASE("aux labelling") {
  const auto b = make_basis(1.0, 65.0, 20);
  const auto timing = fsc::testing::sampled_fit([](double) { return 1.0; }, b);
  const DistanceSpec spec{0, Norm::L2};

  std::vector<HyperTrace> same;
  const auto lin = fsc::testing::sampled_fit([](double y) { return 2 * y; }, b);
  for (int i = 0; i < 5; ++i)
    same.push_back(with_aux({double(i)}, timing, {lin}));
  const auto s = label_aux(same, 0, 0.001, 5, spec);
  CHECK(s.kind == FeatureKind::Categorical);
  CHECK(std::set<double>(s.values.begin(), s.values.end()).size() == 1);

  std::vector<HyperTrace> slopes;
  const double cs[] = {3, 127, 251};
  for (int i = 0; i < 9; ++i) {
    const double c = cs[i % 3];
    slopes.push_back(with_aux({double(i)}, timing,
                              {fsc::testing::sampled_fit([c](double y) { return c * y; }, b, 65)}));
  }
  const auto l = label_aux(slopes, 0, 0.001, 9, spec);
  REQUIRE(l.label_text.size() == 3);
  CHECK(l.label_text[0] == "L1 (3*y)");
  CHECK(l.label_text[1] == "L2 (127*y)");
  CHECK(l.label_text[2] == "L3 (251*y)");
  for (int i = 0; i < 9; ++i)
    CHECK(l.values[i] == double(i % 3));

  std::vector<HyperTrace> consts;
  for (int i = 0; i < 4; ++i)
    consts.push_back(with_aux({double(i)}, timing,
                              {fsc::testing::sampled_fit([i](double) { return 10.0 * i; }, b)}));
  const auto n = label_aux(consts, 0, 0.001, 4, spec);
  CHECK(n.kind == FeatureKind::Numeric);
  CHECK(n.values == std::vector<double>{0, 10, 20, 30});
}

TEST_CASE("loop-count aux groups by secret length") {
  BenchModel m;
  m.kind = BenchKind::StrcmpJetty;
  m.noise_sigma = 0.0;
  const TraceSet t = generate(m, canonical_secrets(m, 60), canonical_publics(m));
  const auto hts = build_hypertraces(t, default_basis(t));
  const auto l = label_aux(hts, 0, 0.001, hts.size(), {0, Norm::L2});
  CHECK(l.label_text.size() == 20);
  for (std::size_t i = 0; i < hts.size(); ++i)
    for (std::size_t j = 0; j < hts.size(); ++j)
      CHECK((l.values[i] == l.values[j]) == (hts[i].secret[0] == hts[j].secret[0]));
}

TEST_CASE("tree export") {
  std::vector<LabeledRow> rows{{{0}, {0, 5}, 0}, {{1}, {1, 5}, 1}, {{2}, {1, 9}, 2}};
  std::vector<Feature> feats{{"loop", FeatureKind::Categorical, {"L1", "L2"}},
                             {"size", FeatureKind::Numeric, {}}};
  const auto t = learn_tree(rows, feats);
  const std::string text = tree_to_text(t);
  CHECK(text.find("loop = L1") != std::string::npos);
  CHECK(text.find("size <= 7") != std::string::npos);
  CHECK(text.find("cluster 2 [support 1]") != std::string::npos);
  const std::string dot = tree_to_dot(t);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("support 1") != std::string::npos);
  CHECK(dot.find("-> n") != std::string::npos);
}
