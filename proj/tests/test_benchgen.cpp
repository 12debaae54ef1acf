// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <set>

#include "fsc/benchgen.hpp"

using namespace fsc;

namespace {

BenchModel model(BenchKind kind, double sigma = 0.0) {
  BenchModel m;
  m.kind = kind;
  m.noise_sigma = sigma;
  return m;
}

} // namespace

TEST_CASE("zigzag base times") {
  const auto m = model(BenchKind::Zigzag);
  CHECK(base_execution(m, {2}, 4).time == 0.003);
  CHECK(base_execution(m, {2}, 5).time == 0.001);
  for (double y = 1; y <= 20; ++y)
    CHECK(base_execution(m, {3}, y).time == 0.002);
}

TEST_CASE("process-bid records above the secret") {
  const auto m = model(BenchKind::ProcessBid);
  CHECK(base_execution(m, {50}, 49).time < base_execution(m, {50}, 51).time);
  CHECK(base_execution(m, {50}, 49).time == 0.001);
  CHECK(base_execution(m, {50}, 50).time == 0.003);
}

TEST_CASE("jetty loop count is the shorter length") {
  const auto m = model(BenchKind::StrcmpJetty);
  const double want[] = {1, 2, 3, 3, 3};
  for (int y = 1; y <= 5; ++y)
    CHECK(base_execution(m, {3, 0}, y).aux[0] == want[y - 1]);
  CHECK(aux_names(m) == std::vector<std::string>{"stringEquals_bblock_118"});
  CHECK(canonical_secrets(m).size() == 200);
}

TEST_CASE("branch-loop arms and variants") {
  auto m = model(BenchKind::BranchLoop);
  CHECK(base_execution(m, {50}, 16).time == doctest::Approx(5e-3));
  CHECK(base_execution(m, {150}, 16).time == doctest::Approx(16e-3));
  CHECK(base_execution(m, {200}, 16).time == doctest::Approx(80e-3));
  CHECK(base_execution(m, {300}, 16).time == doctest::Approx(256e-3));
  CHECK(base_execution(m, {50}, 0).time == 0.0);
  CHECK(canonical_secrets(m).size() == 36);
  CHECK(canonical_publics(m).size() == 21);
  m.params["variants"] = 2;
  CHECK(aux_names(m).size() == 8);
  CHECK(canonical_secrets(m).size() == 72);
  CHECK(base_execution(m, {10}, 16).time == doctest::Approx(5e-3));
  CHECK(base_execution(m, {60}, 16).time == doctest::Approx(10e-3));
  CHECK(base_execution(m, {60}, 16).aux[1] == 10.0);
  m.params["variants"] = 6;
  CHECK(canonical_secrets(m).size() == 1152);
}

TEST_CASE("modpow slope follows the popcount") {
  const auto m = model(BenchKind::ModpowGabfeed);
  const auto e = base_execution(m, {0b1011}, 10);
  CHECK(e.time == doctest::Approx(0.5 + 0.01 * 3 * 10));
  CHECK(e.aux[0] == 20.0);
  const auto s = canonical_secrets(m, 500);
  std::set<std::vector<double>> distinct(s.begin(), s.end());
  CHECK(distinct.size() == 500);
  CHECK(!distinct.count({0.0}));
}

TEST_CASE("seeded determinism and noise") {
  auto m = model(BenchKind::Zigzag, 1e-4);
  m.seed = 9;
  const auto secrets = canonical_secrets(m);
  const auto publics = canonical_publics(m);
  const auto a = generate(m, secrets, publics);
  const auto b = generate(m, secrets, publics);
  REQUIRE(a.records.size() == b.records.size());
  bool noisy = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].time == b.records[i].time);
    noisy |= a.records[i].time != base_execution(m, a.records[i].secret, a.records[i].pub[0]).time;
  }
  CHECK(noisy);

  // A secret's samples do not depend on which other secrets are generated.
  const auto tail = generate(m, {secrets[0]}, publics);
  for (std::size_t j = 0; j < publics.size(); ++j)
    CHECK(tail.records[j].time == a.records[j].time);

  m.seed = 10;
  const auto c = generate(m, secrets, publics);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(c.records[i].aux == a.records[i].aux);

  auto exact = model(BenchKind::GuessSecret2);
  const auto e = generate(exact, canonical_secrets(exact, 10), canonical_publics(exact));
  for (const auto &r : e.records)
    CHECK(r.time == base_execution(exact, r.secret, r.pub[0]).time);
}

TEST_CASE("config parsing") {
  const auto c = parse_bench_config(
      "# model\nkind = branch-loop\nvariants = 2\nnoise_sigma = 0\nseed = 4\n"
      "publics_from = 0\npublics_to = 50\npublics_step = 10\n");
  CHECK(c.model.kind == BenchKind::BranchLoop);
  CHECK(c.model.param("variants") == 2.0);
  CHECK(c.model.seed == 4);
  CHECK(c.publics == std::vector<double>{0, 10, 20, 30, 40, 50});
  const auto again = parse_bench_config(to_config_text(c));
  CHECK(again.model.params == c.model.params);
  CHECK(again.publics == c.publics);
  CHECK_THROWS_AS(parse_bench_config("kind = nope\n"), InvalidSpecError);
  CHECK_THROWS_AS(parse_bench_config("kind = zigzag\nwidth = 3\n"), InvalidSpecError);
  CHECK_THROWS_AS(parse_bench_config("kind = zigzag\nnoise_sigma = -1\n"), InvalidSpecError);
  CHECK_THROWS_AS(parse_bench_config("kind zigzag\n"), ParseError);
  CHECK_THROWS_AS(parse_bench_config("kind = branch-loop\nvariants = 1.5\n"),
                  InvalidSpecError);
}
