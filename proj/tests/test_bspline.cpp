// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <random>

#include "fsc/bspline.hpp"
#include "helpers.hpp"

using namespace fsc;
using fsc::testing::naive_eval;
using fsc::testing::sampled_fit;

TEST_CASE("make_basis builds clamped uniform knots") {
  const auto single = make_basis(0.0, 1.0, 4, 4);
  CHECK(single.knots.size() == 8);
  for (int j = 0; j < 4; ++j) {
    CHECK(single.knots[j] == 0.0);
    CHECK(single.knots[4 + j] == 1.0);
  }

  const auto b = make_basis(0.0, 10.0, 6, 4);
  REQUIRE(b.knots.size() == 10);
  CHECK(b.knots[4] == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(b.knots[5] == doctest::Approx(20.0 / 3.0).epsilon(1e-15));
  CHECK(b.knots[3] == 0.0);
  CHECK(b.knots[6] == 10.0);
}

TEST_CASE("make_basis rejects bad specs") {
  CHECK_THROWS_AS(make_basis(0.0, 1.0, 3, 4), InvalidSpecError);
  CHECK_THROWS_AS(make_basis(0.0, 1.0, 4, 1), InvalidSpecError);
  CHECK_THROWS_AS(make_basis(1.0, 1.0, 6, 4), InvalidSpecError);
}

TEST_CASE("default basis size") {
  CHECK(default_basis(0.0, 1.0, 20).n_basis == 10);
  CHECK(default_basis(0.0, 1.0, 21).n_basis == 11);
  CHECK(default_basis(0.0, 1.0, 100).n_basis == 20);
  CHECK(default_basis(0.0, 1.0, 5).n_basis == 4);
}

TEST_CASE("de Boor agrees with the recursive basis definition") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int order : {2, 3, 4, 5}) {
    FunctionalCurve c;
    c.basis = make_basis(-1.0, 2.0, 9, order);
    c.coefficients.resize(9);
    for (int j = 0; j < 9; ++j)
      c.coefficients[j] = u(rng);
    for (int s = 0; s <= 60; ++s) {
      const double y = -1.0 + 3.0 * s / 60;
      CHECK(eval_curve(c, y) == doctest::Approx(naive_eval(c, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("constants are reproduced") {
  const auto b = make_basis(0.0, 5.0, 8);
  const auto c = sampled_fit([](double) { return 5.0; }, b, 8);
  for (double y = 0.0; y <= 5.0; y += 0.125) {
    CHECK(std::abs(eval_curve(c, y) - 5.0) <= 1e-9);
    CHECK(std::abs(eval_curve(c, y, 1)) <= 1e-12);
  }
}

TEST_CASE("polynomials of degree below the order are reproduced") {
  const auto b = make_basis(-2.0, 3.0, 11);
  const std::function<double(double)> polys[] = {
      [](double y) { return y * y; },
      [](double y) { return 1.5 - 2.0 * y + 0.25 * y * y * y; },
      [](double y) { return 4.0 * y; },
  };
  for (const auto &f : polys) {
    const auto c = sampled_fit(f, b, 40);
    double worst = 0.0;
    for (int s = 0; s <= 500; ++s) {
      const double y = -2.0 + 5.0 * s / 500;
      worst = std::max(worst, std::abs(eval_curve(c, y) - f(y)));
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("derivative of a fitted square") {
  const auto c = sampled_fit([](double y) { return y * y; }, make_basis(0.0, 1.0, 6));
  CHECK(eval_curve(c, 0.5, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(eval_curve(c, 0.25, 2) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(eval_curve(c, 0.25, 3) == doctest::Approx(0.0));
  CHECK(eval_curve(c, 0.25, 4) == 0.0);
  CHECK(eval_curve(c, 0.25, 7) == 0.0);
}

TEST_CASE("first derivative matches central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto b = make_basis(0.0, 20.0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    FunctionalCurve c{b, Eigen::VectorXd(12)};
    for (int j = 0; j < 12; ++j)
      c.coefficients[j] = u(rng);
    const double h = 1e-5 * (b.hi - b.lo);
    for (int s = 1; s < 40; ++s) {
      const double y = b.lo + (b.hi - b.lo) * (s + 0.37) / 40;
      const double fd = (eval_curve(c, y + h) - eval_curve(c, y - h)) / (2 * h);
      const double an = eval_curve(c, y, 1);
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(std::abs(an), 1e-3));
    }
  }
}

TEST_CASE("fit preconditions") {
  const auto b = make_basis(0.0, 1.0, 4);
  std::vector<Point> three{{0.0, 1.0}, {0.5, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(fit_curve<double>(three, b), UnderDeterminedError);
  std::vector<Point> repeated{{0.0, 1.0}, {0.0, 2.0}, {0.5, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(fit_curve<double>(repeated, b), UnderDeterminedError);
  std::vector<Point> outside{{0.0, 1.0}, {0.3, 1.0}, {0.6, 1.0}, {1.5, 1.0}};
  CHECK_THROWS_AS(fit_curve<double>(outside, b), DomainError);
  const auto c = sampled_fit([](double y) { return y; }, b, 8);
  CHECK_THROWS_AS(eval_curve(c, 1.0001), DomainError);
  CHECK_THROWS_AS(eval_curve(c, -0.1, 1), DomainError);
  CHECK_NOTHROW(eval_curve(c, 1.0));
}

TEST_CASE("least squares residual is orthogonal to the basis") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto b = make_basis(0.0, 1.0, 7);
  std::vector<Point> pts;
  for (int j = 0; j < 30; ++j)
    pts.push_back({j / 29.0, n(rng)});
  const auto c = fit_curve<double>(pts, b);
  for (int i = 0; i < b.n_basis; ++i) {
    double dot = 0.0;
    for (const auto &p : pts)
      dot += (p.v - eval_curve(c, p.y)) *
             fsc::testing::naive_basis(b, i, b.order, p.y);
    CHECK(std::abs(dot) <= 1e-10);
  }
}

TEST_CASE("float instantiation") {
  const auto b = make_basis(0.0f, 1.0f, 5);
  std::vector<CurvePoint<float>> pts;
  for (int j = 0; j < 10; ++j)
    pts.push_back({j / 9.0f, 2.0f * (j / 9.0f)});
  const auto c = fit_curve<float>(pts, b);
  CHECK(eval_curve(c, 0.5f) == doctest::Approx(1.0f).epsilon(1e-4));
  CHECK(eval_curve(c, 0.5f, 1) == doctest::Approx(2.0f).epsilon(1e-3));
}
