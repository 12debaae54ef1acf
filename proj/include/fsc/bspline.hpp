// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fsc/errors.hpp"

namespace fsc {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Largest spline order supported by the fixed-size evaluation buffers.
inline constexpr int kMaxSplineOrder = 16;

/*
 * Clamped B-spline basis of a given order (degree = order - 1) on the closed
 * interval [lo, hi]. The knot vector has n_basis + order entries; the first
 * and last `order` knots coincide with the domain ends.
 */
template <typename Scalar> struct SplineBasis {
  int order = 4;
  int n_basis = 0;
  Scalar lo = 0;
  Scalar hi = 1;
  VectorX<Scalar> knots;

  int degree() const { return order - 1; }
  bool contains(Scalar y) const { return y >= lo && y <= hi; }

  friend bool operator==(const SplineBasis &a, const SplineBasis &b) {
    return a.order == b.order && a.n_basis == b.n_basis && a.lo == b.lo &&
           a.hi == b.hi && a.knots.size() == b.knots.size() &&
           a.knots == b.knots;
  }
};

template <typename Scalar>
void validate_basis(const SplineBasis<Scalar> &basis) {
  if (basis.order < 1 || basis.order > kMaxSplineOrder)
    throw InvalidSpecError("spline order must lie in [1, " +
                           std::to_string(kMaxSplineOrder) + "]");
  if (!(basis.lo < basis.hi))
    throw InvalidSpecError("basis domain requires lo < hi");
  if (basis.n_basis < basis.order)
    throw InvalidSpecError("n_basis must be >= order");
  if (basis.knots.size() != basis.n_basis + basis.order)
    throw InvalidSpecError("knot vector length must equal n_basis + order");
  for (Eigen::Index j = 1; j < basis.knots.size(); ++j)
    if (basis.knots[j] < basis.knots[j - 1])
      throw InvalidSpecError("knot vector must be non-decreasing");
}

/// Uniform clamped knot vector: n_basis - order interior knots split the
/// domain into equal spans.
template <typename Scalar>
SplineBasis<Scalar> make_basis(Scalar lo, Scalar hi, int n_basis,
                               int order = 4) {
  if (order < 2)
    throw InvalidSpecError("spline order must be >= 2");
  if (n_basis < order)
    throw InvalidSpecError("n_basis (" + std::to_string(n_basis) +
                           ") must be >= order (" + std::to_string(order) +
                           ")");
  if (!(lo < hi))
    throw InvalidSpecError("basis domain requires lo < hi");

  SplineBasis<Scalar> basis;
  basis.order = order;
  basis.n_basis = n_basis;
  basis.lo = lo;
  basis.hi = hi;
  basis.knots.resize(n_basis + order);
  const int interior = n_basis - order;
  for (int j = 0; j < order; ++j) {
    basis.knots[j] = lo;
    basis.knots[n_basis + j] = hi;
  }
  for (int j = 1; j <= interior; ++j)
    basis.knots[order - 1 + j] =
        lo + (hi - lo) * Scalar(j) / Scalar(interior + 1);
  validate_basis(basis);
  return basis;
}

/// Default smoothing basis for `distinct_publics` sample locations:
/// cubic, n_basis = min(ceil(P / 2), 20), never below the order.
template <typename Scalar>
SplineBasis<Scalar> default_basis(Scalar lo, Scalar hi,
                                  std::size_t distinct_publics) {
  constexpr int order = 4;
  const int half = static_cast<int>((distinct_publics + 1) / 2);
  return make_basis<Scalar>(lo, hi, std::max(order, std::min(half, 20)),
                            order);
}

/// Index mu of the knot span [t_mu, t_{mu+1}) containing y, restricted to the
/// non-degenerate spans. The right end of the domain belongs to the last span.
template <typename Scalar>
int find_span(const SplineBasis<Scalar> &basis, Scalar y) {
  const int first = basis.order - 1;
  const int last = basis.n_basis - 1;
  if (y >= basis.knots[last + 1])
    return last;
  auto begin = basis.knots.data() + first + 1;
  auto end = basis.knots.data() + last + 1;
  return first + static_cast<int>(std::upper_bound(begin, end, y) - begin);
}

/// Values of the `order` basis functions that are non-zero on the span of y
/// (functions span - order + 1 ... span), by the Cox-de Boor recursion.
template <typename Scalar>
int basis_values(const SplineBasis<Scalar> &basis, Scalar y,
                 std::array<Scalar, kMaxSplineOrder> &out) {
  const int span = find_span(basis, y);
  const auto &t = basis.knots;
  std::array<Scalar, kMaxSplineOrder> left{}, right{};
  out[0] = Scalar(1);
  for (int j = 1; j < basis.order; ++j) {
    left[j] = y - t[span + 1 - j];
    right[j] = t[span + j] - y;
    Scalar saved = 0;
    for (int r = 0; r < j; ++r) {
      const Scalar denom = right[r + 1] + left[j - r];
      const Scalar temp = denom == Scalar(0) ? Scalar(0) : out[r] / denom;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  return span;
}

/// A function represented as a linear combination of B-spline basis
/// functions.
template <typename Scalar> struct SplineCurve {
  SplineBasis<Scalar> basis;
  VectorX<Scalar> coefficients;

  Scalar lo() const { return basis.lo; }
  Scalar hi() const { return basis.hi; }
};

/// Curve scaled by alpha and shifted by offset (constants lie in the span by
/// partition of unity).
template <typename Scalar>
SplineCurve<Scalar> affine(const SplineCurve<Scalar> &curve, Scalar alpha,
                           Scalar offset = 0) {
  SplineCurve<Scalar> out = curve;
  out.coefficients =
      (alpha * curve.coefficients).array() + offset;
  return out;
}

/// Derivative of a spline as a spline of one lower order on the trimmed knot
/// vector (coefficient differencing).
template <typename Scalar>
SplineCurve<Scalar> derivative_curve(const SplineCurve<Scalar> &curve) {
  const auto &b = curve.basis;
  const int k = b.order;
  SplineCurve<Scalar> out;
  out.basis.order = k - 1;
  out.basis.n_basis = b.n_basis - 1;
  out.basis.lo = b.lo;
  out.basis.hi = b.hi;
  out.basis.knots = b.knots.segment(1, b.knots.size() - 2);
  out.coefficients.resize(b.n_basis - 1);
  for (int j = 0; j + 1 < b.n_basis; ++j) {
    const Scalar span = b.knots[j + k] - b.knots[j + 1];
    out.coefficients[j] =
        span == Scalar(0) ? Scalar(0)
                          : Scalar(k - 1) *
                                (curve.coefficients[j + 1] -
                                 curve.coefficients[j]) /
                                span;
  }
  return out;
}

/// de Boor evaluation without domain checks.
template <typename Scalar>
Scalar de_boor(const SplineCurve<Scalar> &curve, Scalar y) {
  const auto &b = curve.basis;
  const int p = b.degree();
  const int span = find_span(b, y);
  const auto &t = b.knots;
  std::array<Scalar, kMaxSplineOrder> d{};
  for (int j = 0; j <= p; ++j)
    d[j] = curve.coefficients[j + span - p];
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const Scalar denom = t[j + 1 + span - r] - t[j + span - p];
      const Scalar alpha =
          denom == Scalar(0) ? Scalar(0) : (y - t[j + span - p]) / denom;
      d[j] = (Scalar(1) - alpha) * d[j - 1] + alpha * d[j];
    }
  }
  return d[p];
}

/// Value of the deriv_order-th derivative at y. Orders at or above the spline
/// order evaluate to zero.
template <typename Scalar>
Scalar eval_curve(const SplineCurve<Scalar> &curve, Scalar y,
                  int deriv_order = 0) {
  if (!curve.basis.contains(y))
    throw DomainError("evaluation point outside curve domain");
  if (deriv_order < 0)
    throw InvalidSpecError("negative derivative order");
  if (deriv_order >= curve.basis.order)
    return Scalar(0);
  if (deriv_order == 0)
    return de_boor(curve, y);
  SplineCurve<Scalar> d = derivative_curve(curve);
  for (int m = 1; m < deriv_order; ++m)
    d = derivative_curve(d);
  return de_boor(d, y);
}

/// Samples the deriv_order-th derivative at each of the given locations
/// (differencing is done once, not per point).
template <typename Scalar>
VectorX<Scalar> sample_curve(const SplineCurve<Scalar> &curve,
                             const VectorX<Scalar> &ys, int deriv_order = 0) {
  VectorX<Scalar> out(ys.size());
  if (deriv_order >= curve.basis.order) {
    out.setZero();
    return out;
  }
  SplineCurve<Scalar> d = curve;
  for (int m = 0; m < deriv_order; ++m)
    d = derivative_curve(d);
  for (Eigen::Index j = 0; j < ys.size(); ++j) {
    if (!curve.basis.contains(ys[j]))
      throw DomainError("evaluation point outside curve domain");
    out[j] = de_boor(d, ys[j]);
  }
  return out;
}

/*
 * Linear least-squares fitting of spline coefficients for a fixed set of
 * sample locations. The decomposition of the design matrix is computed once
 * and reused for every value vector, so fitting many series observed on the
 * same public grid costs one solve each. Rank-deficient designs yield the
 * minimum-norm solution.
 */
template <typename Scalar> class CurveFitter {
public:
  CurveFitter(const VectorX<Scalar> &ys, const SplineBasis<Scalar> &basis)
      : basis_(basis) {
    validate_basis(basis_);
    std::vector<Scalar> distinct(ys.data(), ys.data() + ys.size());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (static_cast<int>(distinct.size()) < basis_.n_basis)
      throw UnderDeterminedError(
          "fit needs at least " + std::to_string(basis_.n_basis) +
          " distinct sample locations, got " +
          std::to_string(distinct.size()));

    MatrixX<Scalar> design = MatrixX<Scalar>::Zero(ys.size(), basis_.n_basis);
    std::array<Scalar, kMaxSplineOrder> values{};
    for (Eigen::Index row = 0; row < ys.size(); ++row) {
      if (!basis_.contains(ys[row]))
        throw DomainError("sample location outside basis domain");
      const int span = basis_values(basis_, ys[row], values);
      for (int j = 0; j < basis_.order; ++j)
        design(row, span - basis_.order + 1 + j) = values[j];
    }
    solver_.compute(design);
    rows_ = ys.size();
  }

  SplineCurve<Scalar> fit(const VectorX<Scalar> &values) const {
    if (values.size() != rows_)
      throw InvalidSpecError("value count does not match sample locations");
    SplineCurve<Scalar> curve;
    curve.basis = basis_;
    curve.coefficients = solver_.solve(values);
    return curve;
  }

  const SplineBasis<Scalar> &basis() const { return basis_; }

private:
  SplineBasis<Scalar> basis_;
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> solver_;
  Eigen::Index rows_ = 0;
};

template <typename Scalar> struct CurvePoint {
  Scalar y;
  Scalar v;
};

template <typename Scalar>
SplineCurve<Scalar> fit_curve(std::span<const CurvePoint<Scalar>> points,
                              const SplineBasis<Scalar> &basis) {
  VectorX<Scalar> ys(points.size()), vs(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    ys[j] = points[j].y;
    vs[j] = points[j].v;
  }
  return CurveFitter<Scalar>(ys, basis).fit(vs);
}

using BasisSpec = SplineBasis<double>;
using FunctionalCurve = SplineCurve<double>;
using Point = CurvePoint<double>;

} // namespace fsc
