// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsc/bspline.hpp"

namespace fsc {

enum class Norm { L1, L2, Sup };

/// Derivative order i and norm p of the functional distance d_{i,p}, plus the
/// resolution of the quadrature / supremum grid.
struct DistanceSpec {
  int deriv_order = 1;
  Norm norm = Norm::L2;
  int grid_n = 512;
};

inline std::string to_string(Norm norm) {
  switch (norm) {
  case Norm::L1:
    return "1";
  case Norm::L2:
    return "2";
  case Norm::Sup:
    return "inf";
  }
  return "?";
}

inline Norm parse_norm(const std::string &text) {
  if (text == "1")
    return Norm::L1;
  if (text == "2")
    return Norm::L2;
  if (text == "inf" || text == "Inf" || text == "infinity" || text == "sup")
    return Norm::Sup;
  throw InvalidSpecError("unknown norm '" + text + "' (expected 1, 2 or inf)");
}

inline void validate(const DistanceSpec &spec) {
  if (spec.deriv_order < 0 || spec.deriv_order > 2)
    throw InvalidSpecError("derivative order must be 0, 1 or 2");
  if (spec.grid_n < 16)
    throw InvalidSpecError("grid_n must be >= 16");
}

/// Number of Simpson intervals actually used: grid_n rounded up to even.
inline int simpson_intervals(const DistanceSpec &spec) {
  return spec.grid_n + (spec.grid_n % 2);
}

/// Uniform grid of intervals + 1 nodes; the last node is exactly hi.
template <typename Scalar>
VectorX<Scalar> grid_nodes(Scalar lo, Scalar hi, int intervals) {
  VectorX<Scalar> nodes(intervals + 1);
  const Scalar h = (hi - lo) / Scalar(intervals);
  for (int j = 0; j < intervals; ++j)
    nodes[j] = lo + Scalar(j) * h;
  nodes[intervals] = hi;
  return nodes;
}

/// Composite Simpson weights (step h folded in) for an even interval count.
template <typename Scalar>
VectorX<Scalar> simpson_weights(Scalar lo, Scalar hi, int intervals) {
  const Scalar h = (hi - lo) / Scalar(intervals);
  VectorX<Scalar> w(intervals + 1);
  for (int j = 0; j <= intervals; ++j)
    w[j] = (j == 0 || j == intervals) ? Scalar(1)
                                      : (j % 2 ? Scalar(4) : Scalar(2));
  return w * (h / Scalar(3));
}

/// Grid on which a DistanceSpec is evaluated over [lo, hi].
template <typename Scalar> struct DistanceGrid {
  VectorX<Scalar> nodes;
  VectorX<Scalar> weights;

  DistanceGrid(Scalar lo, Scalar hi, const DistanceSpec &spec) {
    validate(spec);
    const int m = simpson_intervals(spec);
    nodes = grid_nodes(lo, hi, m);
    weights = simpson_weights(lo, hi, m);
  }
};

/// The d_{i,p} kernel on pre-sampled derivative values. |.| is taken inside
/// the integral so odd p is a norm; p = inf is the grid maximum.
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar difference_norm(const Eigen::MatrixBase<DerivedA> &a,
                       const Eigen::MatrixBase<DerivedB> &b,
                       const VectorX<Scalar> &weights, Norm norm) {
  const Eigen::Index n = weights.size();
  Scalar acc = 0;
  switch (norm) {
  case Norm::Sup:
    for (Eigen::Index j = 0; j < n; ++j)
      acc = std::max(acc, std::abs(a(j) - b(j)));
    return acc;
  case Norm::L1:
    for (Eigen::Index j = 0; j < n; ++j)
      acc += weights[j] * std::abs(a(j) - b(j));
    return acc;
  case Norm::L2:
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar d = a(j) - b(j);
      acc += weights[j] * d * d;
    }
    return std::sqrt(acc);
  }
  return acc;
}

template <typename Scalar>
void require_same_domain(const SplineCurve<Scalar> &a,
                         const SplineCurve<Scalar> &b) {
  if (a.lo() != b.lo() || a.hi() != b.hi())
    throw DomainError("curves are defined on different domains");
}

/// d_{i,p}(a, b) for curves on a common domain; bases may differ.
template <typename Scalar>
Scalar distance(const SplineCurve<Scalar> &a, const SplineCurve<Scalar> &b,
                const DistanceSpec &spec) {
  require_same_domain(a, b);
  const DistanceGrid<Scalar> grid(a.lo(), a.hi(), spec);
  const VectorX<Scalar> sa = sample_curve(a, grid.nodes, spec.deriv_order);
  const VectorX<Scalar> sb = sample_curve(b, grid.nodes, spec.deriv_order);
  return difference_norm(sa, sb, grid.weights, spec.norm);
}

/// Rows are the i-th derivative of each curve on the spec grid.
template <typename Scalar>
MatrixX<Scalar> sample_matrix(std::span<const SplineCurve<Scalar>> curves,
                              const DistanceSpec &spec) {
  if (curves.empty())
    return MatrixX<Scalar>(0, 0);
  const DistanceGrid<Scalar> grid(curves[0].lo(), curves[0].hi(), spec);
  MatrixX<Scalar> samples(curves.size(), grid.nodes.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    require_same_domain(curves[0], curves[c]);
    samples.row(c) =
        sample_curve(curves[c], grid.nodes, spec.deriv_order).transpose();
  }
  return samples;
}

/// Symmetric matrix of d_{i,p} between pre-sampled rows; each unordered pair
/// is evaluated once and mirrored.
template <typename Scalar>
MatrixX<Scalar> pairwise_distances(const MatrixX<Scalar> &samples,
                                   const VectorX<Scalar> &weights, Norm norm) {
  const Eigen::Index n = samples.rows();
  MatrixX<Scalar> d = MatrixX<Scalar>::Zero(n, n);
  // Row-major copies keep each curve contiguous for the pair kernel.
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rows = samples;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar v =
          difference_norm(rows.row(i), rows.row(j), weights, norm);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

/// Validated symmetric, zero-diagonal, non-negative distance matrix.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw ValidationError("distance matrix must be square");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      if (entries_(i, i) != 0.0)
        throw ValidationError("distance matrix diagonal must be zero");
      for (Eigen::Index j = 0; j < i; ++j) {
        if (entries_(i, j) != entries_(j, i))
          throw ValidationError("distance matrix must be symmetric");
        if (!(entries_(i, j) >= 0.0))
          throw ValidationError("distance matrix entries must be >= 0");
      }
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd &entries() const { return entries_; }

private:
  Eigen::MatrixXd entries_;
};

inline DistanceMatrix distance_matrix(std::span<const FunctionalCurve> curves,
                                      const DistanceSpec &spec) {
  validate(spec);
  if (curves.empty())
    throw ValidationError("distance matrix needs at least one curve");
  const DistanceGrid<double> grid(curves[0].lo(), curves[0].hi(), spec);
  return DistanceMatrix(pairwise_distances<double>(
      sample_matrix<double>(curves, spec), grid.weights, spec.norm));
}

} // namespace fsc
