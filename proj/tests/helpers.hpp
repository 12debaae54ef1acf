// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "fsc/bspline.hpp"

namespace fsc::testing {

/// Exact samples of f at `count` evenly spaced points, fitted on `basis`.
inline FunctionalCurve sampled_fit(const std::function<double(double)> &f,
                                   const BasisSpec &basis, int count = 64) {
  std::vector<Point> pts;
  for (int j = 0; j < count; ++j) {
    const double y = basis.lo + (basis.hi - basis.lo) * j / (count - 1);
    pts.push_back({y, f(y)});
  }
  return fit_curve<double>(pts, basis);
}

/// Plain recursive Cox-de Boor definition, half-open spans with the right
/// domain end assigned to the last non-empty span.
inline double naive_basis(const BasisSpec &b, int i, int order, double y) {
  const auto &t = b.knots;
  if (order == 1) {
    if (y == b.hi) {
      int last = static_cast<int>(t.size()) - 1;
      while (last > 0 && t[last - 1] == t[last])
        --last;
      return i == last - 1 ? 1.0 : 0.0;
    }
    return t[i] <= y && y < t[i + 1] ? 1.0 : 0.0;
  }
  double v = 0.0;
  const double d1 = t[i + order - 1] - t[i];
  const double d2 = t[i + order] - t[i + 1];
  if (d1 > 0)
    v += (y - t[i]) / d1 * naive_basis(b, i, order - 1, y);
  if (d2 > 0)
    v += (t[i + order] - y) / d2 * naive_basis(b, i + 1, order - 1, y);
  return v;
}

inline double naive_eval(const FunctionalCurve &c, double y) {
  double v = 0.0;
  for (int i = 0; i < c.basis.n_basis; ++i)
    v += c.coefficients[i] * naive_basis(c.basis, i, c.basis.order, y);
  return v;
}

} // namespace fsc::testing
