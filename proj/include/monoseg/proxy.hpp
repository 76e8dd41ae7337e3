#pragma once

#include <vector>

#include "monoseg/grid.hpp"

namespace monoseg {

// Scores are forced into this closed interval before the row/column maxima
// are taken, so downstream logs and ratios stay finite.
inline constexpr double kScoreClampLo = 1e-6;
inline constexpr double kScoreClampHi = 1.0 - 1e-6;

// p[i,j] = rowmax(i) * colmax(j), with the argmax caches the backward pass
// needs. Ties break to the first index.
struct ProxyMap {
  Grid<double> values;
  std::vector<double> row_max;
  std::vector<double> col_max;
  std::vector<int> row_argmax;
  std::vector<int> col_argmax;

  int rows() const { return values.rows(); }
  int cols() const { return values.cols(); }
};

ProxyMap proxy_forward(const ScoreMap& m);

// Exact adjoint of the forward pass under the first-occurrence subgradient:
// the row term of upstream row a routes to m[a, row_argmax(a)], the column
// term of column b to m[col_argmax(b), b].
GradientMap proxy_backward(const ProxyMap& p, const GradientMap& upstream);

}  // namespace monoseg
