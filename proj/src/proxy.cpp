#include "monoseg/proxy.hpp"

#include <algorithm>
#include <stdexcept>

namespace monoseg {

namespace {
double clamp_score(double v) {
  return std::min(kScoreClampHi, std::max(kScoreClampLo, v));
}
}  // namespace

ProxyMap proxy_forward(const ScoreMap& m) {
  int H = m.rows(), W = m.cols();
  ProxyMap p;
  p.row_max.assign(H, 0.0);
  p.row_argmax.assign(H, 0);
  p.col_max.assign(W, 0.0);
  p.col_argmax.assign(W, 0);

  for (int i = 0; i < H; ++i) {
    double best = -1.0;
    int arg = 0;
    for (int j = 0; j < W; ++j) {
      double v = clamp_score(m(i, j));
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    p.row_max[i] = best;
    p.row_argmax[i] = arg;
  }
  for (int j = 0; j < W; ++j) {
    double best = -1.0;
    int arg = 0;
    for (int i = 0; i < H; ++i) {
      double v = clamp_score(m(i, j));
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    p.col_max[j] = best;
    p.col_argmax[j] = arg;
  }

  p.values = Grid<double>(H, W);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) p.values(i, j) = p.row_max[i] * p.col_max[j];
  return p;
}

GradientMap proxy_backward(const ProxyMap& p, const GradientMap& upstream) {
  int H = p.rows(), W = p.cols();
  require_same_shape(H, W, upstream.rows(), upstream.cols());

  GradientMap g(H, W, 0.0);
  for (int i = 0; i < H; ++i) {
    double s = 0.0;
    for (int j = 0; j < W; ++j) s += upstream(i, j) * p.col_max[j];
    g(i, p.row_argmax[i]) += s;
  }
  for (int j = 0; j < W; ++j) {
    double s = 0.0;
    for (int i = 0; i < H; ++i) s += upstream(i, j) * p.row_max[i];
    g(p.col_argmax[j], j) += s;
  }
  return g;
}

}  // namespace monoseg
