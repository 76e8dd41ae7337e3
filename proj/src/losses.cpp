#include "monoseg/losses.hpp"

#include <stdexcept>

namespace monoseg {

namespace {
constexpr double kDiceEps = 1e-6;
}

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::LB: return "LB";
    case LossMode::Exclusion: return "EXCLUSION";
    case LossMode::MC: return "MC";
  }
  return "?";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "LB") return LossMode::LB;
  if (s == "EXCLUSION") return LossMode::Exclusion;
  if (s == "MC") return LossMode::MC;
  throw std::invalid_argument("unknown loss mode: " + s);
}

CcResult cc_loss(const Grid<double>& p, const BinaryMask& b,
                 const BinaryMask& support) {
  int H = p.rows(), W = p.cols();
  require_same_shape(H, W, b.rows(), b.cols());
  require_same_shape(H, W, support.rows(), support.cols());
  if (count_nonzero(support) == 0)
    throw std::invalid_argument("no supervised pixels");

  double inter = 0.0, sum_b = 0.0, sum_p = 0.0;
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) {
      if (!support(i, j)) continue;
      double pv = p(i, j);
      if (b(i, j)) {
        inter += pv;
        sum_b += 1.0;
      }
      sum_p += pv;
    }

  double num = 2.0 * inter + kDiceEps;
  double den = sum_b + sum_p + kDiceEps;

  CcResult r;
  r.loss = -num / den;
  r.grad = GradientMap(H, W, 0.0);
  double inv_den2 = 1.0 / (den * den);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) {
      if (!support(i, j)) continue;
      double dnum = b(i, j) ? 2.0 : 0.0;
      r.grad(i, j) = -(dnum * den - num) * inv_den2;
    }
  return r;
}

McKernelMaps mc_gradient_maps(const Grid<double>& p) {
  int H = p.rows(), W = p.cols();
  if (H < 2 || W < 2)
    throw std::invalid_argument("mc kernels need at least a 2x2 map");
  McKernelMaps k{GradientMap(H, W, 0.0), GradientMap(H, W, 0.0),
                 GradientMap(H, W, 0.0), GradientMap(H, W, 0.0)};
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) {
      if (j + 1 < W) k.x_minus(i, j) = p(i, j) - p(i, j + 1);
      if (j - 1 >= 0) k.x_plus(i, j) = p(i, j) - p(i, j - 1);
      if (i + 1 < H) k.y_minus(i, j) = p(i, j) - p(i + 1, j);
      if (i - 1 >= 0) k.y_plus(i, j) = p(i, j) - p(i - 1, j);
    }
  return k;
}

namespace {

// Accumulates one band: hinge sum over band pixels of (pixel - inward
// neighbor), subgradient +1/-1 on the active pair, scaled by `scale`.
double band_hinge(const Grid<double>& p, const BinaryMask& band, int di,
                  int dj, bool normalized, GradientMap& grad) {
  int H = p.rows(), W = p.cols();
  std::size_t n = count_nonzero(band);
  if (n == 0) return 0.0;
  double scale = normalized ? 1.0 / double(n) : 1.0;
  double sum = 0.0;
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) {
      if (!band(i, j)) continue;
      int ni = i + di, nj = j + dj;
      if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;  // no border penalty
      double d = p(i, j) - p(ni, nj);
      if (d > 0.0) {
        sum += d;
        grad(i, j) += scale;
        grad(ni, nj) -= scale;
      }
    }
  return sum * scale;
}

}  // namespace

McResult mc_loss(const Grid<double>& p, const RegionPartition& partition,
                 bool normalized) {
  int H = p.rows(), W = p.cols();
  require_same_shape(H, W, partition.confident.rows(),
                     partition.confident.cols());
  if (H < 2 || W < 2)
    throw std::invalid_argument("mc loss needs at least a 2x2 map");

  McResult r;
  r.grad = GradientMap(H, W, 0.0);
  // inward neighbor per band: left band looks right, right band looks left,
  // top band looks down, bottom band looks up
  r.left = band_hinge(p, partition.unconfident_left, 0, +1, normalized, r.grad);
  r.right = band_hinge(p, partition.unconfident_right, 0, -1, normalized, r.grad);
  r.top = band_hinge(p, partition.unconfident_top, +1, 0, normalized, r.grad);
  r.bottom = band_hinge(p, partition.unconfident_bottom, -1, 0, normalized, r.grad);
  r.total = r.left + r.right + r.top + r.bottom;
  return r;
}

TotalLossResult total_loss(const ScoreMap& m, const std::vector<Box>& boxes,
                           const LossOptions& opt) {
  int H = m.rows(), W = m.cols();
  if (boxes.empty()) throw std::invalid_argument("no boxes");

  BinaryMask b(H, W, 0);
  for (const Box& box : boxes) {
    BinaryMask filled = box_filled_mask(box, H, W);
    for (std::size_t k = 0; k < b.size(); ++k)
      b.values()[k] |= filled.values()[k];
  }

  std::vector<RegionPartition> partitions;
  if (opt.mode != LossMode::LB) {
    partitions.reserve(boxes.size());
    for (const Box& box : boxes)
      partitions.push_back(region_partition(box, opt.lambda, H, W));
  }

  BinaryMask support(H, W, 1);
  if (opt.mode != LossMode::LB) {
    for (const RegionPartition& part : partitions)
      for (std::size_t k = 0; k < support.size(); ++k)
        support.values()[k] &= part.confident.values()[k];
  }

  ProxyMap p = proxy_forward(m);
  CcResult cc = cc_loss(p.values, b, support);

  TotalLossResult out;
  out.breakdown.cc = cc.loss;

  GradientMap grad_p(H, W, 0.0);
  for (std::size_t k = 0; k < grad_p.size(); ++k)
    grad_p.values()[k] = opt.cc_weight * cc.grad.values()[k];

  if (opt.mode == LossMode::MC) {
    for (const RegionPartition& part : partitions) {
      McResult mc = mc_loss(p.values, part, opt.mc_normalized);
      out.breakdown.mc_left += mc.left;
      out.breakdown.mc_right += mc.right;
      out.breakdown.mc_top += mc.top;
      out.breakdown.mc_bottom += mc.bottom;
      for (std::size_t k = 0; k < grad_p.size(); ++k)
        grad_p.values()[k] += opt.mc_weight * mc.grad.values()[k];
    }
    out.breakdown.mc_total = out.breakdown.mc_left + out.breakdown.mc_right +
                             out.breakdown.mc_top + out.breakdown.mc_bottom;
  }

  out.breakdown.total =
      opt.cc_weight * out.breakdown.cc + opt.mc_weight * out.breakdown.mc_total;
  out.grad_m = proxy_backward(p, grad_p);
  return out;
}

}  // namespace monoseg
