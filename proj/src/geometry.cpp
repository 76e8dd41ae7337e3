#include "monoseg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace monoseg {

bool Box::valid() const {
  return std::isfinite(x_lt) && std::isfinite(y_lt) && std::isfinite(x_rb) &&
         std::isfinite(y_rb) && x_lt < x_rb && y_lt < y_rb;
}

Box clip_box(const Box& box, int height, int width) {
  Box c;
  c.x_lt = std::max(box.x_lt, 0.0);
  c.y_lt = std::max(box.y_lt, 0.0);
  c.x_rb = std::min(box.x_rb, double(width));
  c.y_rb = std::min(box.y_rb, double(height));
  return c;
}

BinaryMask box_filled_mask(const Box& box, int height, int width) {
  if (!box.valid()) throw std::invalid_argument("invalid box");
  Box c = clip_box(box, height, width);
  if (!(c.x_lt < c.x_rb) || !(c.y_lt < c.y_rb))
    throw std::invalid_argument("empty annotation");
  BinaryMask out(height, width, 0);
  for (int i = 0; i < height; ++i) {
    double cy = i + 0.5;
    if (cy < c.y_lt || cy > c.y_rb) continue;
    for (int j = 0; j < width; ++j) {
      double cx = j + 0.5;
      if (cx >= c.x_lt && cx <= c.x_rb) out(i, j) = 1;
    }
  }
  return out;
}

std::optional<Box> tightest_box(const BinaryMask& mask) {
  int imin = mask.rows(), imax = -1, jmin = mask.cols(), jmax = -1;
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) {
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
      }
  if (imax < 0) return std::nullopt;
  return Box{double(jmin), double(imin), double(jmax + 1), double(imax + 1)};
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask) {
  int H = mask.rows(), W = mask.cols();
  std::vector<BinaryMask> out;
  BinaryMask visited(H, W, 0);
  std::vector<std::pair<int, int>> stack;
  for (int i0 = 0; i0 < H; ++i0) {
    for (int j0 = 0; j0 < W; ++j0) {
      if (!mask(i0, j0) || visited(i0, j0)) continue;
      BinaryMask comp(H, W, 0);
      stack.clear();
      stack.emplace_back(i0, j0);
      visited(i0, j0) = 1;
      while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        comp(i, j) = 1;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            int ni = i + di, nj = j + dj;
            if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;
            if (mask(ni, nj) && !visited(ni, nj)) {
              visited(ni, nj) = 1;
              stack.emplace_back(ni, nj);
            }
          }
        }
      }
      out.push_back(std::move(comp));
    }
  }
  return out;
}

double box_iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid())
    throw std::invalid_argument("box_iou requires positive-area boxes");
  double iw = std::min(a.x_rb, b.x_rb) - std::max(a.x_lt, b.x_lt);
  double ih = std::min(a.y_rb, b.y_rb) - std::max(a.y_lt, b.y_lt);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

RegionPartition region_partition(const Box& box, double scale, int height,
                                 int width) {
  if (!box.valid()) throw std::invalid_argument("invalid box");
  if (!(scale >= 0.0) || scale >= 0.5)
    throw std::invalid_argument("bands would cross box center");

  double w = box.width(), h = box.height();
  double mx = scale * w, my = scale * h;

  // Per-edge band intervals; the long side of each band is the box edge
  // extended by the same margin.
  double lx0 = box.x_lt - mx, lx1 = box.x_lt + mx;
  double rx0 = box.x_rb - mx, rx1 = box.x_rb + mx;
  double ty0 = box.y_lt - my, ty1 = box.y_lt + my;
  double by0 = box.y_rb - my, by1 = box.y_rb + my;
  double ylo = box.y_lt - my, yhi = box.y_rb + my;
  double xlo = box.x_lt - mx, xhi = box.x_rb + mx;

  RegionPartition part;
  part.scale = scale;
  part.confident = BinaryMask(height, width, 0);
  part.unconfident_left = BinaryMask(height, width, 0);
  part.unconfident_right = BinaryMask(height, width, 0);
  part.unconfident_top = BinaryMask(height, width, 0);
  part.unconfident_bottom = BinaryMask(height, width, 0);

  for (int i = 0; i < height; ++i) {
    double cy = i + 0.5;
    for (int j = 0; j < width; ++j) {
      double cx = j + 0.5;
      bool in_y_span = cy >= ylo && cy <= yhi;
      bool in_x_span = cx >= xlo && cx <= xhi;
      if (cx >= lx0 && cx <= lx1 && in_y_span)
        part.unconfident_left(i, j) = 1;
      else if (cx >= rx0 && cx <= rx1 && in_y_span)
        part.unconfident_right(i, j) = 1;
      else if (cy >= ty0 && cy <= ty1 && in_x_span)
        part.unconfident_top(i, j) = 1;
      else if (cy >= by0 && cy <= by1 && in_x_span)
        part.unconfident_bottom(i, j) = 1;
      else
        part.confident(i, j) = 1;
    }
  }
  return part;
}

}  // namespace monoseg
