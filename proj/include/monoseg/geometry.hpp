#pragma once

#include <optional>
#include <vector>

#include "monoseg/grid.hpp"

namespace monoseg {

// Axis-aligned rectangle in continuous image coordinates, top-left /
// bottom-right corner convention. x grows rightward (columns), y grows
// downward (rows).
struct Box {
  double x_lt = 0.0;
  double y_lt = 0.0;
  double x_rb = 0.0;
  double y_rb = 0.0;

  double width() const { return x_rb - x_lt; }
  double height() const { return y_rb - y_lt; }
  double area() const { return width() * height(); }
  double x_center() const { return 0.5 * (x_lt + x_rb); }
  double y_center() const { return 0.5 * (y_lt + y_rb); }

  // strictly positive extent and finite coordinates
  bool valid() const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Intersection with [0,W]x[0,H]; may be degenerate (non-positive extent).
Box clip_box(const Box& box, int height, int width);

// Pixel (i,j) is 1 iff its center lies inside the box clipped to the image
// (closed bounds). Throws "empty annotation" when the box misses the image
// entirely.
BinaryMask box_filled_mask(const Box& box, int height, int width);

// Smallest box containing all 1-pixels, where pixel (i,j) occupies
// [j,j+1]x[i,i+1]. nullopt for an all-zero mask.
std::optional<Box> tightest_box(const BinaryMask& mask);

// 8-connected components, each as its own mask, ordered row-major by the
// component's first pixel.
std::vector<BinaryMask> connected_components(const BinaryMask& mask);

// Intersection area / union area in continuous coordinates. Both boxes must
// have positive area.
double box_iou(const Box& a, const Box& b);

// Confident region plus the four per-edge unconfident bands of one box.
// The five masks partition the image exactly: band overlaps at box corners
// are assigned by fixed priority left > right > top > bottom.
struct RegionPartition {
  BinaryMask confident;
  BinaryMask unconfident_left;
  BinaryMask unconfident_right;
  BinaryMask unconfident_top;
  BinaryMask unconfident_bottom;
  double scale = 0.0;
};

// Bands have half-width scale*w (resp. scale*h) around each box edge and run
// the full edge length extended by the same margin; requires 0 <= scale < 0.5.
RegionPartition region_partition(const Box& box, double scale, int height,
                                 int width);

}  // namespace monoseg
