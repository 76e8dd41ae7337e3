#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monoseg/geometry.hpp"
#include "monoseg/grid.hpp"

namespace monoseg {

// Overlap scores between binary masks. Two empty masks agree perfectly.
double mask_dice(const BinaryMask& a, const BinaryMask& b);
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Foreground pixels that touch background through a 4-neighbor, or sit on the
// image edge. Returned as (row, col) pairs in row-major order.
std::vector<std::pair<int, int>> boundary_pixels(const BinaryMask& mask);

// Symmetric Hausdorff distance between mask boundaries, measured between pixel
// centers. percentile = 1.0 gives the classic max; 0.95 the HD95 variant.
// Throws if either mask has no foreground.
double hausdorff_distance(const BinaryMask& a, const BinaryMask& b,
                          double percentile = 1.0);

// Mean pairwise box IoU over two index-aligned lists of equal length.
double label_accuracy(const std::vector<Box>& labels,
                      const std::vector<Box>& reference);

// Per-image evaluation row. hd is absent when either mask is empty.
struct EvalRow {
  std::string image_id;
  double dice = 0.0;
  double iou = 0.0;
  std::optional<double> hd;
};

}  // namespace monoseg
