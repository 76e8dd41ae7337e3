#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monoseg/geometry.hpp"

namespace monoseg {

struct NoiseParams {
  double sigma = 0.0;      // std of the relative shift/scale draws
  std::uint64_t seed = 0;
  double min_size = 1.0;   // post-perturbation width/height floor, pixels
};

// One annotation row: an image and its boxes.
struct BoxRecord {
  std::string image_id;
  std::vector<Box> boxes;
};

// The four relative draws (dx, dy, dw, dh) applied to a box: the center
// shifts by dx*w / dy*h and the size scales by (1+dw) / (1+dh).
using NoiseDraws = std::array<double, 4>;

// Perturb one box. When `draws` is null they are sampled i.i.d. from
// N(0, sigma^2) via the (seed, image_id, box_index) substream. The result is
// clipped to the image; a result that would rasterize to nothing throws
// "noise destroyed annotation".
Box perturb_box(const Box& box, const NoiseParams& params, int height,
                int width, const NoiseDraws* draws = nullptr,
                const std::string& image_id = "", int box_index = 0);

// Applies perturb_box to every box with deterministic per-box substreams;
// destroyed annotations are resampled up to 16 times before erroring.
std::vector<BoxRecord> perturb_dataset(const std::vector<BoxRecord>& clean,
                                       const NoiseParams& params, int height,
                                       int width);

// Raw N(0, sigma^2) draws from one box's substream; exposed for statistics.
std::vector<double> noise_draws(const NoiseParams& params,
                                const std::string& image_id, int box_index,
                                int count);

}  // namespace monoseg
