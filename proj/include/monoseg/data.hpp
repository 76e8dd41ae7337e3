#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monoseg/geometry.hpp"
#include "monoseg/grid.hpp"
#include "monoseg/io.hpp"

namespace monoseg {

struct SyntheticSample {
  std::string image_id;
  Image image;
  BinaryMask gt_mask;
  std::vector<Box> clean_boxes;  // tightest box per mask component
};

// Renders n_objects (1 or 2) smooth blobs: superellipses with low-order
// boundary ripple, foreground ~0.7 on background ~0.3, pixel noise std 0.05,
// clipped to [0,1]. Deterministic per seed. Blob size and the anti-aliased
// boundary ramp scale with image size (semi-axes 6..14, ramp ~2 px at 64x64).
// Each object sits in a dim glow collar that decays outward from its contour
// (~0.5-0.7 peak over ~5 px); the collar is background, but it fills the
// margins of any enclosing box, so near the boundary the intensity alone does
// not say where the object ends — only the annotations do.
// gt_mask is the half-coverage region; its contour sits mid-ramp.
SyntheticSample generate_sample(std::uint64_t seed, int height, int width,
                                int n_objects);

struct DatasetOptions {
  int count = 200;
  int height = 64;
  int width = 64;
  int min_objects = 1;
  int max_objects = 2;
  double sigma = 0.2;    // box noise level for the manifest's noisy_boxes
  double min_size = 1.0;
};

// Writes images/*.pgm, masks/*.pgm and manifest.jsonl under dir.
Manifest generate_dataset(const std::filesystem::path& dir, std::uint64_t seed,
                          const DatasetOptions& opt);

}  // namespace monoseg
