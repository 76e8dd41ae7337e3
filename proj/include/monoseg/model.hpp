#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "monoseg/grid.hpp"

namespace monoseg {

inline constexpr int kNumFeatures = 6;
inline constexpr int kHiddenUnits = 16;
inline constexpr int kNumParams =
    kHiddenUnits * kNumFeatures + kHiddenUnits + kHiddenUnits + 1;

// Per-pixel feature vectors, pixel-major. Features: raw intensity, box blurs
// at radii 2 and 5 (window mean, clipped at borders), normalized x and y of
// the pixel center, constant 1.
class FeatureStack {
 public:
  FeatureStack() = default;
  FeatureStack(int rows, int cols)
      : rows_(rows),
        cols_(cols),
        v_(std::size_t(rows) * cols * kNumFeatures) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double* at(int i, int j) {
    return v_.data() + (std::size_t(i) * cols_ + j) * kNumFeatures;
  }
  const double* at(int i, int j) const {
    return v_.data() + (std::size_t(i) * cols_ + j) * kNumFeatures;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

FeatureStack compute_features(const Image& image);

// Two dense layers shared across pixels: 16-wide ReLU hidden layer, sigmoid
// output. Doubles as the gradient container (same layout).
struct ModelParams {
  std::array<double, kHiddenUnits * kNumFeatures> w1{};  // [hidden][feature]
  std::array<double, kHiddenUnits> b1{};
  std::array<double, kHiddenUnits> w2{};
  double b2 = 0.0;

  // Order: w1 row-major, b1, w2, b2.
  std::vector<double> flatten() const;
  static ModelParams unflatten(const std::vector<double>& v);
};

// Uniform in +/- 1/sqrt(fan_in), drawn in flatten order from one stream.
ModelParams init_params(std::uint64_t seed);

ScoreMap model_forward(const FeatureStack& f, const ModelParams& p);
ScoreMap model_forward(const Image& image, const ModelParams& p);

// Exact chain rule; ReLU subgradient 0 at 0, zero gradient where the output
// clamp saturates. Returns d(sum upstream .* m)/d(params).
ModelParams model_backward(const FeatureStack& f, const ModelParams& p,
                           const GradientMap& upstream);

// AdamW: bias-corrected moments, decoupled weight decay.
struct OptimizerState {
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m1, m2;  // sized on first step
};

void optimizer_step(ModelParams& params, const ModelParams& grads,
                    OptimizerState& state);

// Binary checkpoint: 16-byte header (8-byte magic, u32 version, u32 count),
// then the flattened parameters as little-endian doubles.
void save_checkpoint(const std::string& path, const ModelParams& p);
ModelParams load_checkpoint(const std::string& path);

}  // namespace monoseg
