#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace monoseg {

// Row-major H x W raster. Pixel (i, j) = (row, col) owns the unit square
// [j, j+1] x [i, i+1]; its center is at (j + 0.5, i + 0.5).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(checked_size(rows, cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return v_[static_cast<std::size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return v_[static_cast<std::size_t>(i) * cols_ + j];
  }

  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  std::vector<T>& values() { return v_; }
  const std::vector<T>& values() const { return v_; }

  bool same_shape(const Grid& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows <= 0 || cols <= 0)
      throw std::invalid_argument("grid shape must be positive");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

// {0,1}-valued raster: box-filled masks, region indicators, GT masks,
// thresholded predictions.
using BinaryMask = Grid<std::uint8_t>;

// Per-pixel foreground probability in (0,1).
using ScoreMap = Grid<double>;

// Grayscale image, intensities in [0,1].
using Image = Grid<double>;

// Backpropagated per-pixel sensitivities.
using GradientMap = Grid<double>;

inline std::size_t count_nonzero(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.values()) n += (v != 0);
  return n;
}

inline void require_same_shape(int ar, int ac, int br, int bc) {
  if (ar != br || ac != bc) throw std::invalid_argument("shape mismatch");
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b) {
  require_same_shape(a.rows(), a.cols(), b.rows(), b.cols());
}

}  // namespace monoseg
