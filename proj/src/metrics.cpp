#include "monoseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monoseg {

namespace {

void tally(const BinaryMask& a, const BinaryMask& b, std::size_t& na,
           std::size_t& nb, std::size_t& nab) {
  require_same_shape(a, b);
  na = nb = nab = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    bool fa = a.values()[k] != 0, fb = b.values()[k] != 0;
    na += fa;
    nb += fb;
    nab += fa && fb;
  }
}

}  // namespace

double mask_dice(const BinaryMask& a, const BinaryMask& b) {
  std::size_t na, nb, nab;
  tally(a, b, na, nb, nab);
  if (na + nb == 0) return 1.0;
  return 2.0 * double(nab) / double(na + nb);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  std::size_t na, nb, nab;
  tally(a, b, na, nb, nab);
  std::size_t uni = na + nb - nab;
  if (uni == 0) return 1.0;
  return double(nab) / double(uni);
}

std::vector<std::pair<int, int>> boundary_pixels(const BinaryMask& mask) {
  std::vector<std::pair<int, int>> out;
  int h = mask.rows(), w = mask.cols();
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!mask(i, j)) continue;
      bool edge = i == 0 || j == 0 || i == h - 1 || j == w - 1;
      if (edge || !mask(i - 1, j) || !mask(i + 1, j) || !mask(i, j - 1) ||
          !mask(i, j + 1))
        out.emplace_back(i, j);
    }
  return out;
}

namespace {

// Distance from each point of `from` to its nearest point of `to`.
std::vector<double> directed_distances(
    const std::vector<std::pair<int, int>>& from,
    const std::vector<std::pair<int, int>>& to) {
  std::vector<double> d;
  d.reserve(from.size());
  for (const auto& [fi, fj] : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ti, tj] : to) {
      double dy = fi - ti, dx = fj - tj;
      best = std::min(best, dy * dy + dx * dx);
    }
    d.push_back(std::sqrt(best));
  }
  return d;
}

}  // namespace

double hausdorff_distance(const BinaryMask& a, const BinaryMask& b,
                          double percentile) {
  require_same_shape(a, b);
  if (!(percentile > 0.0 && percentile <= 1.0))
    throw std::invalid_argument("percentile must be in (0,1]");
  auto ba = boundary_pixels(a);
  auto bb = boundary_pixels(b);
  if (ba.empty() || bb.empty()) throw std::invalid_argument("undefined HD");

  std::vector<double> d = directed_distances(ba, bb);
  std::vector<double> d2 = directed_distances(bb, ba);
  d.insert(d.end(), d2.begin(), d2.end());
  if (percentile == 1.0) return *std::max_element(d.begin(), d.end());
  std::sort(d.begin(), d.end());
  double pos = percentile * double(d.size() - 1);
  std::size_t lo = std::size_t(pos);
  std::size_t hi = std::min(lo + 1, d.size() - 1);
  double frac = pos - double(lo);
  return d[lo] * (1.0 - frac) + d[hi] * frac;
}

double label_accuracy(const std::vector<Box>& labels,
                      const std::vector<Box>& reference) {
  if (labels.size() != reference.size())
    throw std::invalid_argument("box lists differ in length");
  if (labels.empty()) throw std::invalid_argument("no boxes to score");
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    sum += box_iou(labels[i], reference[i]);
  return sum / double(labels.size());
}

}  // namespace monoseg
