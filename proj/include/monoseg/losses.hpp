#pragma once

#include <string>
#include <vector>

#include "monoseg/geometry.hpp"
#include "monoseg/grid.hpp"
#include "monoseg/proxy.hpp"

namespace monoseg {

// LB: box agreement over the whole map. EXCLUSION: agreement over the
// confident region only. MC: EXCLUSION plus the monotonicity penalty on the
// unconfident bands.
enum class LossMode { LB, Exclusion, MC };

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& s);

struct LossBreakdown {
  double cc = 0.0;
  double mc_left = 0.0;
  double mc_right = 0.0;
  double mc_top = 0.0;
  double mc_bottom = 0.0;
  double mc_total = 0.0;
  double total = 0.0;
};

struct CcResult {
  double loss = 0.0;
  GradientMap grad;  // d loss / d p, zero off-support
};

// Negated soft Dice between the proxy values and the box-filled mask,
// restricted to the support region:
//   -(2*sum_S(b*p) + eps) / (sum_S b + sum_S p + eps)
CcResult cc_loss(const Grid<double>& p, const BinaryMask& b,
                 const BinaryMask& support);

// Outward first-order differences of p, one map per box edge. Entries whose
// neighbor falls outside the image are 0.
struct McKernelMaps {
  GradientMap x_minus;  // p[i,j] - p[i,j+1]
  GradientMap x_plus;   // p[i,j] - p[i,j-1]
  GradientMap y_minus;  // p[i,j] - p[i+1,j]
  GradientMap y_plus;   // p[i,j] - p[i-1,j]
};

McKernelMaps mc_gradient_maps(const Grid<double>& p);

struct McResult {
  double left = 0.0;
  double right = 0.0;
  double top = 0.0;
  double bottom = 0.0;
  double total = 0.0;
  GradientMap grad;  // d total / d p
};

// Hinge on the outward difference inside each band: a response that does not
// decrease from box interior to exterior costs nothing. `normalized` divides
// each band's sum by its pixel count.
McResult mc_loss(const Grid<double>& p, const RegionPartition& partition,
                 bool normalized = true);

struct LossOptions {
  LossMode mode = LossMode::MC;
  double lambda = 0.2;  // unconfident scale
  bool mc_normalized = true;
  double cc_weight = 1.0;
  double mc_weight = 1.0;
};

struct TotalLossResult {
  LossBreakdown breakdown;
  GradientMap grad_m;  // d total / d m through the proxy adjoint
};

// b is the union of the boxes' filled masks; CC support is the whole map in
// LB mode and the intersection of per-box confident regions otherwise; MC is
// applied per box over that box's own bands.
TotalLossResult total_loss(const ScoreMap& m, const std::vector<Box>& boxes,
                           const LossOptions& opt);

}  // namespace monoseg
