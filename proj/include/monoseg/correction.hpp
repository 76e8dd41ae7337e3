#pragma once

#include <string>
#include <vector>

#include "monoseg/geometry.hpp"
#include "monoseg/grid.hpp"

namespace monoseg {

enum class MergeRule { Average, Replace };

std::string to_string(MergeRule rule);
MergeRule merge_rule_from_string(const std::string& s);

struct CorrectionConfig {
  double tau = 0.7;         // IoU acceptance threshold
  int interval_epochs = 10; // correction every t epochs
  double lambda0 = 0.2;     // initial unconfident scale
  MergeRule merge_rule = MergeRule::Average;
};

// Binarize at `threshold`, drop components below `min_component_pixels`,
// return the tightest box of each remaining component in component order.
std::vector<Box> predicted_boxes(const ScoreMap& score, double threshold = 0.5,
                                 int min_component_pixels = 4);

struct MatchPair {
  int label_index = 0;
  int pred_index = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<Box> corrected;    // one box per input label, in order
  std::vector<MatchPair> pairs;  // accepted matches
};

// Greedy one-to-one assignment by descending IoU (ties to lower indices);
// a pair is accepted only when IoU > tau. Matched labels merge with their
// prediction (coordinate-wise mean, or replacement); unmatched labels pass
// through; unmatched predictions are dropped.
MatchResult match_and_merge(const std::vector<Box>& labels,
                            const std::vector<Box>& preds, double tau,
                            MergeRule rule);

// Half reduction after each correction event.
double lambda_schedule(double lambda_current);

// One corrected image at one correction event, for the audit log.
struct CorrectionEvent {
  int epoch = 0;
  std::string image_id;
  std::vector<MatchPair> pairs;
  std::vector<Box> boxes_before;
  std::vector<Box> boxes_after;
  double lambda_before = 0.0;
  double lambda_after = 0.0;
};

}  // namespace monoseg
