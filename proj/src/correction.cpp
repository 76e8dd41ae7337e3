#include "monoseg/correction.hpp"

#include <algorithm>
#include <stdexcept>

namespace monoseg {

std::string to_string(MergeRule rule) {
  return rule == MergeRule::Average ? "AVERAGE" : "REPLACE";
}

MergeRule merge_rule_from_string(const std::string& s) {
  if (s == "AVERAGE") return MergeRule::Average;
  if (s == "REPLACE") return MergeRule::Replace;
  throw std::invalid_argument("unknown merge rule: " + s);
}

std::vector<Box> predicted_boxes(const ScoreMap& score, double threshold,
                                 int min_component_pixels) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must be in (0,1)");
  BinaryMask bin(score.rows(), score.cols(), 0);
  for (std::size_t k = 0; k < bin.size(); ++k)
    bin.values()[k] = score.values()[k] > threshold ? 1 : 0;

  std::vector<Box> out;
  for (const BinaryMask& comp : connected_components(bin)) {
    if (count_nonzero(comp) < std::size_t(min_component_pixels)) continue;
    out.push_back(*tightest_box(comp));
  }
  return out;
}

MatchResult match_and_merge(const std::vector<Box>& labels,
                            const std::vector<Box>& preds, double tau,
                            MergeRule rule) {
  struct Cand {
    double iou;
    int label;
    int pred;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < int(labels.size()); ++i)
    for (int j = 0; j < int(preds.size()); ++j) {
      double iou = box_iou(labels[i], preds[j]);
      if (iou > tau) cands.push_back({iou, i, j});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.label != b.label) return a.label < b.label;
    return a.pred < b.pred;
  });

  MatchResult r;
  r.corrected = labels;
  std::vector<char> label_used(labels.size(), 0), pred_used(preds.size(), 0);
  for (const Cand& c : cands) {
    if (label_used[c.label] || pred_used[c.pred]) continue;
    label_used[c.label] = 1;
    pred_used[c.pred] = 1;
    r.pairs.push_back({c.label, c.pred, c.iou});
    const Box& l = labels[c.label];
    const Box& p = preds[c.pred];
    if (rule == MergeRule::Average) {
      r.corrected[c.label] =
          Box{0.5 * (l.x_lt + p.x_lt), 0.5 * (l.y_lt + p.y_lt),
              0.5 * (l.x_rb + p.x_rb), 0.5 * (l.y_rb + p.y_rb)};
    } else {
      r.corrected[c.label] = p;
    }
  }
  return r;
}

double lambda_schedule(double lambda_current) {
  if (!(lambda_current >= 0.0 && lambda_current < 0.5))
    throw std::invalid_argument("lambda out of range");
  return lambda_current * 0.5;
}

}  // namespace monoseg
