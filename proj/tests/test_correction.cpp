#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "monoseg/correction.hpp"
#include "monoseg/geometry.hpp"
#include "monoseg/rng.hpp"
#include "oracles.hpp"

using namespace monoseg;

namespace {

// Independent component-box oracle: BFS flood fill (the library uses a DFS
// stack), 8-connectivity, components ordered by first pixel row-major.
std::vector<Box> oracle_boxes(const ScoreMap& score, double threshold,
                              int min_pixels) {
  int H = score.rows(), W = score.cols();
  Grid<int> seen(H, W, 0);
  std::vector<Box> out;
  for (int i0 = 0; i0 < H; ++i0)
    for (int j0 = 0; j0 < W; ++j0) {
      if (seen(i0, j0) || !(score(i0, j0) > threshold)) continue;
      std::deque<std::pair<int, int>> q{{i0, j0}};
      seen(i0, j0) = 1;
      int n = 0, imin = i0, imax = i0, jmin = j0, jmax = j0;
      while (!q.empty()) {
        auto [i, j] = q.front();
        q.pop_front();
        ++n;
        imin = std::min(imin, i);
        imax = std::max(imax, i);
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            int ni = i + di, nj = j + dj;
            if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;
            if (seen(ni, nj) || !(score(ni, nj) > threshold)) continue;
            seen(ni, nj) = 1;
            q.emplace_back(ni, nj);
          }
      }
      if (n >= min_pixels)
        out.push_back(Box{double(jmin), double(imin), double(jmax + 1),
                          double(imax + 1)});
    }
  return out;
}

ScoreMap paint(int h, int w, const std::vector<std::pair<int, int>>& px) {
  ScoreMap s(h, w, 0.1);
  for (auto [i, j] : px) s(i, j) = 0.9;
  return s;
}

}  // namespace

TEST_CASE("merge rule names round-trip") {
  CHECK(to_string(MergeRule::Average) == "AVERAGE");
  CHECK(to_string(MergeRule::Replace) == "REPLACE");
  CHECK(merge_rule_from_string("AVERAGE") == MergeRule::Average);
  CHECK(merge_rule_from_string("REPLACE") == MergeRule::Replace);
  CHECK_THROWS_AS(merge_rule_from_string("average"), std::invalid_argument);
  CHECK_THROWS_AS(merge_rule_from_string(""), std::invalid_argument);
}

TEST_CASE("predicted_boxes on flat and single-blob maps") {
  ScoreMap low(6, 6, 0.2);
  CHECK(predicted_boxes(low, 0.5).empty());

  // 3x3 blob, rows 2..4 x cols 1..3
  std::vector<std::pair<int, int>> px;
  for (int i = 2; i <= 4; ++i)
    for (int j = 1; j <= 3; ++j) px.emplace_back(i, j);
  auto boxes = predicted_boxes(paint(8, 8, px), 0.5);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == Box{1.0, 2.0, 4.0, 5.0});
}

TEST_CASE("predicted_boxes orders two blobs by first pixel") {
  // 9-pixel blob starting at (1,1) and 16-pixel blob starting at (1,5)
  std::vector<std::pair<int, int>> px;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) px.emplace_back(i, j);
  for (int i = 1; i <= 4; ++i)
    for (int j = 5; j <= 8; ++j) px.emplace_back(i, j);
  auto boxes = predicted_boxes(paint(10, 10, px), 0.5);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0] == Box{1.0, 1.0, 4.0, 4.0});
  CHECK(boxes[1] == Box{5.0, 1.0, 9.0, 5.0});
}

TEST_CASE("predicted_boxes drops components under four pixels") {
  // 3-pixel L and a 2x2 square, well separated
  std::vector<std::pair<int, int>> px = {{1, 1}, {2, 1}, {2, 2}};
  for (int i = 5; i <= 6; ++i)
    for (int j = 5; j <= 6; ++j) px.emplace_back(i, j);
  auto boxes = predicted_boxes(paint(9, 9, px), 0.5);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == Box{5.0, 5.0, 7.0, 7.0});

  // with the filter lowered the L survives and comes first
  auto all = predicted_boxes(paint(9, 9, px), 0.5, 1);
  REQUIRE(all.size() == 2);
  CHECK(all[0] == Box{1.0, 1.0, 3.0, 3.0});
}

TEST_CASE("predicted_boxes validates the threshold") {
  ScoreMap s(4, 4, 0.5);
  CHECK_THROWS_AS(predicted_boxes(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(predicted_boxes(s, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(predicted_boxes(s, -0.3), std::invalid_argument);
}

TEST_CASE("predicted_boxes matches an independent flood-fill oracle") {
  SplitMix64 rng(911);
  for (int trial = 0; trial < 60; ++trial) {
    int h = 6 + int(rng.next_below(9));
    int w = 6 + int(rng.next_below(9));
    double density = 0.2 + 0.5 * rng.next_unit();
    ScoreMap s(h, w, 0.0);
    for (double& v : s.values()) v = rng.next_unit() < density ? 0.9 : 0.1;
    int min_px = 1 + int(rng.next_below(5));
    auto got = predicted_boxes(s, 0.5, min_px);
    auto want = oracle_boxes(s, 0.5, min_px);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == want[k]);
  }
}

TEST_CASE("match_and_merge with no predictions keeps labels") {
  std::vector<Box> labels = {{1, 1, 5, 5}, {8, 2, 12, 9}};
  auto r = match_and_merge(labels, {}, 0.7, MergeRule::Average);
  CHECK(r.pairs.empty());
  REQUIRE(r.corrected.size() == 2);
  CHECK(r.corrected[0] == labels[0]);
  CHECK(r.corrected[1] == labels[1]);
}

TEST_CASE("match_and_merge with an identical prediction") {
  std::vector<Box> labels = {{2, 3, 7, 9}};
  std::vector<Box> preds = {{2, 3, 7, 9}};
  for (MergeRule rule : {MergeRule::Average, MergeRule::Replace}) {
    auto r = match_and_merge(labels, preds, 0.7, rule);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].label_index == 0);
    CHECK(r.pairs[0].pred_index == 0);
    CHECK(r.pairs[0].iou == doctest::Approx(1.0));
    CHECK(r.corrected[0] == labels[0]);
  }
}

TEST_CASE("match_and_merge rejects overlap at or below tau") {
  Box label{0, 0, 2, 2}, pred{1, 0, 3, 2};
  CHECK(box_iou(label, pred) == doctest::Approx(1.0 / 3.0));
  CHECK(oracle::box_iou(label, pred) == doctest::Approx(1.0 / 3.0));
  auto r = match_and_merge({label}, {pred}, 0.7, MergeRule::Average);
  CHECK(r.pairs.empty());
  CHECK(r.corrected[0] == label);

  // exactly tau is still a rejection: acceptance is strict
  auto eq = match_and_merge({label}, {pred}, 1.0 / 3.0, MergeRule::Average);
  CHECK(eq.pairs.empty());
}

TEST_CASE("match_and_merge AVERAGE takes the coordinate-wise mean") {
  std::vector<Box> labels = {{0, 0, 4, 4}};
  std::vector<Box> preds = {{1, 0, 5, 4}};
  REQUIRE(box_iou(labels[0], preds[0]) > 0.5);
  auto r = match_and_merge(labels, preds, 0.5, MergeRule::Average);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.corrected[0] == Box{0.5, 0.0, 4.5, 4.0});

  auto rep = match_and_merge(labels, preds, 0.5, MergeRule::Replace);
  CHECK(rep.corrected[0] == preds[0]);
}

TEST_CASE("higher-overlap label claims a contested prediction") {
  Box pred{4, 4, 10, 10};
  std::vector<Box> labels = {pred, {5, 4, 11, 10}};  // ious 1.0 and ~0.71
  auto r = match_and_merge(labels, {pred}, 0.3, MergeRule::Replace);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].label_index == 0);
  CHECK(r.corrected[0] == pred);
  CHECK(r.corrected[1] == labels[1]);  // unmatched label untouched
}

TEST_CASE("exact overlap tie goes to the lower label index") {
  Box b{2, 2, 6, 6};
  auto r = match_and_merge({b, b}, {b}, 0.5, MergeRule::Average);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].label_index == 0);
  CHECK(r.pairs[0].pred_index == 0);
  CHECK(r.corrected[1] == b);
}

TEST_CASE("matching is a partial injection and averaging never hurts") {
  SplitMix64 rng(407);
  int matched_total = 0;
  for (int trial = 0; trial < 80; ++trial) {
    std::vector<Box> labels, preds;
    int nl = 1 + int(rng.next_below(4));
    for (int k = 0; k < nl; ++k) {
      Box b = oracle::random_box(rng, 32, 32, 4.0);
      labels.push_back(b);
      // jittered copy keeps some pairs above tau
      double dx = rng.next_uniform(-1.5, 1.5), dy = rng.next_uniform(-1.5, 1.5);
      preds.push_back(Box{b.x_lt + dx, b.y_lt + dy, b.x_rb + dx, b.y_rb + dy});
    }
    if (rng.next_unit() < 0.5) preds.push_back(oracle::random_box(rng, 32, 32, 4.0));
    rng.shuffle(preds);

    double tau = 0.3;
    auto r = match_and_merge(labels, preds, tau, MergeRule::Average);
    REQUIRE(r.corrected.size() == labels.size());

    std::vector<int> label_seen(labels.size(), 0), pred_seen(preds.size(), 0);
    for (const MatchPair& p : r.pairs) {
      CHECK(p.iou > tau);
      CHECK(p.iou == doctest::Approx(box_iou(labels[p.label_index], preds[p.pred_index])));
      CHECK(++label_seen[p.label_index] == 1);
      CHECK(++pred_seen[p.pred_index] == 1);
      // the mean box is at least as close to the accepted prediction
      double before = box_iou(labels[p.label_index], preds[p.pred_index]);
      double after = box_iou(r.corrected[p.label_index], preds[p.pred_index]);
      CHECK(after >= before - 1e-12);
      ++matched_total;
    }
    // unmatched labels pass through verbatim
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (!label_seen[k]) CHECK(r.corrected[k] == labels[k]);
  }
  CHECK(matched_total >= 100);
}

TEST_CASE("REPLACE correction is idempotent") {
  SplitMix64 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Box> labels, preds;
    for (int k = 0; k < 3; ++k) {
      labels.push_back(oracle::random_box(rng, 24, 24, 3.0));
      preds.push_back(oracle::random_box(rng, 24, 24, 3.0));
    }
    auto once = match_and_merge(labels, preds, 0.3, MergeRule::Replace);
    auto twice = match_and_merge(once.corrected, preds, 0.3, MergeRule::Replace);
    REQUIRE(twice.corrected.size() == once.corrected.size());
    for (std::size_t k = 0; k < once.corrected.size(); ++k)
      CHECK(twice.corrected[k] == once.corrected[k]);
  }
}

TEST_CASE("lambda halves and sticks at zero") {
  CHECK(lambda_schedule(0.2) == 0.1);
  CHECK(lambda_schedule(0.1) == 0.05);
  CHECK(lambda_schedule(0.0) == 0.0);

  double lambda = 0.2;
  double prev = lambda;
  for (int k = 1; k <= 6; ++k) {
    lambda = lambda_schedule(lambda);
    CHECK(lambda == 0.2 * std::pow(0.5, k));
    CHECK(lambda < prev);
    prev = lambda;
  }

  CHECK_THROWS_AS(lambda_schedule(0.5), std::invalid_argument);
  CHECK_THROWS_AS(lambda_schedule(-0.01), std::invalid_argument);
}
