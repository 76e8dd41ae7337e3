#include "doctest.h"
#include "monoseg/geometry.hpp"
#include "monoseg/proxy.hpp"
#include "oracles.hpp"

using namespace monoseg;

TEST_CASE("proxy_forward closed forms") {
  // constant map -> constant square
  ScoreMap c(5, 7, 0.3);
  ProxyMap pc = proxy_forward(c);
  for (double v : pc.values.values()) CHECK(v == doctest::Approx(0.09));

  // single elevated entry over a floor
  ScoreMap m(8, 8, 0.1);
  m(2, 3) = 0.5;
  ProxyMap p = proxy_forward(m);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double expect = (i == 2 && j == 3)   ? 0.25
                      : (i == 2 || j == 3) ? 0.05
                                           : 0.01;
      CHECK(p.values(i, j) == doctest::Approx(expect));
    }

  // box pattern: high plateau on box rows x cols, cross bands, floor outside
  ScoreMap bm(10, 10, 0.1);
  BinaryMask mask = box_filled_mask(Box{2, 3, 6, 7}, 10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (mask(i, j)) bm(i, j) = 0.9;
  ProxyMap pb = proxy_forward(bm);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      bool row_in = i >= 3 && i <= 6, col_in = j >= 2 && j <= 5;
      double expect = row_in && col_in ? 0.81 : (row_in || col_in) ? 0.09 : 0.01;
      CHECK(pb.values(i, j) == doctest::Approx(expect));
    }
}

TEST_CASE("proxy_forward matches per-pixel oracle") {
  SplitMix64 rng(21);
  for (int t = 0; t < 100; ++t) {
    int h = 2 + int(rng.next_below(10)), w = 2 + int(rng.next_below(10));
    ScoreMap m = oracle::random_scores(rng, h, w, 0.001, 0.999);
    ProxyMap p = proxy_forward(m);
    Grid<double> ref = oracle::proxy(m);
    for (std::size_t k = 0; k < ref.size(); ++k)
      CHECK(p.values.values()[k] == doctest::Approx(ref.values()[k]).epsilon(1e-12));
    // caches agree with the product structure
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        CHECK(p.values(i, j) == p.row_max[i] * p.col_max[j]);
  }
}

TEST_CASE("proxy clamps scores outside the open interval") {
  ScoreMap m(2, 2, 0.5);
  m(0, 0) = 1.5;  // clamps to 1 - 1e-6
  m(1, 1) = -2.0; // clamps to 1e-6
  ProxyMap p = proxy_forward(m);
  CHECK(p.row_max[0] == 1.0 - 1e-6);
  CHECK(p.col_max[1] == 0.5);
  CHECK(p.values(0, 0) == (1.0 - 1e-6) * (1.0 - 1e-6));
  CHECK(p.values(1, 1) == 0.25);  // row 1 and col 1 both peak at the 0.5 cells
}

TEST_CASE("proxy argmax ties break to the first index") {
  ScoreMap m(3, 3, 0.2);
  m(0, 1) = 0.7;
  m(0, 2) = 0.7;  // row 0 tie between cols 1 and 2
  m(2, 0) = 0.7;  // col 0 max at row 2
  ProxyMap p = proxy_forward(m);
  CHECK(p.row_argmax[0] == 1);
  CHECK(p.col_argmax[0] == 2);
  CHECK(p.col_argmax[1] == 0);
}

TEST_CASE("proxy_backward scalar chain rule") {
  ScoreMap m(1, 1, 0.4);
  ProxyMap p = proxy_forward(m);
  GradientMap up(1, 1, 1.0);
  GradientMap g = proxy_backward(p, up);
  CHECK(g(0, 0) == doctest::Approx(0.8));  // p = m^2

  GradientMap zero(1, 1, 0.0);
  CHECK(proxy_backward(p, zero)(0, 0) == 0.0);

  GradientMap bad(2, 2, 0.0);
  CHECK_THROWS_AS(proxy_backward(p, bad), std::invalid_argument);
}

TEST_CASE("proxy_backward matches finite differences away from ties") {
  SplitMix64 rng(22);
  int tested = 0;
  for (int t = 0; t < 400 && tested < 60; ++t) {
    int h = 3 + int(rng.next_below(4)), w = 3 + int(rng.next_below(4));
    ScoreMap m = oracle::random_scores(rng, h, w);
    ProxyMap p = proxy_forward(m);

    // reject near-ties of the row/col maxima
    bool tie = false;
    for (int i = 0; i < h && !tie; ++i) {
      double best = -1, second = -1;
      for (int j = 0; j < w; ++j) {
        double v = m(i, j);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      tie = best - second < 1e-3;
    }
    for (int j = 0; j < w && !tie; ++j) {
      double best = -1, second = -1;
      for (int i = 0; i < h; ++i) {
        double v = m(i, j);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      tie = best - second < 1e-3;
    }
    if (tie) continue;
    ++tested;

    GradientMap up(h, w);
    for (double& v : up.values()) v = rng.next_uniform(-1.0, 1.0);
    GradientMap g = proxy_backward(p, up);

    const double step = 1e-6;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        auto scalar = [&](double v) {
          ScoreMap mm = m;
          mm(i, j) = v;
          Grid<double> pp = oracle::proxy(mm);
          double s = 0.0;
          for (std::size_t k = 0; k < pp.size(); ++k)
            s += up.values()[k] * pp.values()[k];
          return s;
        };
        double fd =
            (scalar(m(i, j) + step) - scalar(m(i, j) - step)) / (2 * step);
        CHECK(g(i, j) == doctest::Approx(fd).epsilon(1e-5));
      }
  }
  CHECK(tested >= 60);
}

TEST_CASE("proxy monotonicity and box idempotence") {
  SplitMix64 rng(23);
  ScoreMap m = oracle::random_scores(rng, 6, 6);
  ProxyMap p0 = proxy_forward(m);
  ScoreMap m2 = m;
  m2(3, 4) = std::min(0.999, m(3, 4) + 0.2);
  ProxyMap p1 = proxy_forward(m2);
  for (std::size_t k = 0; k < p0.values.size(); ++k)
    CHECK(p1.values.values()[k] >= p0.values.values()[k] - 1e-15);

  // clamped box mask reproduces itself through the proxy + 0.5 threshold
  BinaryMask mask = box_filled_mask(Box{2, 1, 6, 5}, 8, 8);
  ScoreMap bm(8, 8);
  for (std::size_t k = 0; k < bm.size(); ++k)
    bm.values()[k] = mask.values()[k] ? 0.999999 : 0.000001;
  ProxyMap pb = proxy_forward(bm);
  for (std::size_t k = 0; k < bm.size(); ++k)
    CHECK((pb.values.values()[k] > 0.5) == (mask.values()[k] != 0));
}
