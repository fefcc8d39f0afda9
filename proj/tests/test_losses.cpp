#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "cuboid/losses.hpp"
#include "test_util.hpp"

using namespace cuboid;
using testutil::central_diff;
using testutil::rel_err;

TEST_CASE("smooth_l1 basics") {
  std::vector<double> pred{1.0, -2.0, 0.5};
  std::vector<double> grad(3);
  double loss = smooth_l1(pred, pred, grad);
  CHECK(loss == 0.0);
  for (double g : grad) CHECK(g == 0.0);

  std::vector<double> p1{2.0};
  std::vector<double> t1{0.0};
  std::vector<double> g1(1);
  loss = smooth_l1(p1, t1, g1);
  CHECK(loss == doctest::Approx(1.5));  // |2| - 0.5
  CHECK(g1[0] == doctest::Approx(1.0));

  std::vector<double> bad(2);
  CHECK_THROWS_AS(smooth_l1(p1, bad, g1), LengthMismatch);
}

TEST_CASE("smooth_l1 is C1 at |x|=1") {
  std::vector<double> t{0.0};
  std::vector<double> g(1);
  const double eps = 1e-9;
  std::vector<double> below{1.0 - eps};
  std::vector<double> above{1.0 + eps};
  double lb = smooth_l1(below, t, g);
  const double gb = g[0];
  double la = smooth_l1(above, t, g);
  CHECK(std::abs(la - lb) < 1e-8);   // continuous
  CHECK(gb == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("smooth_l1 gradient matches finite differences away from the knee") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 1 + rng.index(8);
    std::vector<double> pred(n), target(n), grad(n);
    for (size_t i = 0; i < n; ++i) {
      target[i] = rng.uniform(-3, 3);
      double d = rng.uniform(-2.5, 2.5);
      if (std::abs(std::abs(d) - 1.0) < 1e-3) d += 0.01;  // step off the knee
      pred[i] = target[i] + d;
    }
    smooth_l1(pred, target, grad);
    for (size_t i = 0; i < n; ++i) {
      const double fd = central_diff(
          [&](double x) {
            std::vector<double> p = pred;
            std::vector<double> g(n);
            p[i] = x;
            return smooth_l1(p, target, g);
          },
          pred[i]);
      CHECK(rel_err(grad[i], fd, 1e-6) < 1e-6);
    }
  }
}

TEST_CASE("softmax log loss: uniform, saturated, finite differences") {
  std::array<double, 2> grad;
  CHECK(softmax_log_loss({0.0, 0.0}, 0, grad) == doctest::Approx(std::log(2.0)));
  CHECK(grad[0] == doctest::Approx(-0.5));
  CHECK(grad[1] == doctest::Approx(0.5));

  const double big = softmax_log_loss({1000.0, 0.0}, 0, grad);
  CHECK(big == doctest::Approx(0.0));
  CHECK(std::isfinite(big));
  CHECK(std::isfinite(grad[1]));

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 2> logits{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const int label = rng.coin() ? 1 : 0;
    softmax_log_loss(logits, label, grad);
    for (int i = 0; i < 2; ++i) {
      const double fd = central_diff(
          [&](double x) {
            std::array<double, 2> l = logits;
            std::array<double, 2> g;
            l[i] = x;
            return softmax_log_loss(l, label, g);
          },
          logits[i]);
      CHECK(rel_err(grad[i], fd, 1e-6) < 1e-6);
    }
  }
}

TEST_CASE("total_loss: weighting, ablation zeros, linearity") {
  LossBreakdown parts;
  parts.anchor_cls = 1;
  parts.anchor_reg = 2;
  parts.roi_cls = 3;
  parts.roi_reg = 4;
  parts.roi_corner = 5;

  LossWeights w;
  CHECK(total_loss(parts, w).total == doctest::Approx(15.0));

  LossWeights zero;
  zero.anchor_cls = zero.anchor_reg = zero.roi_cls = zero.roi_reg =
      zero.roi_corner = 0.0;
  CHECK(total_loss(parts, zero).total == 0.0);

  // zeroing one weight removes exactly that term
  LossWeights no_corner = w;
  no_corner.roi_corner = 0.0;
  CHECK(total_loss(parts, no_corner).total == doctest::Approx(10.0));

  // linear in each weight
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    LossWeights a = w;
    a.roi_reg = rng.uniform(0, 4);
    LossWeights b = a;
    b.roi_reg = 2.0 * a.roi_reg;
    const double base = total_loss(parts, a).total - a.roi_reg * parts.roi_reg;
    CHECK(total_loss(parts, b).total ==
          doctest::Approx(base + b.roi_reg * parts.roi_reg));
  }
}
