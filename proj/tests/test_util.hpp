// Shared helpers for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cuboid/geometry.hpp"
#include "cuboid/rng.hpp"

namespace cuboid::testutil {

inline double rel_err(double a, double b, double floor = 1e-8) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline BoundingBox random_box(Rng& rng, double lo = 0.0, double hi = 64.0,
                              double min_size = 2.0) {
  const double x1 = rng.uniform(lo, hi - min_size);
  const double y1 = rng.uniform(lo, hi - min_size);
  const double x2 = x1 + rng.uniform(min_size, hi - x1);
  const double y2 = y1 + rng.uniform(min_size, hi - y1);
  return BoundingBox{x1, y1, x2, y2};
}

inline Cuboid2D random_cuboid2d(Rng& rng, double lo = 0.0, double hi = 64.0) {
  Cuboid2D c;
  for (auto& v : c.vertices) {
    v.x = rng.uniform(lo, hi);
    v.y = rng.uniform(lo, hi);
  }
  return c;
}

// Poses that keep every corner at comfortable depth, projecting near the
// image center for a 320x240-ish camera.
inline Cuboid3D random_cuboid3d(Rng& rng) {
  Cuboid3D c;
  c.dims = Vec3{rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)};
  c.center = Vec3{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(6.0, 14.0)};
  c.yaw = rng.uniform(-3.1, 3.1);
  c.pitch = rng.uniform(-3.1, 3.1);
  c.roll = rng.uniform(-3.1, 3.1);
  return c;
}

inline CameraIntrinsics random_intrinsics(Rng& rng) {
  return CameraIntrinsics{rng.uniform(100.0, 500.0), rng.uniform(100.0, 300.0),
                          rng.uniform(80.0, 260.0)};
}

}  // namespace cuboid::testutil
