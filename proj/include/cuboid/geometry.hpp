// Copyright (c) 2026 The cuboid-detect Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>

#include "cuboid/errors.hpp"

namespace cuboid {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Homogeneous image point, normalized so the max-magnitude component is 1.
// w == 0 encodes a direction (point at infinity).
struct HomPoint2 {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;

  bool at_infinity(double eps = 1e-12) const { return w > -eps && w < eps; }
  Vec2 dehomogenize() const;  // throws NonPositiveDepth-free; requires w != 0
};

// Homogeneous image line a*x + b*y + c*w = 0, same normalization.
struct HomLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Center/dims/rotation, 9 of the 12 numbers of the minimal parametrization
// (the remaining 3 are the camera intrinsics).
struct Cuboid3D {
  Vec3 center;                      // meters, camera frame
  Vec3 dims;                        // L, W, H > 0
  double yaw = 0.0;                 // theta, about z
  double pitch = 0.0;               // psi, about y
  double roll = 0.0;                // phi, about x
};

struct CameraIntrinsics {
  double f = 1.0;   // single focal length, zero skew built in
  double cx = 0.0;
  double cy = 0.0;
};

// Canonical corner order used everywhere, including network outputs.
enum Corner : int {
  kFTL = 0,  // front-top-left
  kBTL = 1,  // back-top-left
  kFBL = 2,  // front-bottom-left
  kFTR = 3,  // front-top-right
  kBBL = 4,  // back-bottom-left
  kFBR = 5,  // front-bottom-right
  kBTR = 6,  // back-top-right
  kBBR = 7,  // back-bottom-right
};

constexpr int kNumCorners = 8;

extern const char* const kCornerNames[kNumCorners];

struct Cuboid2D {
  std::array<Vec2, kNumCorners> vertices;
};

struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x1 < x2 && y1 < y2; }
};

// The 12 edges grouped into 3 classes of 4 parallel edges.
// depth: front-back (local x), horizontal: left-right (local y),
// vertical: top-bottom (local z). Each vertex sits on one edge per class.
enum EdgeClass : int { kDepth = 0, kHorizontal = 1, kVertical = 2 };

struct Edge {
  int a;
  int b;
};

struct EdgeTopology {
  std::array<std::array<Edge, 4>, 3> classes;
};

const EdgeTopology& edge_topology();

// Faces as vertex-index quads in draw order; outward normals are the local
// +x/-x/-y/+y/+z/-z axes in the order below.
enum Face : int { kFront = 0, kBack = 1, kLeft = 2, kRight = 3, kTop = 4, kBottom = 5 };

constexpr int kNumFaces = 6;

extern const char* const kFaceNames[kNumFaces];
extern const std::array<std::array<int, 4>, kNumFaces> kFaceVertices;

// Corners in camera frame, canonical order. Local frame: front face at +x,
// left at -y, top at +z; rotation is intrinsic Z-Y-X Euler (yaw, pitch, roll).
std::array<Vec3, kNumCorners> cuboid_corners_3d(const Cuboid3D& c);

std::array<double, 9> rotation_matrix(double yaw, double pitch, double roll);

// Pinhole projection. Throws NonPositiveDepth when Z <= 0.
Vec2 project(const Vec3& p, const CameraIntrinsics& k);

Cuboid2D project_cuboid(const Cuboid3D& c, const CameraIntrinsics& k);

// Min/max over the 8 vertices. Throws DegenerateBox on zero-width/height.
BoundingBox enclosing_box(const Cuboid2D& c);

// Homogeneous cross products. line_through throws IdenticalInputs when the
// two points coincide; intersect throws it when the lines are the same line.
// Parallel distinct lines intersect at a w == 0 point, which is a value.
HomLine line_through(const Vec2& p, const Vec2& q);
HomLine line_through(const Vec2& p, const HomPoint2& q);
HomPoint2 intersect(const HomLine& l1, const HomLine& l2);

// Point-to-line distance after normalizing (a, b) to unit length.
double point_line_distance(const Vec2& p, const HomLine& l);

struct VanishingPoints {
  HomPoint2 depth;
  HomPoint2 horizontal;
  HomPoint2 vertical;
};

// VPs from the 6 corners that remain when FTL and BBR are dropped. Each VP is
// the intersection of the two edges of its class that touch neither dropped
// vertex. Throws DegenerateEdge when a known edge has coincident endpoints.
VanishingPoints vanishing_points(const std::array<Vec2, kNumCorners>& known);

// Reconstructs FTL and BBR from the other 6 corners: each missing corner is
// the least-squares point under its three incident edge lines (one per class,
// drawn from the adjacent known corner to the class VP). Exact on exact
// projective input. Throws SingularSystem when the normal equations are
// rank-deficient (all three lines parallel).
Cuboid2D infer_missing_corners(const std::array<Vec2, kNumCorners>& known);

}  // namespace cuboid
