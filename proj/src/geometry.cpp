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

#include "cuboid/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cuboid {

const char* const kCornerNames[kNumCorners] = {"FTL", "BTL", "FBL", "FTR",
                                               "BBL", "FBR", "BTR", "BBR"};

const char* const kFaceNames[kNumFaces] = {"front", "back",  "left",
                                           "right", "top",   "bottom"};

const std::array<std::array<int, 4>, kNumFaces> kFaceVertices = {{
    {kFTL, kFTR, kFBR, kFBL},  // front  (+x)
    {kBTL, kBTR, kBBR, kBBL},  // back   (-x)
    {kFTL, kBTL, kBBL, kFBL},  // left   (-y)
    {kFTR, kBTR, kBBR, kFBR},  // right  (+y)
    {kFTL, kBTL, kBTR, kFTR},  // top    (+z)
    {kFBL, kBBL, kBBR, kFBR},  // bottom (-z)
}};

const EdgeTopology& edge_topology() {
  static const EdgeTopology topo = [] {
    EdgeTopology t;
    // depth: front-back edges
    t.classes[kDepth] = {Edge{kFTL, kBTL}, Edge{kFBL, kBBL}, Edge{kFTR, kBTR},
                         Edge{kFBR, kBBR}};
    // horizontal: left-right edges
    t.classes[kHorizontal] = {Edge{kFTL, kFTR}, Edge{kBTL, kBTR},
                              Edge{kFBL, kFBR}, Edge{kBBL, kBBR}};
    // vertical: top-bottom edges
    t.classes[kVertical] = {Edge{kFTL, kFBL}, Edge{kBTL, kBBL}, Edge{kFTR, kFBR},
                            Edge{kBTR, kBBR}};
    return t;
  }();
  return topo;
}

Vec2 HomPoint2::dehomogenize() const {
  return Vec2{x / w, y / w};
}

std::array<double, 9> rotation_matrix(double yaw, double pitch, double roll) {
  const double cz = std::cos(yaw), sz = std::sin(yaw);
  const double cy = std::cos(pitch), sy = std::sin(pitch);
  const double cx = std::cos(roll), sx = std::sin(roll);
  // R = Rz(yaw) * Ry(pitch) * Rx(roll), row-major.
  return {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
          sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
          -sy,     cy * sx,                cy * cx};
}

std::array<Vec3, kNumCorners> cuboid_corners_3d(const Cuboid3D& c) {
  const double hx = 0.5 * c.dims.x;
  const double hy = 0.5 * c.dims.y;
  const double hz = 0.5 * c.dims.z;
  // Local offsets in canonical order; front=+x, left=-y, top=+z.
  const double local[kNumCorners][3] = {
      {+hx, -hy, +hz},  // FTL
      {-hx, -hy, +hz},  // BTL
      {+hx, -hy, -hz},  // FBL
      {+hx, +hy, +hz},  // FTR
      {-hx, -hy, -hz},  // BBL
      {+hx, +hy, -hz},  // FBR
      {-hx, +hy, +hz},  // BTR
      {-hx, +hy, -hz},  // BBR
  };
  const auto r = rotation_matrix(c.yaw, c.pitch, c.roll);
  std::array<Vec3, kNumCorners> out;
  for (int i = 0; i < kNumCorners; ++i) {
    const double* p = local[i];
    out[i].x = r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + c.center.x;
    out[i].y = r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + c.center.y;
    out[i].z = r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + c.center.z;
  }
  return out;
}

Vec2 project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) {
    throw NonPositiveDepth("point depth must be positive, got Z=" +
                           std::to_string(p.z));
  }
  return Vec2{k.f * p.x / p.z + k.cx, k.f * p.y / p.z + k.cy};
}

Cuboid2D project_cuboid(const Cuboid3D& c, const CameraIntrinsics& k) {
  const auto corners = cuboid_corners_3d(c);
  Cuboid2D out;
  for (int i = 0; i < kNumCorners; ++i) {
    out.vertices[i] = project(corners[i], k);
  }
  return out;
}

BoundingBox enclosing_box(const Cuboid2D& c) {
  BoundingBox b{c.vertices[0].x, c.vertices[0].y, c.vertices[0].x,
                c.vertices[0].y};
  for (const Vec2& v : c.vertices) {
    b.x1 = std::min(b.x1, v.x);
    b.y1 = std::min(b.y1, v.y);
    b.x2 = std::max(b.x2, v.x);
    b.y2 = std::max(b.y2, v.y);
  }
  if (b.x1 == b.x2 || b.y1 == b.y2) {
    throw DegenerateBox("cuboid projects to a zero-area box");
  }
  return b;
}

namespace {

// Divide by the max-magnitude component so it becomes exactly 1.
void normalize3(double& a, double& b, double& c) {
  double m = a;
  if (std::abs(b) > std::abs(m)) m = b;
  if (std::abs(c) > std::abs(m)) m = c;
  a /= m;
  b /= m;
  c /= m;
}

HomLine cross_line(double x1, double y1, double w1, double x2, double y2,
                   double w2) {
  HomLine l;
  l.a = y1 * w2 - w1 * y2;
  l.b = w1 * x2 - x1 * w2;
  l.c = x1 * y2 - y1 * x2;
  const double mag = std::abs(l.a) + std::abs(l.b) + std::abs(l.c);
  const double in_mag = (std::abs(x1) + std::abs(y1) + std::abs(w1)) *
                        (std::abs(x2) + std::abs(y2) + std::abs(w2));
  if (mag <= 1e-14 * std::max(in_mag, 1.0)) {
    throw IdenticalInputs("cross product is the zero vector");
  }
  normalize3(l.a, l.b, l.c);
  return l;
}

}  // namespace

HomLine line_through(const Vec2& p, const Vec2& q) {
  return cross_line(p.x, p.y, 1.0, q.x, q.y, 1.0);
}

HomLine line_through(const Vec2& p, const HomPoint2& q) {
  return cross_line(p.x, p.y, 1.0, q.x, q.y, q.w);
}

HomPoint2 intersect(const HomLine& l1, const HomLine& l2) {
  HomPoint2 p;
  p.x = l1.b * l2.c - l1.c * l2.b;
  p.y = l1.c * l2.a - l1.a * l2.c;
  p.w = l1.a * l2.b - l1.b * l2.a;
  const double mag = std::abs(p.x) + std::abs(p.y) + std::abs(p.w);
  const double in_mag = (std::abs(l1.a) + std::abs(l1.b) + std::abs(l1.c)) *
                        (std::abs(l2.a) + std::abs(l2.b) + std::abs(l2.c));
  if (mag <= 1e-14 * std::max(in_mag, 1.0)) {
    throw IdenticalInputs("lines coincide, intersection undefined");
  }
  normalize3(p.x, p.y, p.w);
  return p;
}

double point_line_distance(const Vec2& p, const HomLine& l) {
  const double n = std::hypot(l.a, l.b);
  return std::abs(l.a * p.x + l.b * p.y + l.c) / n;
}

namespace {

HomLine known_edge(const std::array<Vec2, kNumCorners>& v, const Edge& e) {
  const Vec2& p = v[e.a];
  const Vec2& q = v[e.b];
  if (p.x == q.x && p.y == q.y) {
    throw DegenerateEdge(std::string(kCornerNames[e.a]) + "-" +
                         kCornerNames[e.b] + " has coincident endpoints");
  }
  return line_through(p, q);
}

bool touches_dropped(const Edge& e) {
  return e.a == kFTL || e.b == kFTL || e.a == kBBR || e.b == kBBR;
}

}  // namespace

VanishingPoints vanishing_points(const std::array<Vec2, kNumCorners>& known) {
  const EdgeTopology& topo = edge_topology();
  HomPoint2 vps[3];
  for (int cls = 0; cls < 3; ++cls) {
    HomLine lines[2];
    int n = 0;
    for (const Edge& e : topo.classes[cls]) {
      if (touches_dropped(e)) continue;
      lines[n++] = known_edge(known, e);
    }
    vps[cls] = intersect(lines[0], lines[1]);
  }
  return VanishingPoints{vps[0], vps[1], vps[2]};
}

namespace {

// Least-squares point for three homogeneous lines: minimize the sum of
// squared perpendicular distances. Exact when the lines are concurrent.
Vec2 solve_three_lines(const HomLine* lines) {
  double saa = 0, sab = 0, sbb = 0, sac = 0, sbc = 0;
  for (int i = 0; i < 3; ++i) {
    const double n = std::hypot(lines[i].a, lines[i].b);
    const double a = lines[i].a / n;
    const double b = lines[i].b / n;
    const double c = lines[i].c / n;
    saa += a * a;
    sab += a * b;
    sbb += b * b;
    sac += a * c;
    sbc += b * c;
  }
  const double det = saa * sbb - sab * sab;
  // trace(A) = saa + sbb = 3 for unit normals; det in [0, (3/2)^2].
  if (det <= 1e-12) {
    throw SingularSystem("all incident lines are parallel");
  }
  Vec2 p;
  p.x = (-sac * sbb + sbc * sab) / det;
  p.y = (-sbc * saa + sac * sab) / det;
  return p;
}

}  // namespace

Cuboid2D infer_missing_corners(const std::array<Vec2, kNumCorners>& known) {
  const VanishingPoints vps = vanishing_points(known);

  // FTL sits on depth edge FTL-BTL, horizontal edge FTL-FTR and vertical
  // edge FTL-FBL; BBR on BBR-FBR (depth), BBR-BBL (horizontal), BBR-BTR
  // (vertical). Each line runs from the known endpoint to the class VP.
  HomLine ftl_lines[3] = {
      line_through(known[kBTL], vps.depth),
      line_through(known[kFTR], vps.horizontal),
      line_through(known[kFBL], vps.vertical),
  };
  HomLine bbr_lines[3] = {
      line_through(known[kFBR], vps.depth),
      line_through(known[kBBL], vps.horizontal),
      line_through(known[kBTR], vps.vertical),
  };

  Cuboid2D out;
  for (int i = 0; i < kNumCorners; ++i) out.vertices[i] = known[i];
  out.vertices[kFTL] = solve_three_lines(ftl_lines);
  out.vertices[kBBR] = solve_three_lines(bbr_lines);
  return out;
}

}  // namespace cuboid
