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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cuboid/data.hpp"
#include "cuboid/eval.hpp"

namespace cuboid {

double snap_coord(double v) {
  // 2^-32 px grid keeps flips exact while staying far below every tolerance.
  return std::round(v * 4294967296.0) / 4294967296.0;
}

namespace {

struct PlacedCuboid {
  Cuboid3D shape;
  std::array<Vec3, kNumCorners> corners3d;
  Cuboid2D proj;  // snapped
  BoundingBox box;
  std::array<bool, kNumFaces> face_visible;
  std::array<bool, kNumCorners> vert_visible;
};

const std::array<Vec3, kNumFaces> kFaceNormals = {{
    {+1, 0, 0},  // front
    {-1, 0, 0},  // back
    {0, -1, 0},  // left
    {0, +1, 0},  // right
    {0, 0, +1},  // top
    {0, 0, -1},  // bottom
}};

Vec3 rotate(const std::array<double, 9>& r, const Vec3& v) {
  return Vec3{r[0] * v.x + r[1] * v.y + r[2] * v.z,
              r[3] * v.x + r[4] * v.y + r[5] * v.z,
              r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

// A texture-less box renders identically under the 24 rotations of the cube
// group acting jointly on (dims, R), which would make the object-fixed
// corner labels unlearnable: the same image could demand different labels.
// Sampled poses are therefore reduced to a canonical representative of their
// equivalence class: the object +x (front) axis is the one facing the camera
// hardest, and +z (top) points image-up as much as possible. Labels stay
// fixed in the object frame; only the sampled description is canonical.
// Returns false near the gimbal singularity so the caller can resample.
bool canonicalize_pose(Cuboid3D& c) {
  // signed axis permutations with det +1
  struct GroupElem {
    int src[3];     // new axis j comes from old axis src[j]
    double sgn[3];  // with this sign
  };
  static const std::vector<GroupElem> group = [] {
    std::vector<GroupElem> g;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
      const double perm_sign =
          (p[0] == 0 && p[1] == 1) || (p[0] == 1 && p[1] == 2) ||
                  (p[0] == 2 && p[1] == 0)
              ? 1.0
              : -1.0;
      for (int bits = 0; bits < 8; ++bits) {
        const double s0 = bits & 1 ? -1.0 : 1.0;
        const double s1 = bits & 2 ? -1.0 : 1.0;
        const double s2 = bits & 4 ? -1.0 : 1.0;
        if (perm_sign * s0 * s1 * s2 < 0) continue;  // det must be +1
        g.push_back(GroupElem{{p[0], p[1], p[2]}, {s0, s1, s2}});
      }
    }
    return g;
  }();

  const auto r = rotation_matrix(c.yaw, c.pitch, c.roll);
  const double view_norm =
      std::sqrt(c.center.x * c.center.x + c.center.y * c.center.y +
                c.center.z * c.center.z);
  const Vec3 v{c.center.x / view_norm, c.center.y / view_norm,
               c.center.z / view_norm};

  double best_front = 1e9, best_top = 1e9;
  std::array<double, 9> best_r{};
  Vec3 best_dims = c.dims;
  const double old_dims[3] = {c.dims.x, c.dims.y, c.dims.z};
  for (const GroupElem& s : group) {
    // column j of R' is sgn[j] * (column src[j] of R)
    std::array<double, 9> rc;
    for (int row = 0; row < 3; ++row) {
      for (int j = 0; j < 3; ++j) {
        rc[3 * row + j] = s.sgn[j] * r[3 * row + s.src[j]];
      }
    }
    // front score: +x axis against the viewing ray (more negative is better);
    // top score: +z axis against image-down (y grows downward).
    const double front = rc[0] * v.x + rc[3] * v.y + rc[6] * v.z;
    const double top = rc[5];
    if (front < best_front - 1e-12 ||
        (front < best_front + 1e-12 && top < best_top)) {
      best_front = front;
      best_top = top;
      best_r = rc;
      best_dims = Vec3{old_dims[s.src[0]], old_dims[s.src[1]], old_dims[s.src[2]]};
    }
  }

  const double cy = std::hypot(best_r[0], best_r[3]);
  if (cy < 1e-6) return false;
  c.dims = best_dims;
  c.pitch = std::atan2(-best_r[6], cy);
  c.yaw = std::atan2(best_r[3], best_r[0]);
  c.roll = std::atan2(best_r[7], best_r[8]);
  return true;
}

void compute_visibility(PlacedCuboid& pc) {
  const auto r = rotation_matrix(pc.shape.yaw, pc.shape.pitch, pc.shape.roll);
  for (int f = 0; f < kNumFaces; ++f) {
    const Vec3 n = rotate(r, kFaceNormals[f]);
    Vec3 center{0, 0, 0};
    for (int k : kFaceVertices[f]) {
      center.x += pc.corners3d[k].x * 0.25;
      center.y += pc.corners3d[k].y * 0.25;
      center.z += pc.corners3d[k].z * 0.25;
    }
    pc.face_visible[f] = n.x * center.x + n.y * center.y + n.z * center.z < 0.0;
  }
  for (int k = 0; k < kNumCorners; ++k) pc.vert_visible[k] = false;
  for (int f = 0; f < kNumFaces; ++f) {
    if (!pc.face_visible[f]) continue;
    for (int k : kFaceVertices[f]) pc.vert_visible[k] = true;
  }
}

void blend(Image& img, int y, int x, double gray, double cov) {
  double& px = img.at(y, x);
  px = px * (1.0 - cov) + gray * cov;
}

double dist_point_segment(double px, double py, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

void draw_segment(Image& img, const Vec2& a, const Vec2& b, double gray,
                  double half_width = 0.6) {
  const int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - half_width - 1)));
  const int x1 = std::min(img.width - 1, int(std::ceil(std::max(a.x, b.x) + half_width + 1)));
  const int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - half_width - 1)));
  const int y1 = std::min(img.height - 1, int(std::ceil(std::max(a.y, b.y) + half_width + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = dist_point_segment(x + 0.5, y + 0.5, a, b);
      const double cov = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
      if (cov > 0.0) blend(img, y, x, gray, cov);
    }
  }
}

bool inside_convex_quad(double px, double py, const std::array<Vec2, 4>& q) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = q[i];
    const Vec2& b = q[(i + 1) % 4];
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (cross > 0) {
      if (sign < 0) return false;
      sign = 1;
    } else if (cross < 0) {
      if (sign > 0) return false;
      sign = -1;
    }
  }
  return true;
}

void fill_quad(Image& img, const std::array<Vec2, 4>& q, double gray) {
  double minx = q[0].x, maxx = q[0].x, miny = q[0].y, maxy = q[0].y;
  for (const Vec2& v : q) {
    minx = std::min(minx, v.x);
    maxx = std::max(maxx, v.x);
    miny = std::min(miny, v.y);
    maxy = std::max(maxy, v.y);
  }
  const int x0 = std::max(0, int(std::floor(minx)));
  const int x1 = std::min(img.width - 1, int(std::ceil(maxx)));
  const int y0 = std::max(0, int(std::floor(miny)));
  const int y1 = std::min(img.height - 1, int(std::ceil(maxy)));
  static const double sub[2] = {0.25, 0.75};
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int hits = 0;
      for (double sy : sub) {
        for (double sx : sub) {
          if (inside_convex_quad(x + sx, y + sy, q)) ++hits;
        }
      }
      if (hits > 0) blend(img, y, x, gray, hits / 4.0);
    }
  }
}

}  // namespace

SceneSample render_scene(const SceneConfig& cfg, int index) {
  if (cfg.width <= 0 || cfg.height <= 0 || !(cfg.depth_min > 0.0) ||
      cfg.depth_max < cfg.depth_min || cfg.dim_max < cfg.dim_min ||
      !(cfg.dim_min > 0.0) || cfg.max_cuboids < cfg.min_cuboids ||
      cfg.min_cuboids < 1) {
    throw Error("render_scene: invalid SceneConfig");
  }
  Rng rng(Rng::mix(cfg.seed, static_cast<uint64_t>(index)));
  const CameraIntrinsics k{cfg.focal, cfg.width / 2.0, cfg.height / 2.0};

  SceneSample sample;
  sample.image = Image(cfg.height, cfg.width, 0.0);
  const double bg = rng.uniform(cfg.bg_min, cfg.bg_max);
  for (double& p : sample.image.pixels) p = bg;

  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  sample.ann.id = buf;
  sample.ann.image_file = sample.ann.id + ".png";

  const int n_target = rng.uniform_int(cfg.min_cuboids, cfg.max_cuboids);
  std::vector<PlacedCuboid> placed;
  for (int slot = 0; slot < n_target; ++slot) {
    bool found = false;
    for (int attempt = 0; attempt < cfg.max_pose_tries && !found; ++attempt) {
      Cuboid3D c;
      c.dims = Vec3{rng.uniform(cfg.dim_min, cfg.dim_max),
                    rng.uniform(cfg.dim_min, cfg.dim_max),
                    rng.uniform(cfg.dim_min, cfg.dim_max)};
      c.yaw = rng.uniform(cfg.yaw_min, cfg.yaw_max);
      c.pitch = rng.uniform(cfg.pitch_min, cfg.pitch_max);
      c.roll = rng.uniform(cfg.roll_min, cfg.roll_max);
      const double z = rng.uniform(cfg.depth_min, cfg.depth_max);
      const double px = rng.uniform(cfg.margin + 6.0, cfg.width - cfg.margin - 6.0);
      const double py = rng.uniform(cfg.margin + 6.0, cfg.height - cfg.margin - 6.0);
      c.center = Vec3{(px - k.cx) * z / k.f, (py - k.cy) * z / k.f, z};
      if (!canonicalize_pose(c)) continue;

      PlacedCuboid pc;
      pc.shape = c;
      pc.corners3d = cuboid_corners_3d(c);
      bool ok = true;
      for (const Vec3& v : pc.corners3d) ok = ok && v.z > 0.5;
      if (!ok) continue;
      Cuboid2D proj;
      for (int i = 0; i < kNumCorners && ok; ++i) {
        proj.vertices[i] = project(pc.corners3d[i], k);
        ok = proj.vertices[i].x >= cfg.margin &&
             proj.vertices[i].x <= cfg.width - cfg.margin &&
             proj.vertices[i].y >= cfg.margin &&
             proj.vertices[i].y <= cfg.height - cfg.margin;
      }
      if (!ok) continue;
      for (int i = 0; i < kNumCorners; ++i) {
        proj.vertices[i].x = snap_coord(proj.vertices[i].x);
        proj.vertices[i].y = snap_coord(proj.vertices[i].y);
      }
      pc.proj = proj;
      pc.box = enclosing_box(proj);
      for (const PlacedCuboid& other : placed) {
        if (iou(pc.box, other.box) > cfg.max_overlap_iou) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      compute_visibility(pc);
      placed.push_back(std::move(pc));
      found = true;
    }
    if (!found && slot == 0) {
      throw RetryExhausted("no in-frustum cuboid pose after " +
                           std::to_string(cfg.max_pose_tries) + " tries");
    }
    if (!found) break;
  }

  // Painter's order: fill visible faces far to near, then the visible
  // wireframe, then clutter and noise.
  struct FaceDraw {
    double depth;
    std::array<Vec2, 4> quad;
    double gray;
  };
  std::vector<FaceDraw> faces;
  for (PlacedCuboid& pc : placed) {
    const double base = rng.uniform(cfg.shade_min, cfg.shade_max);
    int shade_idx = 0;
    for (int f = 0; f < kNumFaces; ++f) {
      if (!pc.face_visible[f]) continue;
      FaceDraw fd;
      double depth = 0.0;
      for (int i = 0; i < 4; ++i) {
        const int v = kFaceVertices[f][i];
        fd.quad[i] = pc.proj.vertices[v];
        depth += pc.corners3d[v].z * 0.25;
      }
      fd.depth = depth;
      // three distinct levels per cuboid
      fd.gray = std::clamp(base + 0.14 * shade_idx, 0.0, 1.0);
      ++shade_idx;
      faces.push_back(fd);
    }
  }
  std::stable_sort(faces.begin(), faces.end(),
                   [](const FaceDraw& a, const FaceDraw& b) { return a.depth > b.depth; });
  for (const FaceDraw& fd : faces) fill_quad(sample.image, fd.quad, fd.gray);

  for (const PlacedCuboid& pc : placed) {
    const double edge_gray = rng.uniform(cfg.edge_min, cfg.edge_max);
    const EdgeTopology& topo = edge_topology();
    for (const auto& cls : topo.classes) {
      for (const Edge& e : cls) {
        bool visible = false;
        for (int f = 0; f < kNumFaces && !visible; ++f) {
          if (!pc.face_visible[f]) continue;
          bool has_a = false, has_b = false;
          for (int v : kFaceVertices[f]) {
            has_a = has_a || v == e.a;
            has_b = has_b || v == e.b;
          }
          visible = has_a && has_b;
        }
        if (visible) {
          draw_segment(sample.image, pc.proj.vertices[e.a], pc.proj.vertices[e.b],
                       edge_gray);
        }
      }
    }
  }

  const int n_clutter = rng.uniform_int(cfg.clutter_min, cfg.clutter_max);
  for (int i = 0; i < n_clutter; ++i) {
    const Vec2 a{rng.uniform(0.0, double(cfg.width)), rng.uniform(0.0, double(cfg.height))};
    const Vec2 b{rng.uniform(0.0, double(cfg.width)), rng.uniform(0.0, double(cfg.height))};
    draw_segment(sample.image, a, b, rng.uniform(cfg.clutter_gray_min, cfg.clutter_gray_max));
  }

  if (cfg.noise_sigma > 0.0) {
    for (double& p : sample.image.pixels) {
      p += rng.normal(0.0, cfg.noise_sigma);
    }
  }
  for (double& p : sample.image.pixels) p = std::clamp(p, 0.0, 1.0);

  for (const PlacedCuboid& pc : placed) {
    GtInstance gt;
    gt.box = pc.box;
    gt.cuboid = pc.proj;
    gt.vis = pc.vert_visible;
    sample.ann.cuboids.push_back(gt);
    sample.shapes.push_back(pc.shape);
  }
  return sample;
}

void hflip(Image& image, std::vector<GtInstance>& gts) {
  const double w = image.width;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width / 2; ++x) {
      std::swap(image.at(y, x), image.at(y, image.width - 1 - x));
    }
  }
  static const int perm[kNumCorners] = {kFTR, kBTR, kFBR, kFTL,
                                        kBBR, kFBL, kBTL, kBBL};
  for (GtInstance& g : gts) {
    GtInstance out = g;
    for (int i = 0; i < kNumCorners; ++i) {
      out.cuboid.vertices[perm[i]] =
          Vec2{w - g.cuboid.vertices[i].x, g.cuboid.vertices[i].y};
      out.vis[perm[i]] = g.vis[i];
    }
    out.box = BoundingBox{w - g.box.x2, g.box.y1, w - g.box.x1, g.box.y2};
    g = out;
  }
}

void hflip(Image& image, Annotation& ann) { hflip(image, ann.cuboids); }

}  // namespace cuboid
