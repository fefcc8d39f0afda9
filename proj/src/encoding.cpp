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

#include "cuboid/encoding.hpp"

#include <cmath>

namespace cuboid {

VertexOffsets encode_vertices(const Cuboid2D& c, const BoundingBox& roi) {
  const double xc = roi.center_x();
  const double yc = roi.center_y();
  const double w = roi.width();
  const double h = roi.height();
  VertexOffsets t;
  for (int i = 0; i < kNumCorners; ++i) {
    t[2 * i] = (c.vertices[i].x - xc) / w;
    t[2 * i + 1] = (c.vertices[i].y - yc) / h;
  }
  return t;
}

Cuboid2D decode_vertices(const VertexOffsets& t, const BoundingBox& roi) {
  const double xc = roi.center_x();
  const double yc = roi.center_y();
  const double w = roi.width();
  const double h = roi.height();
  Cuboid2D c;
  for (int i = 0; i < kNumCorners; ++i) {
    c.vertices[i].x = t[2 * i] * w + xc;
    c.vertices[i].y = t[2 * i + 1] * h + yc;
  }
  return c;
}

BoxDeltas encode_box(const BoundingBox& gt, const BoundingBox& ref) {
  BoxDeltas d;
  d.dx = (gt.center_x() - ref.center_x()) / ref.width();
  d.dy = (gt.center_y() - ref.center_y()) / ref.height();
  d.dw = std::log(gt.width() / ref.width());
  d.dh = std::log(gt.height() / ref.height());
  return d;
}

BoundingBox decode_box(const BoxDeltas& d, const BoundingBox& ref) {
  const double cx = d.dx * ref.width() + ref.center_x();
  const double cy = d.dy * ref.height() + ref.center_y();
  const double w = std::exp(d.dw) * ref.width();
  const double h = std::exp(d.dh) * ref.height();
  return BoundingBox{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

}  // namespace cuboid
