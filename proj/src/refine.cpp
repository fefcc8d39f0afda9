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

#include "cuboid/refine.hpp"

#include <algorithm>

namespace cuboid {

namespace {

BoundingBox clip_to_image(BoundingBox b, double w, double h) {
  b.x1 = std::clamp(b.x1, 0.0, w);
  b.y1 = std::clamp(b.y1, 0.0, h);
  b.x2 = std::clamp(b.x2, 0.0, w);
  b.y2 = std::clamp(b.y2, 0.0, h);
  return b;
}

}  // namespace

RefineResult refine_detection(const FeatureMap& fm, const HeadParams& head,
                              const BoundingBox& box0, int iters) {
  RefineResult result;
  const double img_w = fm.image_width();
  const double img_h = fm.image_height();
  BoundingBox current = clip_to_image(box0, img_w, img_h);
  for (int it = 0; it < iters; ++it) {
    const RoiPoolOut pooled = roi_pool(fm, current);
    const HeadOut out = head_forward(pooled.values, head);
    BoundingBox regressed = decode_box(out.box, current);
    regressed = clip_to_image(regressed, img_w, img_h);
    // Covers both a collapsed decode and a box regressed off the image.
    if (regressed.width() * regressed.height() < 1.0) {
      result.degenerate = true;
      return result;
    }
    RefineStep step;
    step.box = regressed;
    step.cuboid = decode_vertices(out.verts, regressed);
    step.score = out.score();
    result.steps.push_back(step);
    current = regressed;
  }
  return result;
}

}  // namespace cuboid
