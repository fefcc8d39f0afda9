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

#include "cuboid/eval.hpp"
#include "cuboid/netcore.hpp"

namespace cuboid {

std::vector<Anchor> generate_anchors(const FeatureMap& fm,
                                     std::span<const double> scales,
                                     std::span<const double> ratios) {
  std::vector<Anchor> anchors;
  anchors.reserve(static_cast<size_t>(fm.height) * fm.width * scales.size() *
                  ratios.size());
  for (int y = 0; y < fm.height; ++y) {
    for (int x = 0; x < fm.width; ++x) {
      const double cx = (x + 0.5) * fm.stride;
      const double cy = (y + 0.5) * fm.stride;
      for (double s : scales) {
        for (double r : ratios) {
          // r = h/w at constant area s*s.
          const double w = s / std::sqrt(r);
          const double h = s * std::sqrt(r);
          anchors.push_back(Anchor{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w,
                                   cy + 0.5 * h});
        }
      }
    }
  }
  return anchors;
}

AnchorTargets assign_anchor_targets(const std::vector<Anchor>& anchors,
                                    const std::vector<BoundingBox>& gt_boxes,
                                    double pos_iou, double neg_iou) {
  const size_t n = anchors.size();
  const size_t g = gt_boxes.size();
  AnchorTargets t;
  t.labels.assign(n, SampleLabel::kNegative);
  t.deltas.assign(n, BoxDeltas{});
  t.matched_gt.assign(n, -1);
  if (g == 0) return t;

  std::vector<double> best_iou(n, 0.0);
  std::vector<double> gt_best(g, 0.0);
  for (size_t a = 0; a < n; ++a) {
    for (size_t j = 0; j < g; ++j) {
      const double v = iou(anchors[a], gt_boxes[j]);
      if (v > best_iou[a]) {
        best_iou[a] = v;
        t.matched_gt[a] = static_cast<int>(j);
      }
      if (v > gt_best[j]) gt_best[j] = v;
    }
  }
  for (size_t a = 0; a < n; ++a) {
    SampleLabel label = SampleLabel::kIgnore;
    if (best_iou[a] <= neg_iou) label = SampleLabel::kNegative;
    if (best_iou[a] >= pos_iou) label = SampleLabel::kPositive;
    // A GT's best anchor is positive regardless of threshold, ties included.
    for (size_t j = 0; j < g; ++j) {
      if (gt_best[j] > 0.0 && iou(anchors[a], gt_boxes[j]) == gt_best[j]) {
        label = SampleLabel::kPositive;
        break;
      }
    }
    t.labels[a] = label;
    if (label == SampleLabel::kPositive && t.matched_gt[a] >= 0) {
      t.deltas[a] = encode_box(gt_boxes[t.matched_gt[a]], anchors[a]);
    }
  }
  return t;
}

}  // namespace cuboid
