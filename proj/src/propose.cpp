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
#include <numeric>

#include "cuboid/eval.hpp"
#include "cuboid/netcore.hpp"

namespace cuboid {

std::vector<int> nms(const std::vector<BoundingBox>& boxes,
                     const std::vector<double>& scores, double iou_thresh) {
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<int> keep;
  for (int i : order) {
    bool suppressed = false;
    for (int j : keep) {
      if (iou(boxes[i], boxes[j]) >= iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) keep.push_back(i);
  }
  return keep;
}

std::vector<Proposal> propose(const RpnOut& out, const std::vector<Anchor>& anchors,
                              double image_w, double image_h, int pre_nms_n,
                              int post_nms_n, double iou_thresh) {
  std::vector<Proposal> candidates;
  candidates.reserve(anchors.size());
  for (size_t a = 0; a < anchors.size(); ++a) {
    BoundingBox box = decode_box(anchor_deltas(out, static_cast<int>(a)), anchors[a]);
    box.x1 = std::clamp(box.x1, 0.0, image_w);
    box.y1 = std::clamp(box.y1, 0.0, image_h);
    box.x2 = std::clamp(box.x2, 0.0, image_w);
    box.y2 = std::clamp(box.y2, 0.0, image_h);
    if (!box.valid()) continue;
    candidates.push_back(Proposal{box, anchor_score(out, static_cast<int>(a))});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Proposal& a, const Proposal& b) { return a.score > b.score; });
  if (pre_nms_n > 0 && candidates.size() > static_cast<size_t>(pre_nms_n)) {
    candidates.resize(pre_nms_n);
  }
  std::vector<BoundingBox> boxes;
  std::vector<double> scores;
  boxes.reserve(candidates.size());
  scores.reserve(candidates.size());
  for (const Proposal& c : candidates) {
    boxes.push_back(c.box);
    scores.push_back(c.score);
  }
  const std::vector<int> keep = nms(boxes, scores, iou_thresh);
  std::vector<Proposal> result;
  for (int i : keep) {
    result.push_back(candidates[i]);
    if (post_nms_n > 0 && result.size() >= static_cast<size_t>(post_nms_n)) break;
  }
  return result;
}

}  // namespace cuboid
