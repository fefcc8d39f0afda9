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

#include "cuboid/netcore.hpp"
#include "cuboid/refine.hpp"

namespace cuboid {

std::vector<Detection> detect(const Image& image, const Model& model,
                              const DetectOptions& opts) {
  const FeatureMap fm = extract_features(image, model.config.stride);
  const RpnOut rout = rpn_forward(fm, model.rpn);
  const std::vector<Anchor> anchors = generate_anchors(
      fm, model.config.anchor_scales, model.config.anchor_ratios);
  const std::vector<Proposal> proposals =
      propose(rout, anchors, fm.image_width(), fm.image_height(), opts.pre_nms_n,
              opts.post_nms_n, opts.proposal_nms_iou);

  std::vector<Detection> candidates;
  for (const Proposal& pr : proposals) {
    RefineResult refined;
    try {
      refined = refine_detection(fm, model.head, pr.box,
                                 std::max(1, opts.refine_iters));
    } catch (const EmptyRoi&) {
      continue;
    }
    if (refined.steps.empty()) continue;
    const RefineStep& last = refined.steps.back();
    if (last.score < opts.score_thresh) continue;
    candidates.push_back(Detection{last.score, last.box, last.cuboid});
  }

  std::vector<BoundingBox> boxes;
  std::vector<double> scores;
  boxes.reserve(candidates.size());
  scores.reserve(candidates.size());
  for (const Detection& d : candidates) {
    boxes.push_back(d.box);
    scores.push_back(d.score);
  }
  std::vector<Detection> result;
  for (int idx : nms(boxes, scores, opts.nms_iou)) {
    result.push_back(candidates[idx]);
  }
  // nms returns score order already; keep the contract explicit.
  std::stable_sort(result.begin(), result.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  return result;
}

std::vector<Cuboid2D> predict_on_boxes(const Image& image, const Model& model,
                                       const std::vector<BoundingBox>& boxes,
                                       int refine_iters) {
  const FeatureMap fm = extract_features(image, model.config.stride);
  std::vector<Cuboid2D> out;
  out.reserve(boxes.size());
  for (const BoundingBox& box : boxes) {
    RefineResult refined;
    try {
      refined = refine_detection(fm, model.head, box, std::max(1, refine_iters));
    } catch (const EmptyRoi&) {
      refined.steps.clear();
    }
    if (!refined.steps.empty()) {
      out.push_back(refined.steps.back().cuboid);
      continue;
    }
    // Degenerate regression on the very first pass: decode at the input box.
    const RoiPoolOut pooled = roi_pool(fm, box);
    const HeadOut hout = head_forward(pooled.values, model.head);
    out.push_back(decode_vertices(hout.verts, box));
  }
  return out;
}

}  // namespace cuboid
