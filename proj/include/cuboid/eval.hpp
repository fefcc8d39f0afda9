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
#include <iosfwd>
#include <utility>
#include <vector>

#include "cuboid/annotations.hpp"
#include "cuboid/geometry.hpp"
#include "cuboid/netcore.hpp"

namespace cuboid {

// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

// A keypoint is correct when it lies within alpha * max(h, w) of the GT
// keypoint (inclusive), with h/w from that instance's GT box.
bool keypoint_correct(const Vec2& pred, const Vec2& gt, const BoundingBox& gt_box,
                      double alpha);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};
using PrCurve = std::vector<PrPoint>;

// Greedy one-to-one matching in score order (stable: equal scores keep input
// order). A detection is a TP when IoU with an unmatched GT >= iou_thresh.
struct MatchResult {
  std::vector<int> rank;         // detection indices, best score first
  std::vector<uint8_t> tp;       // per rank position
  std::vector<int> det_to_gt;    // per detection index, -1 if FP
  std::vector<int> gt_to_det;    // per GT index, -1 if missed
};

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<BoundingBox>& gt_boxes,
                             double iou_thresh = 0.5);

// Area under the precision envelope over recall (all-point interpolation).
// tp_ranked is the TP/FP sequence in score-rank order.
double average_precision(const std::vector<uint8_t>& tp_ranked, size_t n_gt);

// One point per distinct score threshold, recall nondecreasing.
PrCurve pr_curve(const std::vector<double>& scores_ranked,
                 const std::vector<uint8_t>& tp_ranked, size_t n_gt);

// Per-image detections paired with that image's ground truth.
struct ImageDetections {
  std::vector<Detection> dets;
  std::vector<GtInstance> gts;
};

struct DetectionEval {
  double ap = 0.0;
  PrCurve curve;
  std::vector<double> scores_ranked;  // pooled over images
  std::vector<uint8_t> tp_ranked;
  size_t n_gt = 0;
};

DetectionEval evaluate_detections(const std::vector<ImageDetections>& data,
                                  double iou_thresh = 0.5);

// PCK given GT boxes: preds[i] is the predicted cuboid for gts[i].
// Throws CountMismatch when the lists disagree.
struct PckResult {
  double overall = 0.0;
  std::array<double, kNumCorners> per_keypoint{};
};

PckResult pck(const std::vector<GtInstance>& gts,
              const std::vector<Cuboid2D>& preds, double alpha = 0.1);

// A face counts as correct only when all 4 of its keypoints are correct.
std::array<double, kNumFaces> face_pck(const std::vector<GtInstance>& gts,
                                       const std::vector<Cuboid2D>& preds,
                                       double alpha = 0.1);

// (alpha, pck) pairs; nondecreasing in alpha.
std::vector<std::pair<double, double>> pck_sweep(
    const std::vector<GtInstance>& gts, const std::vector<Cuboid2D>& preds,
    const std::vector<double>& alphas);

// APK: per keypoint, rank all detections by score; a detection contributes a
// keypoint-TP when its box matched a GT and that keypoint is within the alpha
// threshold of the matched GT's keypoint. n_gt instances per keypoint.
struct ApkResult {
  double overall = 0.0;
  std::array<double, kNumCorners> per_keypoint{};
};

ApkResult apk(const std::vector<ImageDetections>& data, double alpha = 0.1,
              double iou_thresh = 0.5);

// CSV writers: header row then 6-significant-digit values.
void write_pr_csv(std::ostream& os, const PrCurve& curve);
void write_pck_csv(std::ostream& os,
                   const std::vector<std::pair<double, double>>& sweep);

}  // namespace cuboid
