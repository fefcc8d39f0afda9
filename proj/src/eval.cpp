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

#include "cuboid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace cuboid {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

bool keypoint_correct(const Vec2& pred, const Vec2& gt, const BoundingBox& gt_box,
                      double alpha) {
  const double thresh = alpha * std::max(gt_box.height(), gt_box.width());
  return std::hypot(pred.x - gt.x, pred.y - gt.y) <= thresh;
}

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<BoundingBox>& gt_boxes,
                             double iou_thresh) {
  MatchResult m;
  m.rank.resize(dets.size());
  std::iota(m.rank.begin(), m.rank.end(), 0);
  std::stable_sort(m.rank.begin(), m.rank.end(), [&](int a, int b) {
    return dets[a].score > dets[b].score;
  });
  m.tp.assign(dets.size(), 0);
  m.det_to_gt.assign(dets.size(), -1);
  m.gt_to_det.assign(gt_boxes.size(), -1);
  for (size_t r = 0; r < m.rank.size(); ++r) {
    const int d = m.rank[r];
    double best = 0.0;
    int best_gt = -1;
    for (size_t j = 0; j < gt_boxes.size(); ++j) {
      if (m.gt_to_det[j] >= 0) continue;
      const double v = iou(dets[d].box, gt_boxes[j]);
      if (v >= iou_thresh && v > best) {
        best = v;
        best_gt = static_cast<int>(j);
      }
    }
    if (best_gt >= 0) {
      m.tp[r] = 1;
      m.det_to_gt[d] = best_gt;
      m.gt_to_det[best_gt] = d;
    }
  }
  return m;
}

double average_precision(const std::vector<uint8_t>& tp_ranked, size_t n_gt) {
  if (n_gt == 0) return 0.0;
  const size_t n = tp_ranked.size();
  std::vector<double> precision(n), recall(n);
  size_t tp = 0;
  for (size_t i = 0; i < n; ++i) {
    tp += tp_ranked[i];
    precision[i] = double(tp) / double(i + 1);
    recall[i] = double(tp) / double(n_gt);
  }
  // Precision envelope, right to left.
  for (size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

PrCurve pr_curve(const std::vector<double>& scores_ranked,
                 const std::vector<uint8_t>& tp_ranked, size_t n_gt) {
  PrCurve curve;
  size_t tp = 0;
  for (size_t i = 0; i < tp_ranked.size(); ++i) {
    tp += tp_ranked[i];
    const bool last_of_group =
        i + 1 == tp_ranked.size() || scores_ranked[i + 1] != scores_ranked[i];
    if (last_of_group) {
      curve.push_back(PrPoint{n_gt ? double(tp) / double(n_gt) : 0.0,
                              double(tp) / double(i + 1)});
    }
  }
  return curve;
}

DetectionEval evaluate_detections(const std::vector<ImageDetections>& data,
                                  double iou_thresh) {
  // Match per image, then pool the ranked lists by score.
  struct Entry {
    double score;
    uint8_t tp;
    size_t image;
    int det;
  };
  std::vector<Entry> entries;
  size_t n_gt = 0;
  for (size_t im = 0; im < data.size(); ++im) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(data[im].gts.size());
    for (const auto& g : data[im].gts) boxes.push_back(g.box);
    n_gt += boxes.size();
    const MatchResult m = match_detections(data[im].dets, boxes, iou_thresh);
    for (size_t r = 0; r < m.rank.size(); ++r) {
      entries.push_back(Entry{data[im].dets[m.rank[r]].score, m.tp[r], im, m.rank[r]});
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.score > b.score;
  });
  DetectionEval ev;
  ev.n_gt = n_gt;
  ev.scores_ranked.reserve(entries.size());
  ev.tp_ranked.reserve(entries.size());
  for (const Entry& e : entries) {
    ev.scores_ranked.push_back(e.score);
    ev.tp_ranked.push_back(e.tp);
  }
  ev.ap = average_precision(ev.tp_ranked, n_gt);
  ev.curve = pr_curve(ev.scores_ranked, ev.tp_ranked, n_gt);
  return ev;
}

PckResult pck(const std::vector<GtInstance>& gts,
              const std::vector<Cuboid2D>& preds, double alpha) {
  if (gts.size() != preds.size()) {
    throw CountMismatch("pck: " + std::to_string(gts.size()) + " GT vs " +
                        std::to_string(preds.size()) + " predictions");
  }
  PckResult r;
  if (gts.empty()) return r;
  std::array<size_t, kNumCorners> correct{};
  for (size_t i = 0; i < gts.size(); ++i) {
    for (int k = 0; k < kNumCorners; ++k) {
      if (keypoint_correct(preds[i].vertices[k], gts[i].cuboid.vertices[k],
                           gts[i].box, alpha)) {
        ++correct[k];
      }
    }
  }
  size_t total = 0;
  for (int k = 0; k < kNumCorners; ++k) {
    r.per_keypoint[k] = double(correct[k]) / double(gts.size());
    total += correct[k];
  }
  r.overall = double(total) / double(gts.size() * kNumCorners);
  return r;
}

std::array<double, kNumFaces> face_pck(const std::vector<GtInstance>& gts,
                                       const std::vector<Cuboid2D>& preds,
                                       double alpha) {
  if (gts.size() != preds.size()) {
    throw CountMismatch("face_pck: instance count disagreement");
  }
  std::array<double, kNumFaces> out{};
  if (gts.empty()) return out;
  for (size_t i = 0; i < gts.size(); ++i) {
    std::array<bool, kNumCorners> ok;
    for (int k = 0; k < kNumCorners; ++k) {
      ok[k] = keypoint_correct(preds[i].vertices[k], gts[i].cuboid.vertices[k],
                               gts[i].box, alpha);
    }
    for (int f = 0; f < kNumFaces; ++f) {
      bool face_ok = true;
      for (int k : kFaceVertices[f]) face_ok = face_ok && ok[k];
      if (face_ok) out[f] += 1.0;
    }
  }
  for (int f = 0; f < kNumFaces; ++f) out[f] /= double(gts.size());
  return out;
}

std::vector<std::pair<double, double>> pck_sweep(
    const std::vector<GtInstance>& gts, const std::vector<Cuboid2D>& preds,
    const std::vector<double>& alphas) {
  std::vector<std::pair<double, double>> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.emplace_back(a, pck(gts, preds, a).overall);
  return out;
}

ApkResult apk(const std::vector<ImageDetections>& data, double alpha,
              double iou_thresh) {
  struct Entry {
    double score;
    std::array<uint8_t, kNumCorners> kp_tp;
  };
  std::vector<Entry> entries;
  size_t n_gt = 0;
  for (const ImageDetections& im : data) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(im.gts.size());
    for (const auto& g : im.gts) boxes.push_back(g.box);
    n_gt += boxes.size();
    const MatchResult m = match_detections(im.dets, boxes, iou_thresh);
    for (int d : m.rank) {
      Entry e;
      e.score = im.dets[d].score;
      e.kp_tp.fill(0);
      const int j = m.det_to_gt[d];
      if (j >= 0) {
        for (int k = 0; k < kNumCorners; ++k) {
          e.kp_tp[k] = keypoint_correct(im.dets[d].cuboid.vertices[k],
                                        im.gts[j].cuboid.vertices[k],
                                        im.gts[j].box, alpha)
                           ? 1
                           : 0;
        }
      }
      entries.push_back(e);
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });
  ApkResult r;
  std::vector<uint8_t> tp_ranked(entries.size());
  double sum = 0.0;
  for (int k = 0; k < kNumCorners; ++k) {
    for (size_t i = 0; i < entries.size(); ++i) tp_ranked[i] = entries[i].kp_tp[k];
    r.per_keypoint[k] = average_precision(tp_ranked, n_gt);
    sum += r.per_keypoint[k];
  }
  r.overall = sum / kNumCorners;
  return r;
}

namespace {

void write_sig6(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  os << buf;
}

}  // namespace

void write_pr_csv(std::ostream& os, const PrCurve& curve) {
  os << "recall,precision\n";
  for (const PrPoint& p : curve) {
    write_sig6(os, p.recall);
    os << ',';
    write_sig6(os, p.precision);
    os << '\n';
  }
}

void write_pck_csv(std::ostream& os,
                   const std::vector<std::pair<double, double>>& sweep) {
  os << "alpha,pck\n";
  for (const auto& [a, v] : sweep) {
    write_sig6(os, a);
    os << ',';
    write_sig6(os, v);
    os << '\n';
  }
}

}  // namespace cuboid
