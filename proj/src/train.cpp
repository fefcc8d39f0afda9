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
#include <map>
#include <numeric>
#include <ostream>

#include "cuboid/data.hpp"
#include "cuboid/eval.hpp"
#include "cuboid/netcore.hpp"

namespace cuboid {

namespace {

// First n elements of a partial Fisher-Yates pass, deterministic in rng.
std::vector<int> sample_n(std::vector<int>& pool, size_t n, Rng& rng) {
  n = std::min(n, pool.size());
  for (size_t i = 0; i < n; ++i) {
    std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  }
  return std::vector<int>(pool.begin(), pool.begin() + n);
}

BoundingBox jitter_box(const BoundingBox& b, double frac, double img_w,
                       double img_h, Rng& rng) {
  const double w = b.width(), h = b.height();
  const double cx = b.center_x() + rng.uniform(-frac, frac) * w;
  const double cy = b.center_y() + rng.uniform(-frac, frac) * h;
  const double nw = w * (1.0 + rng.uniform(-frac, frac));
  const double nh = h * (1.0 + rng.uniform(-frac, frac));
  BoundingBox out{cx - 0.5 * nw, cy - 0.5 * nh, cx + 0.5 * nw, cy + 0.5 * nh};
  out.x1 = std::clamp(out.x1, 0.0, img_w);
  out.y1 = std::clamp(out.y1, 0.0, img_h);
  out.x2 = std::clamp(out.x2, 0.0, img_w);
  out.y2 = std::clamp(out.y2, 0.0, img_h);
  if (!out.valid()) return b;
  return out;
}

struct PreparedItem {
  FeatureMap fm;
  std::vector<GtInstance> gts;
};

struct RoiSample {
  BoundingBox roi;
  int gt = -1;  // matched GT index, -1 for negatives
};

struct HeadPass {
  HeadOut out;
  int label = 0;
  int gt = -1;
  BoxDeltas box_target;
  VertexOffsets vert_target{};
};

LossBreakdown train_one_image(const PreparedItem& item, Model& model,
                              const TrainConfig& cfg, Rng& rng,
                              RpnParams& rpn_grads, HeadParams& head_grads) {
  const FeatureMap& fm = item.fm;
  const double img_w = fm.image_width();
  const double img_h = fm.image_height();
  LossBreakdown parts;

  // --- RPN ---
  const std::vector<Anchor> anchors =
      generate_anchors(fm, cfg.model.anchor_scales, cfg.model.anchor_ratios);
  std::vector<BoundingBox> gt_boxes;
  gt_boxes.reserve(item.gts.size());
  for (const auto& g : item.gts) gt_boxes.push_back(g.box);
  const AnchorTargets targets = assign_anchor_targets(
      anchors, gt_boxes, cfg.anchor_pos_iou, cfg.anchor_neg_iou);

  std::vector<int> pos_pool, neg_pool;
  for (size_t a = 0; a < anchors.size(); ++a) {
    if (targets.labels[a] == SampleLabel::kPositive) pos_pool.push_back(int(a));
    if (targets.labels[a] == SampleLabel::kNegative) neg_pool.push_back(int(a));
  }
  const size_t want_pos = size_t(cfg.anchor_batch * cfg.anchor_pos_fraction);
  const std::vector<int> pos = sample_n(pos_pool, want_pos, rng);
  const std::vector<int> neg =
      sample_n(neg_pool, size_t(cfg.anchor_batch) - pos.size(), rng);

  RpnOut rout = rpn_forward(fm, model.rpn);
  const size_t plane = size_t(rout.height) * rout.width;
  std::vector<double> d_obj(rout.obj.size(), 0.0);
  std::vector<double> d_deltas(rout.deltas.size(), 0.0);

  const size_t n_cls = pos.size() + neg.size();
  auto cls_loss_at = [&](int a, int label) {
    const int cell = a / rout.k;
    const int k = a % rout.k;
    const std::array<double, 2> logits{rout.obj[(2 * k) * plane + cell],
                                       rout.obj[(2 * k + 1) * plane + cell]};
    std::array<double, 2> grad;
    const double loss = softmax_log_loss(logits, label, grad);
    const double scale = cfg.weights.anchor_cls / double(n_cls);
    d_obj[(2 * k) * plane + cell] += grad[0] * scale;
    d_obj[(2 * k + 1) * plane + cell] += grad[1] * scale;
    return loss;
  };
  double cls_sum = 0.0;
  for (int a : pos) cls_sum += cls_loss_at(a, 1);
  for (int a : neg) cls_sum += cls_loss_at(a, 0);
  parts.anchor_cls = n_cls ? cls_sum / double(n_cls) : 0.0;

  if (!pos.empty()) {
    std::vector<double> pred(4 * pos.size()), target(4 * pos.size());
    for (size_t i = 0; i < pos.size(); ++i) {
      const BoxDeltas d = anchor_deltas(rout, pos[i]);
      pred[4 * i + 0] = d.dx;
      pred[4 * i + 1] = d.dy;
      pred[4 * i + 2] = d.dw;
      pred[4 * i + 3] = d.dh;
      const BoxDeltas& t = targets.deltas[pos[i]];
      target[4 * i + 0] = t.dx;
      target[4 * i + 1] = t.dy;
      target[4 * i + 2] = t.dw;
      target[4 * i + 3] = t.dh;
    }
    std::vector<double> grad(pred.size());
    // Regression terms sum the per-sample coordinates and average over
    // positives, which is what keeps lambda=1 balanced against the log loss.
    parts.anchor_reg = smooth_l1(pred, target, grad) * 4.0;
    for (size_t i = 0; i < pos.size(); ++i) {
      const int cell = pos[i] / rout.k;
      const int k = pos[i] % rout.k;
      for (int c = 0; c < 4; ++c) {
        d_deltas[(4 * k + c) * plane + cell] +=
            grad[4 * i + c] * 4.0 * cfg.weights.anchor_reg;
      }
    }
  }
  rpn_backward(fm, model.rpn, rout, d_obj, d_deltas, rpn_grads);

  // --- RoI candidates: proposals plus jittered GT boxes ---
  std::vector<RoiSample> candidates;
  const std::vector<Proposal> proposals =
      propose(rout, anchors, img_w, img_h, cfg.pre_nms_n, cfg.post_nms_n,
              cfg.proposal_nms_iou);
  for (const Proposal& pr : proposals) candidates.push_back(RoiSample{pr.box, -1});
  for (size_t j = 0; j < item.gts.size(); ++j) {
    for (int n = 0; n < cfg.gt_jitter_count; ++n) {
      candidates.push_back(RoiSample{
          jitter_box(item.gts[j].box, cfg.gt_jitter_frac, img_w, img_h, rng), -1});
    }
  }
  std::vector<int> roi_pos_pool, roi_neg_pool;
  for (size_t c = 0; c < candidates.size(); ++c) {
    double best = 0.0;
    for (size_t j = 0; j < item.gts.size(); ++j) {
      const double v = iou(candidates[c].roi, item.gts[j].box);
      if (v > best) {
        best = v;
        candidates[c].gt = int(j);
      }
    }
    if (best >= cfg.roi_pos_iou) {
      roi_pos_pool.push_back(int(c));
    } else {
      candidates[c].gt = -1;
      roi_neg_pool.push_back(int(c));
    }
  }
  const size_t roi_want_pos = size_t(cfg.roi_batch * cfg.roi_pos_fraction);
  const std::vector<int> roi_pos = sample_n(roi_pos_pool, roi_want_pos, rng);
  const std::vector<int> roi_neg =
      sample_n(roi_neg_pool, size_t(cfg.roi_batch) - roi_pos.size(), rng);

  // --- Head passes; positives get a second pass at their regressed box ---
  std::vector<HeadPass> passes;
  auto run_pass = [&](const BoundingBox& roi, int label, int gt) -> int {
    RoiPoolOut pooled;
    try {
      pooled = roi_pool(fm, roi);
    } catch (const EmptyRoi&) {
      return -1;
    }
    HeadPass pass;
    pass.out = head_forward(pooled.values, model.head, true, cfg.dropout, &rng);
    pass.label = label;
    pass.gt = gt;
    if (gt >= 0) {
      pass.box_target = encode_box(item.gts[gt].box, roi);
      // Offsets are relative to the pooled RoI. Decoding at the regressed
      // box stays consistent because regression drives it to the GT box,
      // where both frames coincide; the second pass trains exactly there.
      pass.vert_target = encode_vertices(item.gts[gt].cuboid, roi);
    }
    passes.push_back(std::move(pass));
    return int(passes.size()) - 1;
  };

  for (int c : roi_pos) {
    const RoiSample& s = candidates[c];
    const int first = run_pass(s.roi, 1, s.gt);
    if (first >= 0 && cfg.second_pass) {
      BoundingBox b1 = decode_box(passes[first].out.box, s.roi);
      b1.x1 = std::clamp(b1.x1, 0.0, img_w);
      b1.y1 = std::clamp(b1.y1, 0.0, img_h);
      b1.x2 = std::clamp(b1.x2, 0.0, img_w);
      b1.y2 = std::clamp(b1.y2, 0.0, img_h);
      if (b1.valid() && b1.area() >= 1.0) {
        run_pass(b1, 1, s.gt);
      }
    }
  }
  for (int c : roi_neg) run_pass(candidates[c].roi, 0, -1);

  const size_t n_roi = passes.size();
  std::vector<size_t> reg_passes;
  for (size_t i = 0; i < n_roi; ++i) {
    if (passes[i].gt >= 0) reg_passes.push_back(i);
  }

  // Classification over all passes.
  std::vector<std::array<double, 2>> d_cls(n_roi, {0.0, 0.0});
  double roi_cls_sum = 0.0;
  for (size_t i = 0; i < n_roi; ++i) {
    std::array<double, 2> grad;
    roi_cls_sum += softmax_log_loss(passes[i].out.cls_logits, passes[i].label, grad);
    const double scale = cfg.weights.roi_cls / double(n_roi);
    d_cls[i] = {grad[0] * scale, grad[1] * scale};
  }
  parts.roi_cls = n_roi ? roi_cls_sum / double(n_roi) : 0.0;

  // Box and corner regression over positive passes.
  std::vector<std::array<double, 4>> d_box(n_roi, {0, 0, 0, 0});
  std::vector<std::array<double, 16>> d_vert(n_roi);
  for (auto& d : d_vert) d.fill(0.0);
  if (!reg_passes.empty()) {
    const size_t m = reg_passes.size();
    std::vector<double> bp(4 * m), bt(4 * m), bg(4 * m);
    std::vector<double> vp(16 * m), vt(16 * m), vg(16 * m);
    for (size_t i = 0; i < m; ++i) {
      const HeadPass& pass = passes[reg_passes[i]];
      bp[4 * i + 0] = pass.out.box.dx;
      bp[4 * i + 1] = pass.out.box.dy;
      bp[4 * i + 2] = pass.out.box.dw;
      bp[4 * i + 3] = pass.out.box.dh;
      bt[4 * i + 0] = pass.box_target.dx;
      bt[4 * i + 1] = pass.box_target.dy;
      bt[4 * i + 2] = pass.box_target.dw;
      bt[4 * i + 3] = pass.box_target.dh;
      for (int v = 0; v < 16; ++v) {
        vp[16 * i + v] = pass.out.verts[v];
        vt[16 * i + v] = pass.vert_target[v];
      }
    }
    parts.roi_reg = smooth_l1(bp, bt, bg) * 4.0;
    parts.roi_corner = smooth_l1(vp, vt, vg) * 16.0;
    for (size_t i = 0; i < m; ++i) {
      for (int c = 0; c < 4; ++c) {
        d_box[reg_passes[i]][c] = bg[4 * i + c] * 4.0 * cfg.weights.roi_reg;
      }
      for (int v = 0; v < 16; ++v) {
        d_vert[reg_passes[i]][v] = vg[16 * i + v] * 16.0 * cfg.weights.roi_corner;
      }
    }
  }

  for (size_t i = 0; i < n_roi; ++i) {
    head_backward(model.head, passes[i].out, d_cls[i], d_box[i], d_vert[i],
                  head_grads, nullptr);
  }

  return total_loss(parts, cfg.weights);
}

void zero(std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); }

void zero_grads(RpnParams& r, HeadParams& h) {
  zero(r.conv_w);
  zero(r.conv_b);
  zero(r.obj_w);
  zero(r.obj_b);
  zero(r.delta_w);
  zero(r.delta_b);
  zero(h.fc1_w);
  zero(h.fc1_b);
  zero(h.fc2_w);
  zero(h.fc2_b);
  zero(h.cls_w);
  zero(h.cls_b);
  zero(h.box_w);
  zero(h.box_b);
  zero(h.vert_w);
  zero(h.vert_b);
}

}  // namespace

TrainResult train(const std::vector<TrainItem>& dataset, const TrainConfig& cfg,
                  std::ostream* log_stream) {
  if (dataset.empty()) throw EmptyDataset("train: no images");

  Rng rng(cfg.seed);
  TrainResult result;
  Model& model = result.model;
  model.config = cfg.model;
  model.seed = cfg.seed;
  model.rpn.resize(cfg.model.c_in, cfg.model.c_mid, cfg.model.k());
  model.head.resize(cfg.model.c_in, cfg.model.hidden);
  model.rpn.init(rng);
  model.head.init(rng);

  // The extractor is fixed, so features are cached once per item (and per
  // flipped item when augmenting).
  std::vector<PreparedItem> items;
  items.reserve(dataset.size() * (cfg.augment_hflip ? 2 : 1));
  for (const TrainItem& it : dataset) {
    items.push_back(
        PreparedItem{extract_features(it.image, cfg.model.stride), it.gts});
    if (cfg.augment_hflip) {
      Image flipped_img = it.image;
      std::vector<GtInstance> flipped_gts = it.gts;
      hflip(flipped_img, flipped_gts);
      items.push_back(PreparedItem{
          extract_features(flipped_img, cfg.model.stride), std::move(flipped_gts)});
    }
  }

  RpnParams rpn_grads = model.rpn.zeros_clone();
  HeadParams head_grads = model.head.zeros_clone();
  auto params = param_tensors(model.rpn, model.head);
  auto grads = param_tensors(static_cast<const RpnParams&>(rpn_grads),
                             static_cast<const HeadParams&>(head_grads));
  OptimState opt;

  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  size_t cursor = 0;

  const int drop_at = int(cfg.lr_drop_fraction * cfg.iterations);
  LossBreakdown window{};
  int window_n = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    if (cursor == order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    const PreparedItem& item = items[order[cursor++]];

    zero_grads(rpn_grads, head_grads);
    const LossBreakdown parts =
        train_one_image(item, model, cfg, rng, rpn_grads, head_grads);

    const double lr = it >= drop_at ? cfg.lr * cfg.lr_drop_factor : cfg.lr;
    sgd_step(params, grads, opt, lr, cfg.momentum, cfg.weight_decay);

    window.anchor_cls += parts.anchor_cls;
    window.anchor_reg += parts.anchor_reg;
    window.roi_cls += parts.roi_cls;
    window.roi_reg += parts.roi_reg;
    window.roi_corner += parts.roi_corner;
    window.total += parts.total;
    ++window_n;
    if ((it + 1) % cfg.log_every == 0 || it + 1 == cfg.iterations) {
      LossBreakdown avg = window;
      avg.anchor_cls /= window_n;
      avg.anchor_reg /= window_n;
      avg.roi_cls /= window_n;
      avg.roi_reg /= window_n;
      avg.roi_corner /= window_n;
      avg.total /= window_n;
      result.log.push_back(avg);
      if (log_stream != nullptr) {
        (*log_stream) << "iter " << (it + 1) << "/" << cfg.iterations
                      << "  total " << avg.total << "  anchor_cls "
                      << avg.anchor_cls << "  anchor_reg " << avg.anchor_reg
                      << "  roi_cls " << avg.roi_cls << "  roi_reg "
                      << avg.roi_reg << "  roi_corner " << avg.roi_corner
                      << "  lr " << lr << "\n";
      }
      window = LossBreakdown{};
      window_n = 0;
    }
  }
  return result;
}

}  // namespace cuboid
