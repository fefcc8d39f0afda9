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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cuboid/annotations.hpp"
#include "cuboid/encoding.hpp"
#include "cuboid/geometry.hpp"
#include "cuboid/kernels.hpp"
#include "cuboid/losses.hpp"
#include "cuboid/rng.hpp"
#include "cuboid/tensor.hpp"

namespace cuboid {

using Anchor = BoundingBox;

// ---------------------------------------------------------------------------
// Trainable parameters
// ---------------------------------------------------------------------------

// 3x3 conv + ReLU trunk, then 1x1 objectness (2K) and 1x1 deltas (4K).
struct RpnParams {
  int c_in = kExtractorChannels;
  int c_mid = 32;
  int k = 9;  // anchors per cell
  std::vector<double> conv_w, conv_b;    // [c_mid][c_in][3][3], [c_mid]
  std::vector<double> obj_w, obj_b;      // [2k][c_mid], [2k]
  std::vector<double> delta_w, delta_b;  // [4k][c_mid], [4k]

  void resize(int c_in_, int c_mid_, int k_);
  void init(Rng& rng);        // He init for the trunk, small for outputs
  RpnParams zeros_clone() const;
};

// flatten -> FC1 -> ReLU -> dropout -> FC2 -> ReLU -> dropout -> 3 heads.
struct HeadParams {
  int c_in = kExtractorChannels;
  int hidden = 64;
  std::vector<double> fc1_w, fc1_b;    // [hidden][P], P = 7*7*c_in
  std::vector<double> fc2_w, fc2_b;    // [hidden][hidden]
  std::vector<double> cls_w, cls_b;    // [2][hidden]
  std::vector<double> box_w, box_b;    // [4][hidden]
  std::vector<double> vert_w, vert_b;  // [16][hidden]

  int input_size() const { return kPooledSize * kPooledSize * c_in; }
  void resize(int c_in_, int hidden_);
  void init(Rng& rng);
  HeadParams zeros_clone() const;
};

struct Detection {
  double score = 0.0;  // cuboidness, softmax output in [0, 1]
  BoundingBox box;
  Cuboid2D cuboid;
};

// ---------------------------------------------------------------------------
// Anchors and target assignment
// ---------------------------------------------------------------------------

// K = |scales| x |ratios| anchors per cell, centered on cell centers; anchor
// index = (y * W + x) * K + si * |ratios| + ri. ratio r = h/w at equal area,
// so scale s with ratio 1 is an s x s square.
std::vector<Anchor> generate_anchors(const FeatureMap& fm,
                                     std::span<const double> scales,
                                     std::span<const double> ratios);

enum class SampleLabel : int8_t { kNegative = 0, kPositive = 1, kIgnore = 2 };

struct AnchorTargets {
  std::vector<SampleLabel> labels;
  std::vector<BoxDeltas> deltas;  // meaningful for positives only
  std::vector<int> matched_gt;    // GT index, -1 when unmatched
};

// Positive: IoU >= pos_iou with some GT, or the highest-IoU anchor of a GT
// (ties included). Negative: max IoU <= neg_iou. Everything else is ignored.
AnchorTargets assign_anchor_targets(const std::vector<Anchor>& anchors,
                                    const std::vector<BoundingBox>& gt_boxes,
                                    double pos_iou = 0.7, double neg_iou = 0.3);

// ---------------------------------------------------------------------------
// RPN forward/backward
// ---------------------------------------------------------------------------

struct RpnOut {
  int height = 0, width = 0, k = 0;
  std::vector<double> obj;     // [2K][H][W] logits
  std::vector<double> deltas;  // [4K][H][W]
  // cache for backward
  std::vector<double> hidden_pre;  // [c_mid][H][W]
  std::vector<double> hidden;      // post-ReLU
};

RpnOut rpn_forward(const FeatureMap& fm, const RpnParams& p);

// Accumulates parameter gradients into grads (same shapes as p).
void rpn_backward(const FeatureMap& fm, const RpnParams& p, const RpnOut& cache,
                  const std::vector<double>& d_obj,
                  const std::vector<double>& d_deltas, RpnParams& grads);

// Objectness score (cuboid probability) of one anchor slot.
double anchor_score(const RpnOut& out, int anchor_index);
BoxDeltas anchor_deltas(const RpnOut& out, int anchor_index);

// ---------------------------------------------------------------------------
// Proposals and NMS
// ---------------------------------------------------------------------------

// Greedy NMS: highest score first, suppress everything with IoU >= thresh.
// Equal scores are kept in input order. Returns kept indices in score order.
std::vector<int> nms(const std::vector<BoundingBox>& boxes,
                     const std::vector<double>& scores, double iou_thresh);

struct Proposal {
  BoundingBox box;
  double score = 0.0;
};

std::vector<Proposal> propose(const RpnOut& out, const std::vector<Anchor>& anchors,
                              double image_w, double image_h, int pre_nms_n,
                              int post_nms_n, double iou_thresh);

// ---------------------------------------------------------------------------
// R-CNN head forward/backward
// ---------------------------------------------------------------------------

struct HeadOut {
  std::array<double, 2> cls_logits{};
  BoxDeltas box;
  VertexOffsets verts{};
  double score() const;  // softmax cuboid probability

  // cache
  std::vector<double> input;           // flattened pooled features
  std::vector<double> z1, h1;          // FC1 pre-ReLU / post-ReLU+dropout
  std::vector<double> z2, h2;          // FC2 pre-ReLU / post-ReLU+dropout
  std::vector<uint8_t> keep1, keep2;   // dropout keep masks (train mode)
  bool train_mode = false;
  double keep_prob = 1.0;
};

// Inverted dropout with masks drawn from rng and kept in the cache so the
// backward pass is exact. Eval mode (train_mode=false) is deterministic and
// ignores rng.
HeadOut head_forward(std::span<const double> pooled, const HeadParams& p,
                     bool train_mode = false, double dropout_p = 0.5,
                     Rng* rng = nullptr);

// Accumulates parameter gradients; d_input (size P) is optional.
void head_backward(const HeadParams& p, const HeadOut& cache,
                   const std::array<double, 2>& d_cls,
                   const std::array<double, 4>& d_box,
                   const std::array<double, 16>& d_verts, HeadParams& grads,
                   double* d_input = nullptr);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptimState {
  std::vector<std::vector<double>> velocity;
  long iteration = 0;
};

// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
// Velocity buffers are created on first use; ShapeMismatch on disagreement.
void sgd_step(std::span<std::vector<double>* const> params,
              std::span<const std::vector<double>* const> grads,
              OptimState& state, double lr, double momentum,
              double weight_decay);

// Fixed enumeration order shared by the optimizer and the checkpoint codec.
std::vector<std::vector<double>*> param_tensors(RpnParams& rpn, HeadParams& head);
std::vector<const std::vector<double>*> param_tensors(const RpnParams& rpn,
                                                      const HeadParams& head);
std::vector<std::pair<std::string, std::vector<int>>> param_shapes(
    const RpnParams& rpn, const HeadParams& head);

// ---------------------------------------------------------------------------
// Model, training, detection
// ---------------------------------------------------------------------------

// Desk-scale defaults; paper-scale widths (512 / 4096) remain valid configs.
// Feature stride 2 rather than the extractor's generic default: corner
// regression at 64x64 needs the finer grid to stay inside the PCK tolerance.
struct ModelConfig {
  int stride = 2;
  int c_in = kExtractorChannels;
  int c_mid = 32;
  int hidden = 256;
  std::vector<double> anchor_scales{16.0, 24.0, 32.0};
  std::vector<double> anchor_ratios{0.5, 1.0, 2.0};

  int k() const { return static_cast<int>(anchor_scales.size() * anchor_ratios.size()); }
};

struct Model {
  ModelConfig config;
  RpnParams rpn;
  HeadParams head;
  uint64_t seed = 0;
};

struct TrainItem {
  Image image;
  std::vector<GtInstance> gts;
};

// The 50K-iteration schedule of the original recipe scaled down 10x; the
// regression-heavy RoI minibatch and zero dropout suit the small FC widths.
struct TrainConfig {
  ModelConfig model;
  LossWeights weights;
  int iterations = 5000;
  double lr = 0.02;
  double lr_drop_fraction = 0.6;  // mirrors the 30K-of-50K schedule
  double lr_drop_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double dropout = 0.0;
  int anchor_batch = 64;
  double anchor_pos_fraction = 0.5;
  double anchor_pos_iou = 0.7;
  double anchor_neg_iou = 0.3;
  int roi_batch = 64;
  double roi_pos_fraction = 0.75;
  double roi_pos_iou = 0.5;
  int pre_nms_n = 300;
  int post_nms_n = 32;
  double proposal_nms_iou = 0.7;
  int gt_jitter_count = 8;
  double gt_jitter_frac = 0.1;
  bool second_pass = true;  // re-pool at the regressed box, losses on both
  bool augment_hflip = true;
  uint64_t seed = 1;
  int log_every = 100;
};

struct TrainResult {
  Model model;
  std::vector<LossBreakdown> log;  // one averaged entry per log_every window
};

// Joint single-stage loop over RPN and head; deterministic given cfg.seed.
// Throws EmptyDataset when dataset is empty.
TrainResult train(const std::vector<TrainItem>& dataset, const TrainConfig& cfg,
                  std::ostream* log_stream = nullptr);

struct DetectOptions {
  double score_thresh = 0.5;
  double nms_iou = 0.3;
  int refine_iters = 2;
  int pre_nms_n = 300;
  int post_nms_n = 32;
  double proposal_nms_iou = 0.7;
};

std::vector<Detection> detect(const Image& image, const Model& model,
                              const DetectOptions& opts = {});

// Vertex predictions conditioned on known boxes (the PCK protocol input):
// pool at each box, run the head, decode at the regressed frame.
std::vector<Cuboid2D> predict_on_boxes(const Image& image, const Model& model,
                                       const std::vector<BoundingBox>& boxes,
                                       int refine_iters = 1);

// ---------------------------------------------------------------------------
// Checkpoint IO: one-line JSON header (schema, config, shape table, seed,
// payload crc32), then raw little-endian float32 blocks in header order.
// ---------------------------------------------------------------------------

void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);  // ChecksumError / ShapeMismatch / ParseError

}  // namespace cuboid
