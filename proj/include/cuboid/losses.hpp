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
#include <span>
#include <vector>

namespace cuboid {

// One weight per term of the complete objective; the defaults reproduce the
// all-ones configuration. Zeroing a weight removes its term exactly, which
// is how the ablation configurations are expressed.
struct LossWeights {
  double anchor_cls = 1.0;  // lambda1
  double anchor_reg = 1.0;  // lambda2
  double roi_cls = 1.0;     // lambda3
  double roi_reg = 1.0;     // lambda4
  double roi_corner = 1.0;  // lambda5
};

struct LossBreakdown {
  double anchor_cls = 0.0;
  double anchor_reg = 0.0;
  double roi_cls = 0.0;
  double roi_reg = 0.0;
  double roi_corner = 0.0;
  double total = 0.0;
};

// Mean over elements of the piecewise loss of (pred - target):
// 0.5*x^2 for |x| < 1, |x| - 0.5 otherwise. grad is d(loss)/d(pred).
// Throws LengthMismatch when the spans differ in size.
double smooth_l1(std::span<const double> pred, std::span<const double> target,
                 std::span<double> grad);

// -log softmax(logits)[label] over two classes, max-subtracted for
// stability. grad = softmax - onehot(label).
double softmax_log_loss(const std::array<double, 2>& logits, int label,
                        std::array<double, 2>& grad);

LossBreakdown total_loss(const LossBreakdown& parts, const LossWeights& w);

}  // namespace cuboid
