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

#include "cuboid/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cuboid/errors.hpp"

namespace cuboid {

double smooth_l1(std::span<const double> pred, std::span<const double> target,
                 std::span<double> grad) {
  if (pred.size() != target.size() || pred.size() != grad.size()) {
    throw LengthMismatch("smooth_l1 sizes " + std::to_string(pred.size()) +
                         " vs " + std::to_string(target.size()));
  }
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double loss = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i] - target[i];
    const double ax = std::abs(x);
    if (ax < 1.0) {
      loss += 0.5 * x * x;
      grad[i] = x * inv_n;
    } else {
      loss += ax - 0.5;
      grad[i] = (x > 0.0 ? 1.0 : -1.0) * inv_n;
    }
  }
  return loss * inv_n;
}

double softmax_log_loss(const std::array<double, 2>& logits, int label,
                        std::array<double, 2>& grad) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  const double p0 = e0 / z;
  const double p1 = e1 / z;
  grad[0] = p0 - (label == 0 ? 1.0 : 0.0);
  grad[1] = p1 - (label == 1 ? 1.0 : 0.0);
  // log(p_label) via the stabilized form, avoids log of a denormal.
  const double log_p = (logits[label] - m) - std::log(z);
  return -log_p;
}

LossBreakdown total_loss(const LossBreakdown& parts, const LossWeights& w) {
  LossBreakdown out = parts;
  out.total = w.anchor_cls * parts.anchor_cls + w.anchor_reg * parts.anchor_reg +
              w.roi_cls * parts.roi_cls + w.roi_reg * parts.roi_reg +
              w.roi_corner * parts.roi_corner;
  return out;
}

}  // namespace cuboid
