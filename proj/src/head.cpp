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

#include <cmath>
#include <string>

#include "cuboid/netcore.hpp"

namespace cuboid {

namespace {

void he_init(std::vector<double>& w, size_t fan_in, Rng& rng) {
  const double s = std::sqrt(2.0 / double(fan_in));
  for (double& v : w) v = rng.normal(0.0, s);
}

void small_init(std::vector<double>& w, Rng& rng) {
  for (double& v : w) v = rng.normal(0.0, 0.01);
}

}  // namespace

void HeadParams::resize(int c_in_, int hidden_) {
  c_in = c_in_;
  hidden = hidden_;
  const size_t p = static_cast<size_t>(input_size());
  fc1_w.assign(static_cast<size_t>(hidden) * p, 0.0);
  fc1_b.assign(hidden, 0.0);
  fc2_w.assign(static_cast<size_t>(hidden) * hidden, 0.0);
  fc2_b.assign(hidden, 0.0);
  cls_w.assign(static_cast<size_t>(2) * hidden, 0.0);
  cls_b.assign(2, 0.0);
  box_w.assign(static_cast<size_t>(4) * hidden, 0.0);
  box_b.assign(4, 0.0);
  vert_w.assign(static_cast<size_t>(16) * hidden, 0.0);
  vert_b.assign(16, 0.0);
}

void HeadParams::init(Rng& rng) {
  he_init(fc1_w, input_size(), rng);
  he_init(fc2_w, hidden, rng);
  small_init(cls_w, rng);
  small_init(box_w, rng);
  small_init(vert_w, rng);
}

HeadParams HeadParams::zeros_clone() const {
  HeadParams g;
  g.resize(c_in, hidden);
  return g;
}

double HeadOut::score() const {
  const double m = std::max(cls_logits[0], cls_logits[1]);
  const double e0 = std::exp(cls_logits[0] - m);
  const double e1 = std::exp(cls_logits[1] - m);
  return e1 / (e0 + e1);
}

HeadOut head_forward(std::span<const double> pooled, const HeadParams& p,
                     bool train_mode, double dropout_p, Rng* rng) {
  const size_t n_in = static_cast<size_t>(p.input_size());
  if (pooled.size() != n_in) {
    throw ShapeMismatch("head_forward: pooled size " +
                        std::to_string(pooled.size()) + " vs " +
                        std::to_string(n_in));
  }
  HeadOut out;
  out.train_mode = train_mode;
  out.keep_prob = train_mode ? 1.0 - dropout_p : 1.0;
  out.input.assign(pooled.begin(), pooled.end());

  const int d = p.hidden;
  out.z1.resize(d);
  out.h1.resize(d);
  fc_forward(out.input.data(), static_cast<int>(n_in), p.fc1_w.data(),
             p.fc1_b.data(), d, out.z1.data());
  relu_forward(out.z1.data(), d, out.h1.data());
  if (train_mode) {
    out.keep1.resize(d);
    for (int i = 0; i < d; ++i) out.keep1[i] = rng->coin(out.keep_prob) ? 1 : 0;
    for (int i = 0; i < d; ++i) {
      out.h1[i] = out.keep1[i] ? out.h1[i] / out.keep_prob : 0.0;
    }
  }

  out.z2.resize(d);
  out.h2.resize(d);
  fc_forward(out.h1.data(), d, p.fc2_w.data(), p.fc2_b.data(), d, out.z2.data());
  relu_forward(out.z2.data(), d, out.h2.data());
  if (train_mode) {
    out.keep2.resize(d);
    for (int i = 0; i < d; ++i) out.keep2[i] = rng->coin(out.keep_prob) ? 1 : 0;
    for (int i = 0; i < d; ++i) {
      out.h2[i] = out.keep2[i] ? out.h2[i] / out.keep_prob : 0.0;
    }
  }

  double cls[2], box[4], verts[16];
  fc_forward(out.h2.data(), d, p.cls_w.data(), p.cls_b.data(), 2, cls);
  fc_forward(out.h2.data(), d, p.box_w.data(), p.box_b.data(), 4, box);
  fc_forward(out.h2.data(), d, p.vert_w.data(), p.vert_b.data(), 16, verts);
  out.cls_logits = {cls[0], cls[1]};
  out.box = BoxDeltas{box[0], box[1], box[2], box[3]};
  for (int i = 0; i < 16; ++i) out.verts[i] = verts[i];
  return out;
}

void head_backward(const HeadParams& p, const HeadOut& cache,
                   const std::array<double, 2>& d_cls,
                   const std::array<double, 4>& d_box,
                   const std::array<double, 16>& d_verts, HeadParams& grads,
                   double* d_input) {
  const int d = p.hidden;
  std::vector<double> d_h2(d, 0.0);
  fc_backward(cache.h2.data(), d, p.cls_w.data(), 2, d_cls.data(),
              grads.cls_w.data(), grads.cls_b.data(), d_h2.data());
  fc_backward(cache.h2.data(), d, p.box_w.data(), 4, d_box.data(),
              grads.box_w.data(), grads.box_b.data(), d_h2.data());
  fc_backward(cache.h2.data(), d, p.vert_w.data(), 16, d_verts.data(),
              grads.vert_w.data(), grads.vert_b.data(), d_h2.data());

  if (cache.train_mode) {
    for (int i = 0; i < d; ++i) {
      d_h2[i] = cache.keep2[i] ? d_h2[i] / cache.keep_prob : 0.0;
    }
  }
  std::vector<double> d_z2(d);
  relu_backward(cache.z2.data(), d, d_h2.data(), d_z2.data());

  std::vector<double> d_h1(d, 0.0);
  fc_backward(cache.h1.data(), d, p.fc2_w.data(), d, d_z2.data(),
              grads.fc2_w.data(), grads.fc2_b.data(), d_h1.data());
  if (cache.train_mode) {
    for (int i = 0; i < d; ++i) {
      d_h1[i] = cache.keep1[i] ? d_h1[i] / cache.keep_prob : 0.0;
    }
  }
  std::vector<double> d_z1(d);
  relu_backward(cache.z1.data(), d, d_h1.data(), d_z1.data());

  fc_backward(cache.input.data(), p.input_size(), p.fc1_w.data(), d,
              d_z1.data(), grads.fc1_w.data(), grads.fc1_b.data(), d_input);
}

}  // namespace cuboid
