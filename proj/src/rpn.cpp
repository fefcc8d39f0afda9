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

void RpnParams::resize(int c_in_, int c_mid_, int k_) {
  c_in = c_in_;
  c_mid = c_mid_;
  k = k_;
  conv_w.assign(static_cast<size_t>(c_mid) * c_in * 9, 0.0);
  conv_b.assign(c_mid, 0.0);
  obj_w.assign(static_cast<size_t>(2 * k) * c_mid, 0.0);
  obj_b.assign(2 * k, 0.0);
  delta_w.assign(static_cast<size_t>(4 * k) * c_mid, 0.0);
  delta_b.assign(4 * k, 0.0);
}

void RpnParams::init(Rng& rng) {
  he_init(conv_w, static_cast<size_t>(c_in) * 9, rng);
  small_init(obj_w, rng);
  small_init(delta_w, rng);
}

RpnParams RpnParams::zeros_clone() const {
  RpnParams g;
  g.resize(c_in, c_mid, k);
  return g;
}

RpnOut rpn_forward(const FeatureMap& fm, const RpnParams& p) {
  if (fm.channels != p.c_in) {
    throw ShapeMismatch("rpn_forward: feature channels " +
                        std::to_string(fm.channels) + " vs params " +
                        std::to_string(p.c_in));
  }
  const size_t plane = static_cast<size_t>(fm.height) * fm.width;
  RpnOut out;
  out.height = fm.height;
  out.width = fm.width;
  out.k = p.k;
  out.hidden_pre.resize(static_cast<size_t>(p.c_mid) * plane);
  out.hidden.resize(out.hidden_pre.size());
  conv3x3_forward(fm.values.data(), p.c_in, fm.height, fm.width, p.conv_w.data(),
                  p.conv_b.data(), p.c_mid, out.hidden_pre.data());
  relu_forward(out.hidden_pre.data(), out.hidden_pre.size(), out.hidden.data());
  out.obj.resize(static_cast<size_t>(2 * p.k) * plane);
  out.deltas.resize(static_cast<size_t>(4 * p.k) * plane);
  conv1x1_forward(out.hidden.data(), p.c_mid, fm.height, fm.width, p.obj_w.data(),
                  p.obj_b.data(), 2 * p.k, out.obj.data());
  conv1x1_forward(out.hidden.data(), p.c_mid, fm.height, fm.width,
                  p.delta_w.data(), p.delta_b.data(), 4 * p.k,
                  out.deltas.data());
  return out;
}

void rpn_backward(const FeatureMap& fm, const RpnParams& p, const RpnOut& cache,
                  const std::vector<double>& d_obj,
                  const std::vector<double>& d_deltas, RpnParams& grads) {
  const size_t plane = static_cast<size_t>(fm.height) * fm.width;
  if (d_obj.size() != static_cast<size_t>(2 * p.k) * plane ||
      d_deltas.size() != static_cast<size_t>(4 * p.k) * plane) {
    throw ShapeMismatch("rpn_backward: output gradient shape");
  }
  std::vector<double> d_hidden(cache.hidden.size(), 0.0);
  conv1x1_backward(cache.hidden.data(), p.c_mid, fm.height, fm.width,
                   p.obj_w.data(), 2 * p.k, d_obj.data(), grads.obj_w.data(),
                   grads.obj_b.data(), d_hidden.data());
  conv1x1_backward(cache.hidden.data(), p.c_mid, fm.height, fm.width,
                   p.delta_w.data(), 4 * p.k, d_deltas.data(),
                   grads.delta_w.data(), grads.delta_b.data(), d_hidden.data());
  std::vector<double> d_pre(d_hidden.size());
  relu_backward(cache.hidden_pre.data(), d_hidden.size(), d_hidden.data(),
                d_pre.data());
  conv3x3_backward(fm.values.data(), p.c_in, fm.height, fm.width,
                   p.conv_w.data(), p.c_mid, d_pre.data(), grads.conv_w.data(),
                   grads.conv_b.data(), nullptr);
}

double anchor_score(const RpnOut& out, int anchor_index) {
  const size_t plane = static_cast<size_t>(out.height) * out.width;
  const int cell = anchor_index / out.k;
  const int k = anchor_index % out.k;
  const double l0 = out.obj[(2 * k) * plane + cell];
  const double l1 = out.obj[(2 * k + 1) * plane + cell];
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m);
  const double e1 = std::exp(l1 - m);
  return e1 / (e0 + e1);
}

BoxDeltas anchor_deltas(const RpnOut& out, int anchor_index) {
  const size_t plane = static_cast<size_t>(out.height) * out.width;
  const int cell = anchor_index / out.k;
  const int k = anchor_index % out.k;
  BoxDeltas d;
  d.dx = out.deltas[(4 * k + 0) * plane + cell];
  d.dy = out.deltas[(4 * k + 1) * plane + cell];
  d.dw = out.deltas[(4 * k + 2) * plane + cell];
  d.dh = out.deltas[(4 * k + 3) * plane + cell];
  return d;
}

}  // namespace cuboid
