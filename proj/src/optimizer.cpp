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

#include <string>

#include "cuboid/netcore.hpp"

namespace cuboid {

void sgd_step(std::span<std::vector<double>* const> params,
              std::span<const std::vector<double>* const> grads,
              OptimState& state, double lr, double momentum,
              double weight_decay) {
  if (params.size() != grads.size()) {
    throw ShapeMismatch("sgd_step: parameter/gradient tensor count");
  }
  if (state.velocity.empty()) {
    state.velocity.resize(params.size());
    for (size_t t = 0; t < params.size(); ++t) {
      state.velocity[t].assign(params[t]->size(), 0.0);
    }
  }
  if (state.velocity.size() != params.size()) {
    throw ShapeMismatch("sgd_step: optimizer state tensor count");
  }
  for (size_t t = 0; t < params.size(); ++t) {
    std::vector<double>& p = *params[t];
    const std::vector<double>& g = *grads[t];
    std::vector<double>& v = state.velocity[t];
    if (p.size() != g.size() || p.size() != v.size()) {
      throw ShapeMismatch("sgd_step: tensor " + std::to_string(t) + " shape");
    }
    for (size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] + g[i] + weight_decay * p[i];
      p[i] -= lr * v[i];
    }
  }
  ++state.iteration;
}

std::vector<std::vector<double>*> param_tensors(RpnParams& rpn, HeadParams& head) {
  return {&rpn.conv_w, &rpn.conv_b, &rpn.obj_w,   &rpn.obj_b,
          &rpn.delta_w, &rpn.delta_b, &head.fc1_w, &head.fc1_b,
          &head.fc2_w, &head.fc2_b,  &head.cls_w, &head.cls_b,
          &head.box_w, &head.box_b,  &head.vert_w, &head.vert_b};
}

std::vector<const std::vector<double>*> param_tensors(const RpnParams& rpn,
                                                      const HeadParams& head) {
  return {&rpn.conv_w, &rpn.conv_b, &rpn.obj_w,   &rpn.obj_b,
          &rpn.delta_w, &rpn.delta_b, &head.fc1_w, &head.fc1_b,
          &head.fc2_w, &head.fc2_b,  &head.cls_w, &head.cls_b,
          &head.box_w, &head.box_b,  &head.vert_w, &head.vert_b};
}

std::vector<std::pair<std::string, std::vector<int>>> param_shapes(
    const RpnParams& rpn, const HeadParams& head) {
  const int p = head.input_size();
  return {
      {"rpn.conv_w", {rpn.c_mid, rpn.c_in, 3, 3}},
      {"rpn.conv_b", {rpn.c_mid}},
      {"rpn.obj_w", {2 * rpn.k, rpn.c_mid}},
      {"rpn.obj_b", {2 * rpn.k}},
      {"rpn.delta_w", {4 * rpn.k, rpn.c_mid}},
      {"rpn.delta_b", {4 * rpn.k}},
      {"head.fc1_w", {head.hidden, p}},
      {"head.fc1_b", {head.hidden}},
      {"head.fc2_w", {head.hidden, head.hidden}},
      {"head.fc2_b", {head.hidden}},
      {"head.cls_w", {2, head.hidden}},
      {"head.cls_b", {2}},
      {"head.box_w", {4, head.hidden}},
      {"head.box_b", {4}},
      {"head.vert_w", {16, head.hidden}},
      {"head.vert_b", {16}},
  };
}

}  // namespace cuboid
