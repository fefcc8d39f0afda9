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

#include "cuboid/kernels.hpp"

// Serial reference kernels, written as plain nested loops with no OpenMP and
// no code shared with cuboid/kernels.cpp. Tests check the parallel kernels
// against these, and the benchmark compares their throughput.

namespace cuboid::ref {

void conv3x3_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out);
void conv3x3_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in);

void conv1x1_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out);

void fc_forward(const double* x, int n_in, const double* weights,
                const double* bias, int n_out, double* y);
void fc_backward(const double* x, int n_in, const double* weights, int n_out,
                 const double* d_y, double* d_weights, double* d_bias,
                 double* d_x);

RoiPoolOut roi_pool(const FeatureMap& fm, const BoundingBox& roi);

FeatureMap extract_features(const Image& image, int stride = kDefaultFeatureStride);

}  // namespace cuboid::ref
