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

#include <vector>

#include "cuboid/geometry.hpp"
#include "cuboid/tensor.hpp"

// OpenMP-parallel compute kernels. Every parallel loop assigns each output
// element to exactly one thread and keeps the per-element reduction order
// fixed, so results are bitwise identical to the serial reference in
// cuboid::ref regardless of thread count. Backward kernels accumulate (+=)
// into their gradient buffers; callers zero them first.

namespace cuboid {

// 3x3 convolution, zero padding, unit stride.
// in/out are CHW; w is [c_out][c_in][3][3]; b is [c_out].
void conv3x3_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out);
void conv3x3_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in);

// 1x1 convolution (per-pixel affine map across channels).
void conv1x1_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out);
void conv1x1_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in);

// Fully connected: y = W x + b with W row-major [n_out][n_in].
void fc_forward(const double* x, int n_in, const double* weights,
                const double* bias, int n_out, double* y);
void fc_backward(const double* x, int n_in, const double* weights, int n_out,
                 const double* d_y, double* d_weights, double* d_bias,
                 double* d_x);

inline void relu_forward(const double* x, size_t n, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}
inline void relu_backward(const double* x, size_t n, const double* d_y,
                          double* d_x) {
  for (size_t i = 0; i < n; ++i) d_x[i] = x[i] > 0.0 ? d_y[i] : 0.0;
}

constexpr int kPooledSize = 7;

struct RoiPoolOut {
  int channels = 0;
  std::vector<double> values;  // [C][7][7]
  std::vector<int> argmax;     // flat index into the source FeatureMap values
};

// Max-pools the RoI into a 7x7xC grid. The RoI is mapped to feature cells
// with floor(coord/stride); bin boundaries use floor/ceil so every bin keeps
// at least one cell. Throws EmptyRoi when the image-clipped RoI has no area.
RoiPoolOut roi_pool(const FeatureMap& fm, const BoundingBox& roi);

// Routes each output gradient to its argmax cell; accumulates so overlapping
// bins and multiple RoIs sum.
void roi_pool_backward(const RoiPoolOut& pooled, const double* d_out,
                       double* d_fm_values);

constexpr int kExtractorChannels = 9;  // 8 oriented edge channels + intensity
constexpr int kDefaultFeatureStride = 4;

// Fixed (non-trainable) feature extractor: 8 oriented 3x3 derivative filters
// (directions k*pi/4), replicate padding, half-wave rectified, plus the raw
// intensity channel; then non-overlapping stride x stride average pooling.
// Throws BadDimensions unless both image dims are divisible by the stride.
FeatureMap extract_features(const Image& image, int stride = kDefaultFeatureStride);

// The oriented filter bank, [8][3][3] flattened, tap order (dy, dx).
const double* extractor_filters();

}  // namespace cuboid
