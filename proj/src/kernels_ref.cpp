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

#include "cuboid/kernels_ref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cuboid/errors.hpp"

namespace cuboid::ref {

namespace {

inline double pad_zero(const double* plane, int h, int w, int y, int x) {
  if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
  return plane[y * w + x];
}

}  // namespace

void conv3x3_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out) {
  const size_t plane = static_cast<size_t>(h) * w;
  for (int co = 0; co < c_out; ++co) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias[co];
        for (int ci = 0; ci < c_in; ++ci) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const double v = pad_zero(in + ci * plane, h, w, y + ky - 1, x + kx - 1);
              acc += weights[((static_cast<size_t>(co) * c_in + ci) * 3 + ky) * 3 + kx] * v;
            }
          }
        }
        out[co * plane + y * w + x] = acc;
      }
    }
  }
}

void conv3x3_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in) {
  const size_t plane = static_cast<size_t>(h) * w;
  for (int co = 0; co < c_out; ++co) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = d_out[co * plane + y * w + x];
        d_bias[co] += g;
        for (int ci = 0; ci < c_in; ++ci) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              const size_t wi = ((static_cast<size_t>(co) * c_in + ci) * 3 + ky) * 3 + kx;
              d_weights[wi] += g * in[ci * plane + yy * w + xx];
              if (d_in != nullptr) {
                d_in[ci * plane + yy * w + xx] += g * weights[wi];
              }
            }
          }
        }
      }
    }
  }
}

void conv1x1_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out) {
  const size_t plane = static_cast<size_t>(h) * w;
  for (int co = 0; co < c_out; ++co) {
    for (size_t i = 0; i < plane; ++i) {
      double acc = bias[co];
      for (int ci = 0; ci < c_in; ++ci) {
        acc += weights[static_cast<size_t>(co) * c_in + ci] * in[ci * plane + i];
      }
      out[co * plane + i] = acc;
    }
  }
}

void fc_forward(const double* x, int n_in, const double* weights,
                const double* bias, int n_out, double* y) {
  for (int i = 0; i < n_out; ++i) {
    double acc = bias[i];
    for (int j = 0; j < n_in; ++j) acc += weights[static_cast<size_t>(i) * n_in + j] * x[j];
    y[i] = acc;
  }
}

void fc_backward(const double* x, int n_in, const double* weights, int n_out,
                 const double* d_y, double* d_weights, double* d_bias,
                 double* d_x) {
  for (int i = 0; i < n_out; ++i) {
    d_bias[i] += d_y[i];
    for (int j = 0; j < n_in; ++j) {
      d_weights[static_cast<size_t>(i) * n_in + j] += d_y[i] * x[j];
    }
  }
  if (d_x == nullptr) return;
  for (int j = 0; j < n_in; ++j) {
    for (int i = 0; i < n_out; ++i) {
      d_x[j] += weights[static_cast<size_t>(i) * n_in + j] * d_y[i];
    }
  }
}

RoiPoolOut roi_pool(const FeatureMap& fm, const BoundingBox& roi) {
  const double x1 = std::max(roi.x1, 0.0);
  const double y1 = std::max(roi.y1, 0.0);
  const double x2 = std::min(roi.x2, fm.image_width());
  const double y2 = std::min(roi.y2, fm.image_height());
  if (!(x2 - x1 > 0.0) || !(y2 - y1 > 0.0)) {
    throw EmptyRoi("RoI clipped to zero area");
  }
  const int cx0 = std::clamp(static_cast<int>(std::floor(x1 / fm.stride)), 0, fm.width - 1);
  const int cy0 = std::clamp(static_cast<int>(std::floor(y1 / fm.stride)), 0, fm.height - 1);
  const int cx1 = std::clamp(static_cast<int>(std::floor(x2 / fm.stride)), cx0, fm.width - 1);
  const int cy1 = std::clamp(static_cast<int>(std::floor(y2 / fm.stride)), cy0, fm.height - 1);
  const int nx = cx1 - cx0 + 1;
  const int ny = cy1 - cy0 + 1;

  RoiPoolOut out;
  out.channels = fm.channels;
  out.values.resize(static_cast<size_t>(fm.channels) * kPooledSize * kPooledSize);
  out.argmax.resize(out.values.size());
  for (int c = 0; c < fm.channels; ++c) {
    for (int ph = 0; ph < kPooledSize; ++ph) {
      for (int pw = 0; pw < kPooledSize; ++pw) {
        const int by0 = cy0 + static_cast<int>(std::floor(ph * ny / double(kPooledSize)));
        const int by1 = cy0 + static_cast<int>(std::ceil((ph + 1) * ny / double(kPooledSize)));
        const int bx0 = cx0 + static_cast<int>(std::floor(pw * nx / double(kPooledSize)));
        const int bx1 = cx0 + static_cast<int>(std::ceil((pw + 1) * nx / double(kPooledSize)));
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int y = by0; y < by1; ++y) {
          for (int x = bx0; x < bx1; ++x) {
            const size_t idx = fm.idx(c, y, x);
            if (fm.values[idx] > best) {
              best = fm.values[idx];
              best_idx = static_cast<int>(idx);
            }
          }
        }
        const int o = (c * kPooledSize + ph) * kPooledSize + pw;
        out.values[o] = best;
        out.argmax[o] = best_idx;
      }
    }
  }
  return out;
}

FeatureMap extract_features(const Image& image, int stride) {
  const int h = image.height, w = image.width;
  if (stride <= 0 || h == 0 || w == 0 || h % stride != 0 || w % stride != 0) {
    throw BadDimensions("image dims not divisible by stride");
  }
  const int fh = h / stride, fw = w / stride;
  FeatureMap fm(kExtractorChannels, fh, fw, stride);
  const double* filters = extractor_filters();
  for (int c = 0; c < kExtractorChannels; ++c) {
    for (int fy = 0; fy < fh; ++fy) {
      for (int fx = 0; fx < fw; ++fx) {
        double acc = 0.0;
        for (int py = fy * stride; py < (fy + 1) * stride; ++py) {
          for (int px = fx * stride; px < (fx + 1) * stride; ++px) {
            if (c == 8) {
              acc += image.at(py, px);
            } else {
              double resp = 0.0;
              for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                  const int yy = std::clamp(py + dy, 0, h - 1);
                  const int xx = std::clamp(px + dx, 0, w - 1);
                  resp += filters[c * 9 + (dy + 1) * 3 + (dx + 1)] * image.at(yy, xx);
                }
              }
              if (resp > 0.0) acc += resp;
            }
          }
        }
        fm.at(c, fy, fx) = acc / (stride * stride);
      }
    }
  }
  return fm;
}

}  // namespace cuboid::ref
