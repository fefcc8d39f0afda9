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

#include "cuboid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cuboid/errors.hpp"

namespace cuboid {

void conv3x3_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out) {
  const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c_out; ++co) {
    double* out_plane = out + co * plane;
    const double* w_co = weights + static_cast<size_t>(co) * c_in * 9;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias[co];
        for (int ci = 0; ci < c_in; ++ci) {
          const double* in_plane = in + ci * plane;
          const double* wk = w_co + ci * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int yy = y + ky - 1;
            if (yy < 0 || yy >= h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int xx = x + kx - 1;
              if (xx < 0 || xx >= w) continue;
              acc += wk[ky * 3 + kx] * in_plane[yy * w + xx];
            }
          }
        }
        out_plane[y * w + x] = acc;
      }
    }
  }
}

void conv3x3_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in) {
  const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c_out; ++co) {
    const double* d_plane = d_out + co * plane;
    double acc_b = 0.0;
    for (size_t i = 0; i < plane; ++i) acc_b += d_plane[i];
    d_bias[co] += acc_b;
    double* dw_co = d_weights + static_cast<size_t>(co) * c_in * 9;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* in_plane = in + ci * plane;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          double acc = 0.0;
          const int y0 = std::max(0, 1 - ky);
          const int y1 = std::min(h, h + 1 - ky);
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(w, w + 1 - kx);
          for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
              acc += d_plane[y * w + x] * in_plane[(y + ky - 1) * w + (x + kx - 1)];
            }
          }
          dw_co[ci * 9 + ky * 3 + kx] += acc;
        }
      }
    }
  }
  if (d_in == nullptr) return;
  // Gather form: d_in[ci,y,x] sums the outputs this input touched.
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < c_in; ++ci) {
    double* di_plane = d_in + ci * plane;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int co = 0; co < c_out; ++co) {
          const double* d_plane = d_out + co * plane;
          const double* wk = weights + (static_cast<size_t>(co) * c_in + ci) * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int oy = y - (ky - 1);
            if (oy < 0 || oy >= h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ox = x - (kx - 1);
              if (ox < 0 || ox >= w) continue;
              acc += d_plane[oy * w + ox] * wk[ky * 3 + kx];
            }
          }
        }
        di_plane[y * w + x] += acc;
      }
    }
  }
}

void conv1x1_forward(const double* in, int c_in, int h, int w,
                     const double* weights, const double* bias, int c_out,
                     double* out) {
  const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c_out; ++co) {
    double* out_plane = out + co * plane;
    const double* w_co = weights + static_cast<size_t>(co) * c_in;
    for (size_t i = 0; i < plane; ++i) {
      double acc = bias[co];
      for (int ci = 0; ci < c_in; ++ci) acc += w_co[ci] * in[ci * plane + i];
      out_plane[i] = acc;
    }
  }
}

void conv1x1_backward(const double* in, int c_in, int h, int w,
                      const double* weights, int c_out, const double* d_out,
                      double* d_weights, double* d_bias, double* d_in) {
  const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < c_out; ++co) {
    const double* d_plane = d_out + co * plane;
    double acc_b = 0.0;
    for (size_t i = 0; i < plane; ++i) acc_b += d_plane[i];
    d_bias[co] += acc_b;
    double* dw_co = d_weights + static_cast<size_t>(co) * c_in;
    for (int ci = 0; ci < c_in; ++ci) {
      const double* in_plane = in + ci * plane;
      double acc = 0.0;
      for (size_t i = 0; i < plane; ++i) acc += d_plane[i] * in_plane[i];
      dw_co[ci] += acc;
    }
  }
  if (d_in == nullptr) return;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < c_in; ++ci) {
    double* di_plane = d_in + ci * plane;
    for (size_t i = 0; i < plane; ++i) {
      double acc = 0.0;
      for (int co = 0; co < c_out; ++co) {
        acc += d_out[co * plane + i] * weights[static_cast<size_t>(co) * c_in + ci];
      }
      di_plane[i] += acc;
    }
  }
}

void fc_forward(const double* x, int n_in, const double* weights,
                const double* bias, int n_out, double* y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_out; ++i) {
    const double* row = weights + static_cast<size_t>(i) * n_in;
    double acc = bias[i];
    for (int j = 0; j < n_in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void fc_backward(const double* x, int n_in, const double* weights, int n_out,
                 const double* d_y, double* d_weights, double* d_bias,
                 double* d_x) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_out; ++i) {
    d_bias[i] += d_y[i];
    double* dw_row = d_weights + static_cast<size_t>(i) * n_in;
    const double g = d_y[i];
    for (int j = 0; j < n_in; ++j) dw_row[j] += g * x[j];
  }
  if (d_x == nullptr) return;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n_in; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n_out; ++i) {
      acc += weights[static_cast<size_t>(i) * n_in + j] * d_y[i];
    }
    d_x[j] += acc;
  }
}

namespace {

struct BinRange {
  int x0, x1, y0, y1;  // cell ranges, end-exclusive
};

// Shared by forward and the serial reference: RoI -> cell window -> bins.
struct RoiCells {
  int cx0, cy0, nx, ny;
};

RoiCells map_roi_to_cells(const FeatureMap& fm, const BoundingBox& roi) {
  const double iw = fm.image_width();
  const double ih = fm.image_height();
  const double x1 = std::max(roi.x1, 0.0);
  const double y1 = std::max(roi.y1, 0.0);
  const double x2 = std::min(roi.x2, iw);
  const double y2 = std::min(roi.y2, ih);
  if (!(x2 - x1 > 0.0) || !(y2 - y1 > 0.0)) {
    throw EmptyRoi("RoI clipped to zero area");
  }
  RoiCells rc;
  rc.cx0 = std::clamp(static_cast<int>(std::floor(x1 / fm.stride)), 0, fm.width - 1);
  rc.cy0 = std::clamp(static_cast<int>(std::floor(y1 / fm.stride)), 0, fm.height - 1);
  const int cx1 = std::clamp(static_cast<int>(std::floor(x2 / fm.stride)), rc.cx0, fm.width - 1);
  const int cy1 = std::clamp(static_cast<int>(std::floor(y2 / fm.stride)), rc.cy0, fm.height - 1);
  rc.nx = cx1 - rc.cx0 + 1;
  rc.ny = cy1 - rc.cy0 + 1;
  return rc;
}

BinRange bin_range(const RoiCells& rc, int ph, int pw) {
  BinRange r;
  r.y0 = rc.cy0 + static_cast<int>(std::floor(ph * rc.ny / double(kPooledSize)));
  r.y1 = rc.cy0 + static_cast<int>(std::ceil((ph + 1) * rc.ny / double(kPooledSize)));
  r.x0 = rc.cx0 + static_cast<int>(std::floor(pw * rc.nx / double(kPooledSize)));
  r.x1 = rc.cx0 + static_cast<int>(std::ceil((pw + 1) * rc.nx / double(kPooledSize)));
  return r;
}

}  // namespace

RoiPoolOut roi_pool(const FeatureMap& fm, const BoundingBox& roi) {
  const RoiCells rc = map_roi_to_cells(fm, roi);
  RoiPoolOut out;
  out.channels = fm.channels;
  const int n = fm.channels * kPooledSize * kPooledSize;
  out.values.resize(n);
  out.argmax.resize(n);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < fm.channels; ++c) {
    for (int ph = 0; ph < kPooledSize; ++ph) {
      for (int pw = 0; pw < kPooledSize; ++pw) {
        const BinRange r = bin_range(rc, ph, pw);
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int y = r.y0; y < r.y1; ++y) {
          for (int x = r.x0; x < r.x1; ++x) {
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

void roi_pool_backward(const RoiPoolOut& pooled, const double* d_out,
                       double* d_fm_values) {
  // Bins of one channel only index that channel's plane, so parallelizing
  // over channels keeps the scatter race-free and the order fixed.
#pragma omp parallel for schedule(static)
  for (int c = 0; c < pooled.channels; ++c) {
    const int base = c * kPooledSize * kPooledSize;
    for (int i = 0; i < kPooledSize * kPooledSize; ++i) {
      d_fm_values[pooled.argmax[base + i]] += d_out[base + i];
    }
  }
}

const double* extractor_filters() {
  static const std::vector<double> filters = [] {
    std::vector<double> f(8 * 9);
    for (int k = 0; k < 8; ++k) {
      const double th = k * std::numbers::pi / 4.0;
      const double cs = std::cos(th), sn = std::sin(th);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          f[k * 9 + (dy + 1) * 3 + (dx + 1)] = (dx * cs + dy * sn) / 3.0;
        }
      }
    }
    return f;
  }();
  return filters.data();
}

FeatureMap extract_features(const Image& image, int stride) {
  const int h = image.height, w = image.width;
  if (stride <= 0 || h % stride != 0 || w % stride != 0 || h == 0 || w == 0) {
    throw BadDimensions("image " + std::to_string(w) + "x" + std::to_string(h) +
                        " not divisible by stride " + std::to_string(stride));
  }
  const int fh = h / stride, fw = w / stride;
  FeatureMap fm(kExtractorChannels, fh, fw, stride);
  const double* filters = extractor_filters();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kExtractorChannels; ++c) {
    for (int fy = 0; fy < fh; ++fy) {
      for (int fx = 0; fx < fw; ++fx) {
        double acc = 0.0;
        for (int py = fy * stride; py < (fy + 1) * stride; ++py) {
          for (int px = fx * stride; px < (fx + 1) * stride; ++px) {
            if (c == 8) {
              acc += image.at(py, px);
              continue;
            }
            double resp = 0.0;
            const double* fk = filters + c * 9;
            for (int dy = -1; dy <= 1; ++dy) {
              const int yy = std::clamp(py + dy, 0, h - 1);
              for (int dx = -1; dx <= 1; ++dx) {
                const int xx = std::clamp(px + dx, 0, w - 1);
                resp += fk[(dy + 1) * 3 + (dx + 1)] * image.at(yy, xx);
              }
            }
            acc += resp > 0.0 ? resp : 0.0;
          }
        }
        fm.at(c, fy, fx) = acc / (stride * stride);
      }
    }
  }
  return fm;
}

}  // namespace cuboid
