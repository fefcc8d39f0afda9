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

#include <cstddef>
#include <vector>

namespace cuboid {

// Grayscale image, row-major, values nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// CHW grid of features plus the pixel stride of one cell.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  double stride = 1.0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, double s)
      : height(h), width(w), channels(c), stride(s),
        values(static_cast<size_t>(c) * h * w, 0.0) {}

  size_t idx(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height + y) * width + x;
  }
  double& at(int c, int y, int x) { return values[idx(c, y, x)]; }
  double at(int c, int y, int x) const { return values[idx(c, y, x)]; }

  double image_width() const { return width * stride; }
  double image_height() const { return height * stride; }
};

}  // namespace cuboid
