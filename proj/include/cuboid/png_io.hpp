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

#include <string>

#include "cuboid/tensor.hpp"

namespace cuboid {

// 8-bit grayscale PNG. Values are clamped to [0, 1] and quantized with
// round(v * 255); reading maps byte b to b / 255.
void write_png_gray8(const std::string& path, const Image& image);
Image read_png_gray8(const std::string& path);  // MissingImageFile / ParseError

}  // namespace cuboid
