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

#include <array>

#include "cuboid/geometry.hpp"

namespace cuboid {

// (t_x, t_y) per vertex in canonical order: offsets from the RoI center
// normalized by the RoI width/height. A vertex inside the RoI maps into
// [-0.5, 0.5] per component.
using VertexOffsets = std::array<double, 2 * kNumCorners>;

// Center shifts normalized by the reference box size plus log size ratios.
struct BoxDeltas {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
};

VertexOffsets encode_vertices(const Cuboid2D& c, const BoundingBox& roi);
Cuboid2D decode_vertices(const VertexOffsets& t, const BoundingBox& roi);

BoxDeltas encode_box(const BoundingBox& gt, const BoundingBox& ref);
BoundingBox decode_box(const BoxDeltas& d, const BoundingBox& ref);

}  // namespace cuboid
