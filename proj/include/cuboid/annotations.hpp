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
#include <string>
#include <vector>

#include "cuboid/geometry.hpp"

namespace cuboid {

// One annotated cuboid instance. Self-occluded vertices keep their
// coordinates; the mask only records visibility.
struct GtInstance {
  BoundingBox box;
  Cuboid2D cuboid;
  std::array<bool, kNumCorners> vis{};
};

struct Annotation {
  std::string id;
  std::string image_file;
  std::vector<GtInstance> cuboids;
};

}  // namespace cuboid
