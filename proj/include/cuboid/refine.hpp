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

#include "cuboid/netcore.hpp"

namespace cuboid {

struct RefineStep {
  BoundingBox box;
  Cuboid2D cuboid;
  double score = 0.0;
};

struct RefineResult {
  std::vector<RefineStep> steps;  // one per iteration unless degenerate
  bool degenerate = false;        // decoded box collapsed below 1 px^2
};

// Iterative feature pooling: pool at the previous box, run the head, decode
// the regressed box (clipped to the image before the next pooling) and the
// cuboid at that regressed frame. iters=1 is exactly one head pass. The
// pooled coordinates are treated as constants; nothing differentiates
// through them.
RefineResult refine_detection(const FeatureMap& fm, const HeadParams& head,
                              const BoundingBox& box0, int iters);

}  // namespace cuboid
