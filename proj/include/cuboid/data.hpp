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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cuboid/annotations.hpp"
#include "cuboid/geometry.hpp"
#include "cuboid/rng.hpp"
#include "cuboid/tensor.hpp"

namespace cuboid {

// Synthetic scene generator configuration. Poses are sampled until the whole
// cuboid sits inside the view frustum with the given pixel margin.
struct SceneConfig {
  int width = 64;
  int height = 64;
  double focal = 70.0;  // principal point at the image center
  int min_cuboids = 1;
  int max_cuboids = 2;
  double depth_min = 3.2;
  double depth_max = 6.5;
  double dim_min = 1.7;
  double dim_max = 2.3;
  // free spin about the vertical, mostly-upright tilts (indoor-scene-like)
  double yaw_min = -3.14159265358979323846;
  double yaw_max = 3.14159265358979323846;
  double pitch_min = -0.25;
  double pitch_max = 0.25;
  double roll_min = -0.25;
  double roll_max = 0.25;
  int clutter_min = 1;   // distractor segments per image
  int clutter_max = 4;
  double noise_sigma = 0.015;
  // photometric ranges
  double bg_min = 0.82, bg_max = 0.9;
  double shade_min = 0.38, shade_max = 0.52;
  double edge_min = 0.05, edge_max = 0.12;
  double clutter_gray_min = 0.15, clutter_gray_max = 0.55;
  double margin = 2.0;
  double max_overlap_iou = 0.3;  // between cuboid boxes in one scene
  int max_pose_tries = 100;
  uint64_t seed = 0;
};

struct SceneSample {
  Image image;
  Annotation ann;
  // The sampled poses behind ann.cuboids, in order. In-memory only; the
  // dataset files persist just the image and annotation.
  std::vector<Cuboid3D> shapes;
};

// Annotation coordinates are snapped to a 2^-32 pixel grid so that the
// horizontal-flip map (x -> width - x) is exact and an exact involution.
double snap_coord(double v);

// Deterministic in (cfg.seed, index). Draws 1..max_cuboids shaded wireframe
// cuboids, distractor segments and Gaussian pixel noise. Throws
// RetryExhausted when no in-frustum pose is found for the first cuboid.
SceneSample render_scene(const SceneConfig& cfg, int index);

// Mirror about the vertical axis; keypoints relabeled by the left-right
// permutation (FTL<->FTR, BTL<->BTR, FBL<->FBR, BBL<->BBR).
void hflip(Image& image, std::vector<GtInstance>& gts);
void hflip(Image& image, Annotation& ann);

// Dataset directory layout: <dir>/annotations.jsonl + <dir>/images/<id>.png.
void save_dataset(const std::string& dir, const std::vector<SceneSample>& items);
std::vector<SceneSample> load_dataset(const std::string& dir);

// Seeded shuffle, then partition at round(train_fraction * n).
std::pair<std::vector<SceneSample>, std::vector<SceneSample>> split(
    std::vector<SceneSample> items, double train_fraction, uint64_t seed);

}  // namespace cuboid
