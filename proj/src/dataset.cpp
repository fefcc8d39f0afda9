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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cuboid/data.hpp"
#include "cuboid/png_io.hpp"

namespace fs = std::filesystem;

namespace cuboid {

namespace {

nlohmann::json annotation_to_json(const Annotation& ann) {
  nlohmann::json cuboids = nlohmann::json::array();
  for (const GtInstance& g : ann.cuboids) {
    nlohmann::json verts = nlohmann::json::array();
    nlohmann::json vis = nlohmann::json::array();
    for (int i = 0; i < kNumCorners; ++i) {
      verts.push_back({g.cuboid.vertices[i].x, g.cuboid.vertices[i].y});
      vis.push_back(g.vis[i]);
    }
    cuboids.push_back({{"box", {g.box.x1, g.box.y1, g.box.x2, g.box.y2}},
                       {"verts", verts},
                       {"vis", vis}});
  }
  return {{"id", ann.id}, {"image", ann.image_file}, {"cuboids", cuboids}};
}

Annotation annotation_from_json(const nlohmann::json& j) {
  Annotation ann;
  ann.id = j.at("id").get<std::string>();
  ann.image_file = j.at("image").get<std::string>();
  for (const auto& c : j.at("cuboids")) {
    GtInstance g;
    const auto& box = c.at("box");
    g.box = BoundingBox{box.at(0), box.at(1), box.at(2), box.at(3)};
    const auto& verts = c.at("verts");
    if (verts.size() != kNumCorners) {
      throw ParseError("expected 8 vertices");
    }
    for (int i = 0; i < kNumCorners; ++i) {
      g.cuboid.vertices[i] = Vec2{verts.at(i).at(0), verts.at(i).at(1)};
    }
    const auto& vis = c.at("vis");
    for (int i = 0; i < kNumCorners; ++i) g.vis[i] = vis.at(i).get<bool>();
    ann.cuboids.push_back(g);
  }
  return ann;
}

}  // namespace

void save_dataset(const std::string& dir, const std::vector<SceneSample>& items) {
  fs::create_directories(fs::path(dir) / "images");
  std::ofstream os(fs::path(dir) / "annotations.jsonl");
  if (!os) throw Error("cannot write annotations in " + dir);
  for (const SceneSample& s : items) {
    write_png_gray8((fs::path(dir) / "images" / s.ann.image_file).string(),
                    s.image);
    os << annotation_to_json(s.ann).dump() << '\n';
  }
}

std::vector<SceneSample> load_dataset(const std::string& dir) {
  const fs::path ann_path = fs::path(dir) / "annotations.jsonl";
  std::ifstream is(ann_path);
  if (!is) throw MissingImageFile("no annotations.jsonl in " + dir);
  std::vector<SceneSample> items;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      items.emplace_back();
      items.back().ann = annotation_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("annotations.jsonl line " + std::to_string(line_no) +
                       ": " + e.what());
    }
    const fs::path img = fs::path(dir) / "images" / items.back().ann.image_file;
    items.back().image = read_png_gray8(img.string());
  }
  return items;
}

std::pair<std::vector<SceneSample>, std::vector<SceneSample>> split(
    std::vector<SceneSample> items, double train_fraction, uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(items);
  const size_t n_train = static_cast<size_t>(
      std::lround(train_fraction * static_cast<double>(items.size())));
  std::vector<SceneSample> train(items.begin(),
                                 items.begin() + std::min(n_train, items.size()));
  std::vector<SceneSample> test(items.begin() + std::min(n_train, items.size()),
                                items.end());
  return {std::move(train), std::move(test)};
}

}  // namespace cuboid
