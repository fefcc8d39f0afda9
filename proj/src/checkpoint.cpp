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

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <zlib.h>

#include <json.hpp>

#include "cuboid/netcore.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian float32");

namespace cuboid {

namespace {

constexpr int kSchemaVersion = 1;
constexpr const char* kKind = "cuboid-detector";

uint32_t payload_crc(const std::vector<float>& payload) {
  return static_cast<uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size() * sizeof(float))));
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
  const auto tensors = param_tensors(model.rpn, model.head);
  const auto shapes = param_shapes(model.rpn, model.head);

  std::vector<float> payload;
  for (const auto* t : tensors) {
    for (double v : *t) payload.push_back(static_cast<float>(v));
  }

  nlohmann::json header;
  header["schema"] = kSchemaVersion;
  header["kind"] = kKind;
  header["seed"] = model.seed;
  header["config"] = {{"stride", model.config.stride},
                      {"c_in", model.config.c_in},
                      {"c_mid", model.config.c_mid},
                      {"hidden", model.config.hidden},
                      {"anchor_scales", model.config.anchor_scales},
                      {"anchor_ratios", model.config.anchor_ratios}};
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [name, shape] : shapes) {
    table.push_back({{"name", name}, {"shape", shape}});
  }
  header["tensors"] = table;
  header["payload_floats"] = payload.size();
  header["crc32"] = payload_crc(payload);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open checkpoint for writing: " + path);
  os << header.dump() << '\n';
  os.write(reinterpret_cast<const char*>(payload.data()),
           static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!os) throw Error("short write to checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingImageFile("checkpoint not found: " + path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty checkpoint: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint header: " + std::string(e.what()));
  }
  if (!header.contains("schema") || header["schema"] != kSchemaVersion ||
      header.value("kind", "") != kKind) {
    throw ParseError("checkpoint schema/kind mismatch");
  }

  Model model;
  model.seed = header.value("seed", uint64_t{0});
  const auto& cfg = header.at("config");
  model.config.stride = cfg.at("stride").get<int>();
  model.config.c_in = cfg.at("c_in").get<int>();
  model.config.c_mid = cfg.at("c_mid").get<int>();
  model.config.hidden = cfg.at("hidden").get<int>();
  model.config.anchor_scales = cfg.at("anchor_scales").get<std::vector<double>>();
  model.config.anchor_ratios = cfg.at("anchor_ratios").get<std::vector<double>>();

  model.rpn.resize(model.config.c_in, model.config.c_mid, model.config.k());
  model.head.resize(model.config.c_in, model.config.hidden);

  const auto tensors = param_tensors(model.rpn, model.head);
  const auto shapes = param_shapes(model.rpn, model.head);
  const auto& table = header.at("tensors");
  if (table.size() != shapes.size()) {
    throw ShapeMismatch("checkpoint tensor table has " +
                        std::to_string(table.size()) + " entries, expected " +
                        std::to_string(shapes.size()));
  }
  size_t total = 0;
  for (size_t t = 0; t < shapes.size(); ++t) {
    if (table[t].at("name") != shapes[t].first ||
        table[t].at("shape").get<std::vector<int>>() != shapes[t].second) {
      throw ShapeMismatch("checkpoint tensor " + shapes[t].first);
    }
    size_t n = 1;
    for (int d : shapes[t].second) n *= static_cast<size_t>(d);
    if (n != tensors[t]->size()) {
      throw ShapeMismatch("checkpoint tensor " + shapes[t].first + " size");
    }
    total += n;
  }
  if (header.value("payload_floats", size_t{0}) != total) {
    throw ShapeMismatch("checkpoint payload size");
  }

  std::vector<float> payload(total);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(total * sizeof(float)));
  if (static_cast<size_t>(is.gcount()) != total * sizeof(float)) {
    throw ChecksumError("checkpoint payload truncated");
  }
  if (payload_crc(payload) != header.value("crc32", uint32_t{0})) {
    throw ChecksumError("checkpoint payload crc32 mismatch");
  }

  size_t off = 0;
  for (auto* t : tensors) {
    for (double& v : *t) v = static_cast<double>(payload[off++]);
  }
  return model;
}

}  // namespace cuboid
