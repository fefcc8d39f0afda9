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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuboid/data.hpp"
#include "cuboid/eval.hpp"
#include "cuboid/netcore.hpp"
#include "cuboid/png_io.hpp"
#include "cuboid/refine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cuboid;

namespace {

// ---------------------------------------------------------------------------
// JSON config loading. Unknown keys are rejected so typos fail loudly.
// ---------------------------------------------------------------------------

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw Error("config file not found: " + path);
  try {
    json j;
    is >> j;
    return j;
  } catch (const json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
}

template <typename T>
void take(json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
    j.erase(key);
  }
}

void reject_unknown(const json& j, const std::string& what) {
  if (!j.empty()) {
    throw ParseError("unknown " + what + " config key: " + j.begin().key());
  }
}

SceneConfig parse_scene_config(json j) {
  SceneConfig c;
  take(j, "width", c.width);
  take(j, "height", c.height);
  take(j, "focal", c.focal);
  take(j, "min_cuboids", c.min_cuboids);
  take(j, "max_cuboids", c.max_cuboids);
  take(j, "depth_min", c.depth_min);
  take(j, "depth_max", c.depth_max);
  take(j, "dim_min", c.dim_min);
  take(j, "dim_max", c.dim_max);
  take(j, "yaw_min", c.yaw_min);
  take(j, "yaw_max", c.yaw_max);
  take(j, "pitch_min", c.pitch_min);
  take(j, "pitch_max", c.pitch_max);
  take(j, "roll_min", c.roll_min);
  take(j, "roll_max", c.roll_max);
  take(j, "clutter_min", c.clutter_min);
  take(j, "clutter_max", c.clutter_max);
  take(j, "noise_sigma", c.noise_sigma);
  take(j, "margin", c.margin);
  take(j, "max_overlap_iou", c.max_overlap_iou);
  take(j, "max_pose_tries", c.max_pose_tries);
  take(j, "seed", c.seed);
  reject_unknown(j, "scene");
  return c;
}

TrainConfig parse_train_config(json j) {
  TrainConfig c;
  if (j.contains("model")) {
    json m = j.at("model");
    j.erase("model");
    take(m, "stride", c.model.stride);
    take(m, "c_mid", c.model.c_mid);
    take(m, "hidden", c.model.hidden);
    take(m, "anchor_scales", c.model.anchor_scales);
    take(m, "anchor_ratios", c.model.anchor_ratios);
    reject_unknown(m, "model");
  }
  if (j.contains("weights")) {
    json w = j.at("weights");
    j.erase("weights");
    take(w, "anchor_cls", c.weights.anchor_cls);
    take(w, "anchor_reg", c.weights.anchor_reg);
    take(w, "roi_cls", c.weights.roi_cls);
    take(w, "roi_reg", c.weights.roi_reg);
    take(w, "roi_corner", c.weights.roi_corner);
    reject_unknown(w, "weights");
  }
  take(j, "iterations", c.iterations);
  take(j, "lr", c.lr);
  take(j, "lr_drop_fraction", c.lr_drop_fraction);
  take(j, "lr_drop_factor", c.lr_drop_factor);
  take(j, "momentum", c.momentum);
  take(j, "weight_decay", c.weight_decay);
  take(j, "dropout", c.dropout);
  take(j, "anchor_batch", c.anchor_batch);
  take(j, "anchor_pos_fraction", c.anchor_pos_fraction);
  take(j, "anchor_pos_iou", c.anchor_pos_iou);
  take(j, "anchor_neg_iou", c.anchor_neg_iou);
  take(j, "roi_batch", c.roi_batch);
  take(j, "roi_pos_fraction", c.roi_pos_fraction);
  take(j, "roi_pos_iou", c.roi_pos_iou);
  take(j, "pre_nms_n", c.pre_nms_n);
  take(j, "post_nms_n", c.post_nms_n);
  take(j, "proposal_nms_iou", c.proposal_nms_iou);
  take(j, "gt_jitter_count", c.gt_jitter_count);
  take(j, "gt_jitter_frac", c.gt_jitter_frac);
  take(j, "second_pass", c.second_pass);
  take(j, "augment_hflip", c.augment_hflip);
  take(j, "seed", c.seed);
  take(j, "log_every", c.log_every);
  reject_unknown(j, "train");
  return c;
}

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("CUBOID_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  return std::strtoull(s, nullptr, 10);
}

// ---------------------------------------------------------------------------
// Detections JSONL
// ---------------------------------------------------------------------------

json detection_to_json(const Detection& d) {
  json verts = json::array();
  for (const Vec2& v : d.cuboid.vertices) verts.push_back({v.x, v.y});
  return {{"score", d.score},
          {"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}},
          {"verts", verts}};
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.score = j.at("score").get<double>();
  const auto& b = j.at("box");
  d.box = BoundingBox{b.at(0), b.at(1), b.at(2), b.at(3)};
  const auto& verts = j.at("verts");
  if (verts.size() != kNumCorners) throw ParseError("expected 8 vertices");
  for (int i = 0; i < kNumCorners; ++i) {
    d.cuboid.vertices[i] = Vec2{verts.at(i).at(0), verts.at(i).at(1)};
  }
  return d;
}

struct DetectionRecord {
  std::string image_id;
  std::vector<Detection> dets;
  std::vector<Cuboid2D> gt_preds;  // head run on GT boxes, may be empty
};

void write_detections(std::ostream& os, const DetectionRecord& rec) {
  json dets = json::array();
  for (const Detection& d : rec.dets) dets.push_back(detection_to_json(d));
  json line = {{"image", rec.image_id}, {"detections", dets}};
  if (!rec.gt_preds.empty()) {
    json preds = json::array();
    for (const Cuboid2D& c : rec.gt_preds) {
      json verts = json::array();
      for (const Vec2& v : c.vertices) verts.push_back({v.x, v.y});
      preds.push_back(verts);
    }
    line["gt_preds"] = preds;
  }
  os << line.dump() << '\n';
}

std::vector<DetectionRecord> read_detections(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("detections file not found: " + path);
  std::vector<DetectionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      DetectionRecord rec;
      rec.image_id = j.at("image").get<std::string>();
      for (const auto& d : j.at("detections")) {
        rec.dets.push_back(detection_from_json(d));
      }
      if (j.contains("gt_preds")) {
        for (const auto& p : j.at("gt_preds")) {
          Cuboid2D c;
          if (p.size() != kNumCorners) throw ParseError("expected 8 vertices");
          for (int i = 0; i < kNumCorners; ++i) {
            c.vertices[i] = Vec2{p.at(i).at(0), p.at(i).at(1)};
          }
          rec.gt_preds.push_back(c);
        }
      }
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            int count, std::optional<uint64_t> seed_flag) {
  SceneConfig cfg = parse_scene_config(load_config_file(config_path));
  if (auto s = env_seed()) cfg.seed = *s;
  if (seed_flag) cfg.seed = *seed_flag;

  std::vector<SceneSample> items(count);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    items[i] = render_scene(cfg, i);
  }
  save_dataset(out_dir, items);
  std::cout << "wrote " << count << " scenes to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& dataset_dir, const std::string& config_path,
              const std::string& out_path, std::optional<uint64_t> seed_flag,
              std::optional<int> iters_flag, std::optional<double> lr_flag,
              bool no_corner_loss, bool no_bbox_loss, bool no_hflip,
              std::optional<int> refine_passes) {
  TrainConfig cfg = parse_train_config(load_config_file(config_path));
  if (auto s = env_seed()) cfg.seed = *s;
  if (seed_flag) cfg.seed = *seed_flag;
  if (iters_flag) cfg.iterations = *iters_flag;
  if (lr_flag) cfg.lr = *lr_flag;
  if (no_corner_loss) cfg.weights.roi_corner = 0.0;
  if (no_bbox_loss) cfg.weights.roi_reg = 0.0;
  if (no_hflip) cfg.augment_hflip = false;
  if (refine_passes) cfg.second_pass = *refine_passes > 1;

  const std::vector<SceneSample> data = load_dataset(dataset_dir);
  std::vector<TrainItem> items;
  items.reserve(data.size());
  for (const SceneSample& s : data) {
    items.push_back(TrainItem{s.image, s.ann.cuboids});
  }
  const TrainResult result = train(items, cfg, &std::cout);
  save_checkpoint(out_path, result.model);
  std::cout << "checkpoint written to " << out_path << "\n";
  return 0;
}

int cmd_detect(const std::string& checkpoint_path, const std::string& dataset_dir,
               const std::vector<std::string>& image_paths,
               const std::string& out_path, int iters, double score_thresh,
               double nms_iou) {
  const Model model = load_checkpoint(checkpoint_path);
  DetectOptions opts;
  opts.refine_iters = iters;
  opts.score_thresh = score_thresh;
  opts.nms_iou = nms_iou;

  std::ofstream os(out_path);
  if (!os) throw Error("cannot write " + out_path);

  if (!dataset_dir.empty()) {
    const std::vector<SceneSample> data = load_dataset(dataset_dir);
    for (const SceneSample& s : data) {
      DetectionRecord rec;
      rec.image_id = s.ann.id;
      rec.dets = detect(s.image, model, opts);
      if (!s.ann.cuboids.empty()) {
        std::vector<BoundingBox> boxes;
        for (const GtInstance& g : s.ann.cuboids) boxes.push_back(g.box);
        rec.gt_preds = predict_on_boxes(s.image, model, boxes, iters);
      }
      write_detections(os, rec);
    }
    std::cout << "detections for " << data.size() << " images written to "
              << out_path << "\n";
  } else {
    for (const std::string& p : image_paths) {
      DetectionRecord rec;
      rec.image_id = fs::path(p).stem().string();
      rec.dets = detect(read_png_gray8(p), model, opts);
      write_detections(os, rec);
    }
    std::cout << "detections for " << image_paths.size() << " images written to "
              << out_path << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& detections_path, const std::string& dataset_dir,
             double alpha, double iou_thresh, const std::string& out_dir) {
  const std::vector<SceneSample> data = load_dataset(dataset_dir);
  std::map<std::string, const DetectionRecord*> by_id;
  const std::vector<DetectionRecord> records = read_detections(detections_path);
  for (const DetectionRecord& r : records) by_id[r.image_id] = &r;

  std::vector<ImageDetections> images;
  std::vector<GtInstance> flat_gts;
  std::vector<Cuboid2D> flat_preds;
  bool have_gt_preds = true;
  for (const SceneSample& s : data) {
    ImageDetections im;
    im.gts = s.ann.cuboids;
    const auto it = by_id.find(s.ann.id);
    if (it != by_id.end()) {
      im.dets = it->second->dets;
      if (it->second->gt_preds.size() == s.ann.cuboids.size()) {
        for (size_t i = 0; i < s.ann.cuboids.size(); ++i) {
          flat_gts.push_back(s.ann.cuboids[i]);
          flat_preds.push_back(it->second->gt_preds[i]);
        }
      } else if (!s.ann.cuboids.empty()) {
        have_gt_preds = false;
      }
    } else if (!s.ann.cuboids.empty()) {
      have_gt_preds = false;
    }
    images.push_back(std::move(im));
  }

  const DetectionEval det_eval = evaluate_detections(images, iou_thresh);
  const ApkResult apk_result = apk(images, alpha, iou_thresh);

  std::printf("AP@%.2f  = %.4f   (%zu GT instances, %zu detections)\n",
              iou_thresh, det_eval.ap, det_eval.n_gt, det_eval.tp_ranked.size());
  std::printf("APK@%.2f = %.4f\n", alpha, apk_result.overall);

  PckResult pck_result;
  std::array<double, kNumFaces> faces{};
  std::vector<std::pair<double, double>> sweep;
  if (have_gt_preds && !flat_gts.empty()) {
    pck_result = pck(flat_gts, flat_preds, alpha);
    faces = face_pck(flat_gts, flat_preds, alpha);
    std::vector<double> alphas;
    for (double a = 0.0; a <= 0.5001; a += 0.02) alphas.push_back(a);
    sweep = pck_sweep(flat_gts, flat_preds, alphas);
    std::printf("PCK@%.2f = %.4f\n\n", alpha, pck_result.overall);

    std::printf("%-8s %10s %10s\n", "keypoint", "PCK", "APK");
    for (int k = 0; k < kNumCorners; ++k) {
      std::printf("%-8s %10.4f %10.4f\n", kCornerNames[k],
                  pck_result.per_keypoint[k], apk_result.per_keypoint[k]);
    }
    std::printf("\n%-8s %10s\n", "face", "PCK");
    for (int f = 0; f < kNumFaces; ++f) {
      std::printf("%-8s %10.4f\n", kFaceNames[f], faces[f]);
    }
  } else {
    std::printf("PCK: skipped (detections carry no gt_preds; rerun detect with --dataset)\n\n");
    std::printf("%-8s %10s\n", "keypoint", "APK");
    for (int k = 0; k < kNumCorners; ++k) {
      std::printf("%-8s %10.4f\n", kCornerNames[k], apk_result.per_keypoint[k]);
    }
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / "pr_curve.csv");
      write_pr_csv(os, det_eval.curve);
    }
    if (!sweep.empty()) {
      std::ofstream os(fs::path(out_dir) / "pck_vs_alpha.csv");
      write_pck_csv(os, sweep);
    }
    std::cout << "\ncurves written to " << out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic cuboid detection: generate, train, detect, evaluate"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "render a synthetic dataset");
  std::string gen_config, gen_out;
  int gen_count = 100;
  std::optional<uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "scene config JSON");
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--count", gen_count, "number of scenes");
  gen->add_option("--seed", gen_seed, "override scene seed");

  // train
  auto* tr = app.add_subcommand("train", "train a detector");
  std::string tr_dataset, tr_config, tr_out = "model.ckpt";
  std::optional<uint64_t> tr_seed;
  std::optional<int> tr_iters;
  std::optional<double> tr_lr;
  std::optional<int> tr_passes;
  bool no_corner = false, no_bbox = false, no_flip = false;
  tr->add_option("--dataset", tr_dataset, "dataset directory")->required();
  tr->add_option("--config", tr_config, "train config JSON");
  tr->add_option("--out", tr_out, "output checkpoint path");
  tr->add_option("--seed", tr_seed, "override RNG seed");
  tr->add_option("--iters", tr_iters, "override iteration count");
  tr->add_option("--lr", tr_lr, "override learning rate");
  tr->add_option("--train-passes", tr_passes,
                 "pooling passes per positive RoI during training (1 or 2)");
  tr->add_flag("--no-corner-loss", no_corner, "drop the corner loss (lambda5=0)");
  tr->add_flag("--no-bbox-loss", no_bbox, "drop the RoI box loss (lambda4=0)");
  tr->add_flag("--no-hflip", no_flip, "disable horizontal-flip augmentation");

  // detect
  auto* de = app.add_subcommand("detect", "run a trained detector");
  std::string de_ckpt, de_dataset, de_out = "detections.jsonl";
  std::vector<std::string> de_images;
  int de_iters = 2;
  double de_thresh = 0.5, de_nms = 0.3;
  de->add_option("--checkpoint", de_ckpt, "model checkpoint")->required();
  de->add_option("--dataset", de_dataset, "dataset directory to run on");
  de->add_option("--images", de_images, "PNG files to run on");
  de->add_option("--out", de_out, "output detections JSONL");
  de->add_option("--iters", de_iters, "feature re-pooling iterations (>= 1)");
  de->add_option("--score-thresh", de_thresh, "minimum cuboidness score");
  de->add_option("--nms", de_nms, "final NMS IoU threshold");

  // eval
  auto* ev = app.add_subcommand("eval", "score detections against a dataset");
  std::string ev_dets, ev_dataset, ev_out;
  double ev_alpha = 0.1, ev_iou = 0.5;
  ev->add_option("--detections", ev_dets, "detections JSONL")->required();
  ev->add_option("--dataset", ev_dataset, "dataset directory")->required();
  ev->add_option("--alpha", ev_alpha, "normalized keypoint threshold");
  ev->add_option("--iou", ev_iou, "detection IoU threshold");
  ev->add_option("--out-dir", ev_out, "directory for PR / PCK-alpha CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_config, gen_out, gen_count, gen_seed);
    if (tr->parsed()) {
      return cmd_train(tr_dataset, tr_config, tr_out, tr_seed, tr_iters, tr_lr,
                       no_corner, no_bbox, no_flip, tr_passes);
    }
    if (de->parsed()) {
      if (de_dataset.empty() && de_images.empty()) {
        // permit an explicitly empty run: write an empty file
        std::ofstream os(de_out);
        return 0;
      }
      return cmd_detect(de_ckpt, de_dataset, de_images, de_out, de_iters,
                        de_thresh, de_nms);
    }
    if (ev->parsed()) return cmd_eval(ev_dets, ev_dataset, ev_alpha, ev_iou, ev_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
