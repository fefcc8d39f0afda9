// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// Usage: acceptance [path-to-cli-binary]
// The CLI path is only needed for the determinism criterion; it is skipped
// (and fails) if the path is missing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cuboid/data.hpp"
#include "cuboid/encoding.hpp"
#include "cuboid/eval.hpp"
#include "cuboid/geometry.hpp"
#include "cuboid/kernels.hpp"
#include "cuboid/kernels_ref.hpp"
#include "cuboid/losses.hpp"
#include "cuboid/netcore.hpp"
#include "cuboid/refine.hpp"
#include "cuboid/rng.hpp"

using namespace cuboid;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double rel_err(double a, double b) {
  const double d = std::abs(a - b);
  if (d < 1e-9) return 0.0;
  return d / std::max({std::abs(a), std::abs(b), 1e-6});
}

// ---------------------------------------------------------------------------
// Criterion 1: geometry exactness
// ---------------------------------------------------------------------------

void criterion_geometry() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(10007);
  double worst = 0.0;
  int n = 0;
  while (n < 1000) {
    Cuboid3D c;
    c.dims = Vec3{rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)};
    c.center = Vec3{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(6.0, 14.0)};
    c.yaw = rng.uniform(-3.1, 3.1);
    c.pitch = rng.uniform(-3.1, 3.1);
    c.roll = rng.uniform(-3.1, 3.1);
    const CameraIntrinsics k{rng.uniform(100.0, 500.0), rng.uniform(100.0, 300.0),
                             rng.uniform(80.0, 260.0)};
    bool deep = true;
    for (const Vec3& p : cuboid_corners_3d(c)) deep = deep && p.z > 0.1;
    if (!deep) continue;
    ++n;
    const Cuboid2D proj = project_cuboid(c, k);
    auto known = proj.vertices;
    known[kFTL] = Vec2{0, 0};
    known[kBBR] = Vec2{0, 0};
    const Cuboid2D rec = infer_missing_corners(known);
    worst = std::max(worst, std::hypot(rec.vertices[kFTL].x - proj.vertices[kFTL].x,
                                       rec.vertices[kFTL].y - proj.vertices[kFTL].y));
    worst = std::max(worst, std::hypot(rec.vertices[kBBR].x - proj.vertices[kBBR].x,
                                       rec.vertices[kBBR].y - proj.vertices[kBBR].y));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, worst < 1e-6 && secs < 5.0,
         fmt("corner reconstruction over 1000 poses: max err %.3g px (< 1e-6), "
             "%.2f s (< 5)", worst, secs));
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient suite
// ---------------------------------------------------------------------------

template <typename F>
double central_diff(const F& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20011);
  double worst = 0.0;
  auto track = [&](double analytic, double numeric) {
    worst = std::max(worst, rel_err(analytic, numeric));
  };

  // smooth L1 over 20 shapes
  for (int shape = 0; shape < 20; ++shape) {
    const size_t m = 1 + rng.index(12);
    std::vector<double> pred(m), target(m), grad(m);
    for (size_t i = 0; i < m; ++i) {
      target[i] = rng.uniform(-3, 3);
      double diff = rng.uniform(-2.5, 2.5);
      if (std::abs(std::abs(diff) - 1.0) < 2e-3) diff += 0.02;
      pred[i] = target[i] + diff;
    }
    smooth_l1(pred, target, grad);
    for (int rep = 0; rep < 4; ++rep) {
      const size_t i = rng.index(m);
      track(grad[i], central_diff(
                         [&](double x) {
                           auto p = pred;
                           std::vector<double> g(m);
                           p[i] = x;
                           return smooth_l1(p, target, g);
                         },
                         pred[i]));
    }
  }

  // softmax log loss over 20 shapes
  for (int shape = 0; shape < 20; ++shape) {
    std::array<double, 2> logits{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const int label = rng.coin() ? 1 : 0;
    std::array<double, 2> grad;
    softmax_log_loss(logits, label, grad);
    for (int i = 0; i < 2; ++i) {
      track(grad[i], central_diff(
                         [&](double x) {
                           auto l = logits;
                           std::array<double, 2> g;
                           l[i] = x;
                           return softmax_log_loss(l, label, g);
                         },
                         logits[i]));
    }
  }

  // RPN conv stack over 20 random shapes
  for (int shape = 0; shape < 20; ++shape) {
    const int c_in = 1 + int(rng.index(3));
    const int c_mid = 2 + int(rng.index(3));
    const int k = 1 + int(rng.index(2));
    const int h = 2 + int(rng.index(3));
    const int w = 2 + int(rng.index(3));
    RpnParams p;
    p.resize(c_in, c_mid, k);
    p.init(rng);
    FeatureMap fm(c_in, h, w, 4.0);
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (double& v : fm.values) v = rng.uniform(0.05, 1.0);
      const RpnOut probe = rpn_forward(fm, p);
      double closest = 1e9;
      for (double z : probe.hidden_pre) closest = std::min(closest, std::abs(z));
      if (closest > 1e-3) break;
    }
    const RpnOut out = rpn_forward(fm, p);
    std::vector<double> po(out.obj.size()), pd(out.deltas.size());
    for (double& v : po) v = rng.normal();
    for (double& v : pd) v = rng.normal();
    RpnParams grads = p.zeros_clone();
    rpn_backward(fm, p, out, po, pd, grads);
    auto loss_now = [&] {
      const RpnOut o = rpn_forward(fm, p);
      double s = 0;
      for (size_t i = 0; i < o.obj.size(); ++i) s += o.obj[i] * po[i];
      for (size_t i = 0; i < o.deltas.size(); ++i) s += o.deltas[i] * pd[i];
      return s;
    };
    std::vector<std::vector<double>*> pt{&p.conv_w, &p.conv_b, &p.obj_w,
                                         &p.obj_b, &p.delta_w, &p.delta_b};
    std::vector<std::vector<double>*> gt{&grads.conv_w, &grads.conv_b,
                                         &grads.obj_w, &grads.obj_b,
                                         &grads.delta_w, &grads.delta_b};
    for (size_t t = 0; t < pt.size(); ++t) {
      const size_t i = rng.index(pt[t]->size());
      track((*gt[t])[i], central_diff(
                             [&](double x) {
                               const double keep = (*pt[t])[i];
                               (*pt[t])[i] = x;
                               const double v = loss_now();
                               (*pt[t])[i] = keep;
                               return v;
                             },
                             (*pt[t])[i]));
    }
  }

  // RoI pooling over 20 random shapes
  for (int shape = 0; shape < 20; ++shape) {
    const int c = 1 + int(rng.index(3));
    const int h = 8 + int(rng.index(6));
    const int w = 8 + int(rng.index(6));
    FeatureMap fm(c, h, w, 2.0);
    std::vector<double> levels(fm.values.size());
    std::iota(levels.begin(), levels.end(), 0.0);
    rng.shuffle(levels);
    for (size_t i = 0; i < fm.values.size(); ++i) fm.values[i] = levels[i] * 0.01;
    const double x1 = rng.uniform(0, w * 2.0 - 6);
    const double y1 = rng.uniform(0, h * 2.0 - 6);
    const BoundingBox roi{x1, y1, x1 + rng.uniform(5, w * 2.0 - x1),
                          y1 + rng.uniform(5, h * 2.0 - y1)};
    const RoiPoolOut out = roi_pool(fm, roi);
    std::vector<double> proj(out.values.size());
    for (double& v : proj) v = rng.normal();
    std::vector<double> d_fm(fm.values.size(), 0.0);
    roi_pool_backward(out, proj.data(), d_fm.data());
    for (int rep = 0; rep < 6; ++rep) {
      const size_t i = rng.index(fm.values.size());
      track(d_fm[i], central_diff(
                         [&](double x) {
                           FeatureMap fc = fm;
                           fc.values[i] = x;
                           const RoiPoolOut o = ref::roi_pool(fc, roi);
                           double s = 0;
                           for (size_t j = 0; j < o.values.size(); ++j) {
                             s += o.values[j] * proj[j];
                           }
                           return s;
                         },
                         fm.values[i]));
    }
  }

  // FC head over 20 random shapes, dropout disabled
  for (int shape = 0; shape < 20; ++shape) {
    HeadParams p;
    p.resize(1 + int(rng.index(2)), 6 + int(rng.index(8)));
    p.init(rng);
    std::vector<double> pooled(p.input_size());
    HeadOut probe;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (double& v : pooled) v = rng.uniform(0.05, 1.0);
      probe = head_forward(pooled, p);
      double closest = 1e9;
      for (double z : probe.z1) closest = std::min(closest, std::abs(z));
      for (double z : probe.z2) closest = std::min(closest, std::abs(z));
      if (closest > 1e-3) break;
    }
    const int label = rng.coin() ? 1 : 0;
    std::array<double, 4> bt{probe.box.dx - 0.4, probe.box.dy + 0.35,
                             probe.box.dw - 0.25, probe.box.dh + 0.45};
    std::array<double, 16> vt;
    for (int i = 0; i < 16; ++i) vt[i] = probe.verts[i] - 0.3;
    auto loss_of = [&](const HeadOut& out) {
      std::array<double, 2> g2;
      double total = softmax_log_loss(out.cls_logits, label, g2);
      std::vector<double> bp{out.box.dx, out.box.dy, out.box.dw, out.box.dh};
      std::vector<double> btv(bt.begin(), bt.end());
      std::vector<double> bg(4);
      total += smooth_l1(bp, btv, bg);
      std::vector<double> vp(out.verts.begin(), out.verts.end());
      std::vector<double> vtv(vt.begin(), vt.end());
      std::vector<double> vg(16);
      total += smooth_l1(vp, vtv, vg);
      return total;
    };
    const HeadOut out = head_forward(pooled, p);
    std::array<double, 2> d_cls;
    softmax_log_loss(out.cls_logits, label, d_cls);
    std::vector<double> bp{out.box.dx, out.box.dy, out.box.dw, out.box.dh};
    std::vector<double> btv(bt.begin(), bt.end());
    std::vector<double> bg(4);
    smooth_l1(bp, btv, bg);
    std::vector<double> vp(out.verts.begin(), out.verts.end());
    std::vector<double> vtv(vt.begin(), vt.end());
    std::vector<double> vg(16);
    smooth_l1(vp, vtv, vg);
    std::array<double, 4> d_box{bg[0], bg[1], bg[2], bg[3]};
    std::array<double, 16> d_vert;
    std::copy(vg.begin(), vg.end(), d_vert.begin());
    HeadParams grads = p.zeros_clone();
    head_backward(p, out, d_cls, d_box, d_vert, grads);
    std::vector<std::vector<double>*> pt{&p.fc1_w, &p.fc1_b, &p.fc2_w, &p.fc2_b,
                                         &p.cls_w, &p.cls_b, &p.box_w, &p.box_b,
                                         &p.vert_w, &p.vert_b};
    std::vector<std::vector<double>*> gt{&grads.fc1_w, &grads.fc1_b,
                                         &grads.fc2_w, &grads.fc2_b, &grads.cls_w,
                                         &grads.cls_b, &grads.box_w, &grads.box_b,
                                         &grads.vert_w, &grads.vert_b};
    for (size_t t = 0; t < pt.size(); ++t) {
      const size_t i = rng.index(pt[t]->size());
      track((*gt[t])[i], central_diff(
                             [&](double x) {
                               const double keep = (*pt[t])[i];
                               (*pt[t])[i] = x;
                               const double v = loss_of(head_forward(pooled, p));
                               (*pt[t])[i] = keep;
                               return v;
                             },
                             (*pt[t])[i]));
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(2, worst < 1e-4 && secs < 60.0,
         fmt("losses, RPN stack, RoI pooling, FC head vs finite differences: "
             "max rel err %.3g (< 1e-4), %.1f s (< 60)", worst, secs));
}

// ---------------------------------------------------------------------------
// Criterion 3: metric oracle equivalence
// ---------------------------------------------------------------------------

struct OracleOut {
  double ap = 0, pck = 0, apk = 0;
  std::array<double, kNumFaces> face{};
};

OracleOut oracle_eval(const std::vector<Detection>& dets,
                      const std::vector<GtInstance>& gts,
                      const std::vector<Cuboid2D>& gt_preds, double alpha,
                      double iou_thresh) {
  OracleOut out;
  const size_t nd = dets.size(), ng = gts.size();
  std::vector<size_t> order(nd);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
  auto iou2 = [](const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
  };
  std::vector<int> taken(ng, 0), match(nd, -1);
  std::vector<uint8_t> tp(nd, 0);
  for (size_t r = 0; r < nd; ++r) {
    const size_t d = order[r];
    double best = 0;
    int bj = -1;
    for (size_t j = 0; j < ng; ++j) {
      if (taken[j]) continue;
      const double v = iou2(dets[d].box, gts[j].box);
      if (v >= iou_thresh && v > best) {
        best = v;
        bj = int(j);
      }
    }
    if (bj >= 0) {
      taken[bj] = 1;
      match[d] = bj;
      tp[r] = 1;
    }
  }
  auto ap_of = [&](const std::vector<uint8_t>& flags, size_t n_gt) {
    if (n_gt == 0) return 0.0;
    std::vector<double> prec(flags.size()), rec(flags.size());
    size_t c = 0;
    for (size_t i = 0; i < flags.size(); ++i) {
      c += flags[i];
      prec[i] = double(c) / double(i + 1);
      rec[i] = double(c) / double(n_gt);
    }
    for (size_t i = flags.size(); i-- > 1;) prec[i - 1] = std::max(prec[i - 1], prec[i]);
    double ap = 0, prev = 0;
    for (size_t i = 0; i < flags.size(); ++i) {
      ap += (rec[i] - prev) * prec[i];
      prev = rec[i];
    }
    return ap;
  };
  out.ap = ap_of(tp, ng);
  auto kp_ok = [&](const Vec2& p, const Vec2& g, const BoundingBox& box) {
    return std::hypot(p.x - g.x, p.y - g.y) <=
           alpha * std::max(box.x2 - box.x1, box.y2 - box.y1);
  };
  size_t correct = 0;
  std::array<size_t, kNumFaces> face_ok{};
  for (size_t j = 0; j < ng; ++j) {
    std::array<bool, kNumCorners> ok{};
    for (int k = 0; k < kNumCorners; ++k) {
      ok[k] = kp_ok(gt_preds[j].vertices[k], gts[j].cuboid.vertices[k], gts[j].box);
      correct += ok[k];
    }
    for (int f = 0; f < kNumFaces; ++f) {
      bool all4 = true;
      for (int k : kFaceVertices[f]) all4 = all4 && ok[k];
      face_ok[f] += all4;
    }
  }
  out.pck = ng ? double(correct) / double(ng * kNumCorners) : 0.0;
  for (int f = 0; f < kNumFaces; ++f) {
    out.face[f] = ng ? double(face_ok[f]) / double(ng) : 0.0;
  }
  double apk_sum = 0;
  for (int k = 0; k < kNumCorners; ++k) {
    std::vector<uint8_t> flags(nd, 0);
    for (size_t r = 0; r < nd; ++r) {
      const size_t d = order[r];
      if (match[d] < 0) continue;
      const GtInstance& g = gts[match[d]];
      flags[r] = kp_ok(dets[d].cuboid.vertices[k], g.cuboid.vertices[k], g.box);
    }
    apk_sum += ap_of(flags, ng);
  }
  out.apk = apk_sum / kNumCorners;
  return out;
}

void criterion_metrics() {
  Rng rng(30013);
  bool all_equal = true;
  std::string first_mismatch;
  for (int trial = 0; trial < 500 && all_equal; ++trial) {
    const size_t ng = 1 + rng.index(5);
    const size_t nd = rng.index(11);
    std::vector<GtInstance> gts;
    std::vector<Cuboid2D> gt_preds;
    for (size_t j = 0; j < ng; ++j) {
      GtInstance g;
      const double x1 = rng.uniform(0, 40), y1 = rng.uniform(0, 40);
      g.box = BoundingBox{x1, y1, x1 + rng.uniform(4, 20), y1 + rng.uniform(4, 20)};
      for (auto& v : g.cuboid.vertices) {
        v = Vec2{rng.uniform(g.box.x1, g.box.x2), rng.uniform(g.box.y1, g.box.y2)};
      }
      g.vis.fill(true);
      gts.push_back(g);
      Cuboid2D p = g.cuboid;
      for (auto& v : p.vertices) {
        v.x += rng.normal(0, 1.5);
        v.y += rng.normal(0, 1.5);
      }
      gt_preds.push_back(p);
    }
    std::vector<Detection> dets;
    for (size_t i = 0; i < nd; ++i) {
      Detection d;
      d.score = rng.uniform();
      if (rng.coin()) {
        const GtInstance& g = gts[rng.index(ng)];
        d.box = BoundingBox{g.box.x1 + rng.normal(0, 2), g.box.y1 + rng.normal(0, 2),
                            g.box.x2 + rng.normal(0, 2), g.box.y2 + rng.normal(0, 2)};
        if (!d.box.valid()) d.box = g.box;
        d.cuboid = g.cuboid;
        for (auto& v : d.cuboid.vertices) {
          v.x += rng.normal(0, 2);
          v.y += rng.normal(0, 2);
        }
      } else {
        const double x1 = rng.uniform(0, 40), y1 = rng.uniform(0, 40);
        d.box = BoundingBox{x1, y1, x1 + rng.uniform(3, 18), y1 + rng.uniform(3, 18)};
        d.cuboid = gt_preds[rng.index(ng)];
      }
      dets.push_back(d);
    }
    std::vector<ImageDetections> data(1);
    data[0].dets = dets;
    data[0].gts = gts;
    const DetectionEval de = evaluate_detections(data, 0.5);
    const ApkResult ar = apk(data, 0.1, 0.5);
    const PckResult pr = pck(gts, gt_preds, 0.1);
    const auto fr = face_pck(gts, gt_preds, 0.1);
    const OracleOut want = oracle_eval(dets, gts, gt_preds, 0.1, 0.5);
    if (de.ap != want.ap || pr.overall != want.pck || ar.overall != want.apk) {
      all_equal = false;
      first_mismatch = fmt("trial %d ap %.17g vs %.17g", trial, de.ap, want.ap);
    }
    for (int f = 0; f < kNumFaces; ++f) {
      if (fr[f] != want.face[f]) all_equal = false;
    }
  }

  // hand cases
  const bool iou_case =
      iou(BoundingBox{0, 0, 10, 10}, BoundingBox{5, 0, 15, 10}) == 1.0 / 3.0;
  const bool ap_case =
      std::abs(average_precision({1, 0, 1}, 2) - 5.0 / 6.0) < 1e-15;
  std::vector<GtInstance> g2(2);
  g2[0].box = g2[1].box = BoundingBox{0, 0, 20, 10};
  for (auto& g : g2) {
    for (int k = 0; k < kNumCorners; ++k) g.cuboid.vertices[k] = Vec2{5.0 + k, 5.0};
  }
  std::vector<Cuboid2D> p2{g2[0].cuboid, g2[1].cuboid};
  for (auto& c : p2) {
    for (auto& v : c.vertices) v.x += 50;
  }
  p2[0].vertices[2] = g2[0].cuboid.vertices[2];
  const bool pck_case = pck(g2, p2, 0.1).overall == 1.0 / 16.0;

  const std::string mismatch_note =
      all_equal ? std::string() : " (" + first_mismatch + ")";
  report(3, all_equal && iou_case && ap_case && pck_case,
         fmt("500 random instances exactly equal the exhaustive oracle%s; "
             "hand cases IoU=1/3 %s, AP=5/6 %s, PCK=1/16 %s",
             mismatch_note.c_str(), iou_case ? "ok" : "BAD",
             ap_case ? "ok" : "BAD", pck_case ? "ok" : "BAD"));
}

// ---------------------------------------------------------------------------
// Criterion 4: encode/decode roundtrips
// ---------------------------------------------------------------------------

void criterion_roundtrips() {
  Rng rng(40031);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double x1 = rng.uniform(0, 60), y1 = rng.uniform(0, 60);
    const BoundingBox roi{x1, y1, x1 + rng.uniform(2, 60), y1 + rng.uniform(2, 60)};
    Cuboid2D c;
    for (auto& v : c.vertices) v = Vec2{rng.uniform(0, 64), rng.uniform(0, 64)};
    const Cuboid2D back = decode_vertices(encode_vertices(c, roi), roi);
    for (int i = 0; i < kNumCorners; ++i) {
      worst = std::max(worst, std::abs(back.vertices[i].x - c.vertices[i].x));
      worst = std::max(worst, std::abs(back.vertices[i].y - c.vertices[i].y));
    }
    const double bx1 = rng.uniform(0, 60), by1 = rng.uniform(0, 60);
    const BoundingBox gt{bx1, by1, bx1 + rng.uniform(2, 60), by1 + rng.uniform(2, 60)};
    const BoundingBox back_box = decode_box(encode_box(gt, roi), roi);
    worst = std::max({worst, std::abs(back_box.x1 - gt.x1), std::abs(back_box.y1 - gt.y1),
                      std::abs(back_box.x2 - gt.x2), std::abs(back_box.y2 - gt.y2)});
  }
  report(4, worst < 1e-9,
         fmt("vertex and box encode/decode roundtrips over 10^4 cases: "
             "max err %.3g (< 1e-9)", worst));
}

// ---------------------------------------------------------------------------
// Criteria 5 and 6: desk-scale training and directional ablations
// ---------------------------------------------------------------------------

struct EvalNumbers {
  double ap = 0;
  double pck_iter1 = 0;
  double pck_iter2 = 0;
};

std::vector<TrainItem> to_items(const std::vector<SceneSample>& scenes) {
  std::vector<TrainItem> items;
  items.reserve(scenes.size());
  for (const SceneSample& s : scenes) items.push_back({s.image, s.ann.cuboids});
  return items;
}

EvalNumbers evaluate_model(const Model& model, const std::vector<SceneSample>& test) {
  DetectOptions opts;
  opts.score_thresh = 0.05;
  opts.refine_iters = 2;
  std::vector<ImageDetections> images;
  std::vector<GtInstance> flat_gts;
  std::vector<Cuboid2D> preds1, preds2;
  for (const SceneSample& s : test) {
    ImageDetections im;
    im.gts = s.ann.cuboids;
    im.dets = detect(s.image, model, opts);
    images.push_back(std::move(im));
    if (s.ann.cuboids.empty()) continue;
    std::vector<BoundingBox> boxes;
    for (const GtInstance& g : s.ann.cuboids) boxes.push_back(g.box);
    const auto p1 = predict_on_boxes(s.image, model, boxes, 1);
    const auto p2 = predict_on_boxes(s.image, model, boxes, 2);
    for (size_t i = 0; i < boxes.size(); ++i) {
      flat_gts.push_back(s.ann.cuboids[i]);
      preds1.push_back(p1[i]);
      preds2.push_back(p2[i]);
    }
  }
  EvalNumbers out;
  out.ap = evaluate_detections(images, 0.5).ap;
  out.pck_iter1 = pck(flat_gts, preds1, 0.1).overall;
  out.pck_iter2 = pck(flat_gts, preds2, 0.1).overall;
  return out;
}

void criteria_training_and_ablations() {
  const auto t_start = std::chrono::steady_clock::now();
  const SceneConfig scene_cfg{};  // generator defaults

  SceneConfig train_cfg = scene_cfg;
  train_cfg.seed = 1000;
  SceneConfig test_cfg = scene_cfg;
  test_cfg.seed = 2000;

  std::vector<SceneSample> train_scenes(500), test_scenes(100);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < 500; ++i) train_scenes[i] = render_scene(train_cfg, i);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < 100; ++i) test_scenes[i] = render_scene(test_cfg, i);

  // Round-trip through the dataset format so images carry the same 8-bit
  // quantization the CLI pipeline trains on.
  {
    const fs::path dir = fs::temp_directory_path() / "cuboid_acceptance_data";
    fs::remove_all(dir);
    save_dataset((dir / "train").string(), train_scenes);
    save_dataset((dir / "test").string(), test_scenes);
    const auto train_loaded = load_dataset((dir / "train").string());
    const auto test_loaded = load_dataset((dir / "test").string());
    for (size_t i = 0; i < train_scenes.size(); ++i) {
      train_scenes[i].image = train_loaded[i].image;
    }
    for (size_t i = 0; i < test_scenes.size(); ++i) {
      test_scenes[i].image = test_loaded[i].image;
    }
    fs::remove_all(dir);
  }

  const std::vector<TrainItem> train_items = to_items(train_scenes);
  const std::vector<TrainItem> train_items_125(train_items.begin(),
                                               train_items.begin() + 125);

  const std::array<uint64_t, 3> seeds{7, 8, 9};

  // joint models, one per seed; seed 7 doubles as the criterion-5 run
  std::vector<EvalNumbers> joint;
  double train5_minutes = 0.0;
  for (uint64_t seed : seeds) {
    TrainConfig cfg;
    cfg.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult result = train(train_items, cfg);
    const double mins =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    if (seed == 7) train5_minutes = mins;
    joint.push_back(evaluate_model(result.model, test_scenes));
    std::printf("  [info] joint seed %llu: AP %.4f  PCK(iters=1) %.4f  "
                "PCK(iters=2) %.4f  (%.1f min)\n",
                (unsigned long long)seed, joint.back().ap, joint.back().pck_iter1,
                joint.back().pck_iter2, mins);
    std::fflush(stdout);
  }

  report(5, joint[0].ap >= 0.7 && joint[0].pck_iter2 >= 0.5 && train5_minutes < 10.0,
         fmt("500 images, 5000 iterations in %.1f min (< 10): AP@0.5 = %.4f "
             "(>= 0.7), PCK@0.1 = %.4f (>= 0.5)", train5_minutes, joint[0].ap,
             joint[0].pck_iter2));

  // (a) iterative refinement helps PCK, mean over seeds
  double pck1 = 0, pck2 = 0;
  for (const EvalNumbers& e : joint) {
    pck1 += e.pck_iter1 / joint.size();
    pck2 += e.pck_iter2 / joint.size();
  }

  // (b) corner-only loss (no RoI box regression), 3 seeds
  double ap_joint = 0, ap_corner = 0;
  for (const EvalNumbers& e : joint) ap_joint += e.ap / joint.size();
  for (uint64_t seed : seeds) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.weights.roi_reg = 0.0;
    const TrainResult result = train(train_items, cfg);
    const EvalNumbers e = evaluate_model(result.model, test_scenes);
    ap_corner += e.ap / seeds.size();
    std::printf("  [info] corner-only seed %llu: AP %.4f\n",
                (unsigned long long)seed, e.ap);
    std::fflush(stdout);
  }

  // (c) 125 vs 500 training images, 3 seeds
  double ap_125 = 0;
  for (uint64_t seed : seeds) {
    TrainConfig cfg;
    cfg.seed = seed;
    const TrainResult result = train(train_items_125, cfg);
    const EvalNumbers e = evaluate_model(result.model, test_scenes);
    ap_125 += e.ap / seeds.size();
    std::printf("  [info] 125-image seed %llu: AP %.4f\n",
                (unsigned long long)seed, e.ap);
    std::fflush(stdout);
  }

  const bool a_ok = pck2 > pck1;
  const bool b_ok = ap_joint >= ap_corner;
  const bool c_ok = ap_joint > ap_125;
  report(6, a_ok && b_ok && c_ok,
         fmt("(a) mean PCK iters2 %.4f > iters1 %.4f: %s; "
             "(b) AP joint %.4f >= corner-only %.4f: %s; "
             "(c) AP 500-img %.4f > 125-img %.4f: %s",
             pck2, pck1, a_ok ? "yes" : "NO", ap_joint, ap_corner,
             b_ok ? "yes" : "NO", ap_joint, ap_125, c_ok ? "yes" : "NO"));

  const double total_min =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() / 60.0;
  std::printf("  [info] criteria 5-6 wall time: %.1f min\n", total_min);
}

// ---------------------------------------------------------------------------
// Criterion 7: 6-corner vs 8-corner parametrization under noise
// ---------------------------------------------------------------------------

void criterion_parametrizations() {
  Rng rng(70001);
  const CameraIntrinsics k{200, 160, 120};
  double err8_noisy = 0, err6_noisy = 0, err8_clean = 0, err6_clean = 0;
  int n = 0, failures = 0;
  while (n < 200) {
    Cuboid3D c;
    c.dims = Vec3{rng.uniform(0.8, 2.5), rng.uniform(0.8, 2.5), rng.uniform(0.8, 2.5)};
    c.center = Vec3{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(6, 12)};
    c.yaw = rng.uniform(-3.1, 3.1);
    c.pitch = rng.uniform(-3.1, 3.1);
    c.roll = rng.uniform(-3.1, 3.1);
    const Cuboid2D proj = project_cuboid(c, k);
    // direct 8-corner prediction at sigma=2: noise on the dropped corners
    std::array<Vec2, kNumCorners> noisy;
    for (int i = 0; i < kNumCorners; ++i) {
      noisy[i] = Vec2{proj.vertices[i].x + rng.normal(0, 2.0),
                      proj.vertices[i].y + rng.normal(0, 2.0)};
    }
    Cuboid2D inferred;
    try {
      inferred = infer_missing_corners(noisy);
    } catch (const Error&) {
      ++failures;
      if (failures > 100) break;
      continue;
    }
    ++n;
    for (int corner : {int(kFTL), int(kBBR)}) {
      err8_noisy += std::hypot(noisy[corner].x - proj.vertices[corner].x,
                               noisy[corner].y - proj.vertices[corner].y) / 2;
      err6_noisy += std::hypot(inferred.vertices[corner].x - proj.vertices[corner].x,
                               inferred.vertices[corner].y - proj.vertices[corner].y) / 2;
    }
    // sigma = 0: both routes exact
    const Cuboid2D clean = infer_missing_corners(proj.vertices);
    for (int corner : {int(kFTL), int(kBBR)}) {
      err8_clean += 0.0;
      err6_clean += std::hypot(clean.vertices[corner].x - proj.vertices[corner].x,
                               clean.vertices[corner].y - proj.vertices[corner].y) / 2;
    }
  }
  err8_noisy /= n;
  err6_noisy /= n;
  err6_clean /= n;
  const bool noisy_ok = err8_noisy < err6_noisy;
  const bool clean_ok = err6_clean < 1e-6 && err8_clean == 0.0;
  report(7, noisy_ok && clean_ok && n >= 150,
         fmt("sigma=2 px over %d poses: direct 8-corner err %.2f px < "
             "6-corner+VP err %.2f px: %s; sigma=0 exact (max %.2g px)",
             n, err8_noisy, err6_noisy, noisy_ok ? "yes" : "NO", err6_clean));
}

// ---------------------------------------------------------------------------
// Criterion 8: training determinism through the CLI
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void criterion_determinism(const char* cli) {
  if (cli == nullptr) {
    report(8, false, "no CLI binary path given");
    return;
  }
  const fs::path dir = fs::temp_directory_path() / "cuboid_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = (dir / "data").string();
  const std::string ck1 = (dir / "a.ckpt").string();
  const std::string ck2 = (dir / "b.ckpt").string();
  auto run = [&](const std::string& args) {
    return std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
  };
  bool ok = run("gen --out " + data + " --count 12 --seed 5") == 0;
  ok = ok && run("train --dataset " + data + " --out " + ck1 + " --iters 60 --seed 3") == 0;
  ok = ok && run("train --dataset " + data + " --out " + ck2 + " --iters 60 --seed 3") == 0;
  const bool identical = ok && slurp(ck1) == slurp(ck2) && !slurp(ck1).empty();
  report(8, identical,
         fmt("cmd_train twice with seed 3: checkpoints %s (%zu bytes)",
             identical ? "byte-identical" : "DIFFER", slurp(ck1).size()));
}

}  // namespace

int main(int argc, char** argv) {
  now_seconds();  // pin the start time
  std::printf("acceptance suite\n");
  criterion_geometry();
  criterion_gradients();
  criterion_metrics();
  criterion_roundtrips();
  criteria_training_and_ablations();
  criterion_parametrizations();
  criterion_determinism(argc > 1 ? argv[1] : nullptr);
  std::printf("%s (%d failure%s), total %.1f min\n",
              g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
              g_failures, g_failures == 1 ? "" : "s", now_seconds() / 60.0);
  return g_failures == 0 ? 0 : 1;
}
