#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cuboid/eval.hpp"
#include "test_util.hpp"

using namespace cuboid;

namespace {

Detection make_det(double score, const BoundingBox& box) {
  Detection d;
  d.score = score;
  d.box = box;
  for (int i = 0; i < kNumCorners; ++i) {
    d.cuboid.vertices[i] = Vec2{box.x1 + i, box.y1 + i};
  }
  return d;
}

GtInstance make_gt(const BoundingBox& box) {
  GtInstance g;
  g.box = box;
  for (int i = 0; i < kNumCorners; ++i) {
    g.cuboid.vertices[i] = Vec2{box.x1 + i, box.y1 + i};
  }
  g.vis.fill(true);
  return g;
}

}  // namespace

TEST_CASE("iou: identity, disjoint, one-third hand case with a grid oracle") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BoundingBox{20, 20, 30, 30}) == 0.0);

  const BoundingBox b{5, 0, 15, 10};
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
  // unit-grid rasterization oracle
  int inter = 0, uni = 0;
  for (int y = -5; y < 25; ++y) {
    for (int x = -5; x < 25; ++x) {
      const bool in_a = x >= 0 && x < 10 && y >= 0 && y < 10;
      const bool in_b = x >= 5 && x < 15 && y >= 0 && y < 10;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  CHECK(iou(a, b) == doctest::Approx(double(inter) / double(uni)));
}

TEST_CASE("match_detections: TP, duplicate FP, one-to-one") {
  const std::vector<BoundingBox> gts{{0, 0, 10, 10}};
  std::vector<Detection> dets{make_det(0.9, BoundingBox{1, 0, 11, 10})};
  CHECK(iou(dets[0].box, gts[0]) == doctest::Approx(9.0 / 11.0));
  MatchResult m = match_detections(dets, gts, 0.5);
  CHECK(m.tp[0] == 1);
  CHECK(m.det_to_gt[0] == 0);

  dets.push_back(make_det(0.8, BoundingBox{0.5, 0, 10.5, 10}));
  m = match_detections(dets, gts, 0.5);
  CHECK(m.tp[0] == 1);   // higher score matched first
  CHECK(m.tp[1] == 0);   // duplicate of the same GT
  CHECK(m.gt_to_det[0] == 0);
}

TEST_CASE("average_precision: perfect, all-FP, and the 5/6 hand case") {
  CHECK(average_precision({1}, 1) == doctest::Approx(1.0));
  CHECK(average_precision({0, 0, 0}, 2) == doctest::Approx(0.0));
  // TP, FP, TP with 2 GT: AP = 1 * 0.5 + (2/3) * 0.5 = 5/6
  CHECK(average_precision({1, 0, 1}, 2) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("pr_curve groups equal scores and recall is nondecreasing") {
  const std::vector<double> scores{0.9, 0.9, 0.7, 0.5, 0.5};
  const std::vector<uint8_t> tp{1, 0, 1, 1, 0};
  const PrCurve c = pr_curve(scores, tp, 4);
  CHECK(c.size() == 3);  // distinct thresholds
  for (size_t i = 1; i < c.size(); ++i) CHECK(c[i].recall >= c[i - 1].recall);
  CHECK(c[0].recall == doctest::Approx(0.25));
  CHECK(c[0].precision == doctest::Approx(0.5));
  CHECK(c[2].recall == doctest::Approx(0.75));
  CHECK(c[2].precision == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("pck: perfect, 1-of-16, inclusive boundary") {
  const BoundingBox box{0, 0, 20, 10};  // max(h, w) = 20, alpha 0.1 -> 2 px
  std::vector<GtInstance> gts{make_gt(box), make_gt(box)};
  std::vector<Cuboid2D> preds{gts[0].cuboid, gts[1].cuboid};
  PckResult r = pck(gts, preds, 0.1);
  CHECK(r.overall == 1.0);
  for (double v : r.per_keypoint) CHECK(v == 1.0);

  // push every keypoint out except one
  for (auto& c : preds) {
    for (auto& v : c.vertices) v.x += 50.0;
  }
  preds[0].vertices[3] = gts[0].cuboid.vertices[3];
  r = pck(gts, preds, 0.1);
  CHECK(r.overall == doctest::Approx(1.0 / 16.0));
  CHECK(r.per_keypoint[3] == doctest::Approx(0.5));

  // exactly at the threshold distance counts as correct
  preds = {gts[0].cuboid, gts[1].cuboid};
  preds[0].vertices[0].x += 2.0;  // == 0.1 * 20
  r = pck(gts, preds, 0.1);
  CHECK(r.per_keypoint[0] == doctest::Approx(1.0));

  preds.pop_back();
  CHECK_THROWS_AS(pck(gts, preds, 0.1), CountMismatch);
}

TEST_CASE("face_pck: all-correct, single bad vertex hits its three faces") {
  const BoundingBox box{0, 0, 20, 20};
  std::vector<GtInstance> gts{make_gt(box)};
  std::vector<Cuboid2D> preds{gts[0].cuboid};
  auto faces = face_pck(gts, preds, 0.1);
  for (double f : faces) CHECK(f == 1.0);

  // corrupt FTL only: front, left and top faces break
  preds[0].vertices[kFTL].x += 50;
  faces = face_pck(gts, preds, 0.1);
  CHECK(faces[kFront] == 0.0);
  CHECK(faces[kLeft] == 0.0);
  CHECK(faces[kTop] == 0.0);
  CHECK(faces[kBack] == 1.0);
  CHECK(faces[kRight] == 1.0);
  CHECK(faces[kBottom] == 1.0);
}

TEST_CASE("pck_sweep endpoints and monotonicity") {
  Rng rng(401);
  const BoundingBox box{0, 0, 30, 30};
  std::vector<GtInstance> gts;
  std::vector<Cuboid2D> preds;
  for (int i = 0; i < 6; ++i) {
    gts.push_back(make_gt(box));
    Cuboid2D p = gts.back().cuboid;
    for (auto& v : p.vertices) {
      v.x += rng.normal(0, 2.0);
      v.y += rng.normal(0, 2.0);
    }
    preds.push_back(p);
  }
  std::vector<double> alphas{0.0, 0.05, 0.1, 0.2, 0.4, 1.0, 1e9};
  const auto sweep = pck_sweep(gts, preds, alphas);
  CHECK(sweep.front().second == 0.0);       // only exact hits at alpha = 0
  CHECK(sweep.back().second == 1.0);        // everything within a huge alpha
  for (size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].second >= sweep[i - 1].second);
  }
  // midpoints agree with pointwise pck
  for (const auto& [a, v] : sweep) {
    CHECK(v == doctest::Approx(pck(gts, preds, a).overall));
  }
}

TEST_CASE("apk: perfect detector, right boxes with wrong keypoints") {
  const BoundingBox b1{0, 0, 10, 10};
  const BoundingBox b2{20, 20, 34, 32};
  std::vector<ImageDetections> data(1);
  data[0].gts = {make_gt(b1), make_gt(b2)};
  data[0].dets = {make_det(0.9, b1), make_det(0.8, b2)};
  ApkResult r = apk(data, 0.1, 0.5);
  CHECK(r.overall == doctest::Approx(1.0));
  for (double v : r.per_keypoint) CHECK(v == doctest::Approx(1.0));

  for (auto& d : data[0].dets) {
    for (auto& v : d.cuboid.vertices) v.y += 40.0;
  }
  r = apk(data, 0.1, 0.5);
  CHECK(r.overall == doctest::Approx(0.0));
}

namespace {

// Exhaustive single-image protocol oracle used for the equivalence checks:
// independent implementation of matching, AP, PCK, APK and face-PCK.
struct OracleOut {
  double ap = 0;
  double pck = 0;
  double apk = 0;
  std::array<double, kNumFaces> face{};
};

OracleOut oracle_eval(const std::vector<Detection>& dets,
                      const std::vector<GtInstance>& gts,
                      const std::vector<Cuboid2D>& gt_preds, double alpha,
                      double iou_thresh) {
  OracleOut out;
  const size_t nd = dets.size(), ng = gts.size();
  // rank detections by score, stable
  std::vector<size_t> order(nd);
  for (size_t i = 0; i < nd; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });
  auto iou2 = [](const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
  };
  std::vector<int> taken(ng, 0);
  std::vector<int> match(nd, -1);
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
    const double t = alpha * std::max(box.x2 - box.x1, box.y2 - box.y1);
    return std::hypot(p.x - g.x, p.y - g.y) <= t;
  };

  // PCK over gt_preds
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

  // APK per keypoint over the ranked detections
  double apk_sum = 0;
  for (int k = 0; k < kNumCorners; ++k) {
    std::vector<uint8_t> flags(nd, 0);
    for (size_t r = 0; r < nd; ++r) {
      const size_t d = order[r];
      if (match[d] < 0) continue;
      const GtInstance& g = gts[match[d]];
      flags[r] = kp_ok(dets[d].cuboid.vertices[k], g.cuboid.vertices[k], g.box) ? 1 : 0;
    }
    apk_sum += ap_of(flags, ng);
  }
  out.apk = apk_sum / kNumCorners;
  return out;
}

}  // namespace

TEST_CASE("metrics exactly equal the exhaustive oracle on random instances") {
  Rng rng(409);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t ng = 1 + rng.index(5);
    const size_t nd = rng.index(11);
    std::vector<GtInstance> gts;
    std::vector<Cuboid2D> gt_preds;
    for (size_t j = 0; j < ng; ++j) {
      GtInstance g = make_gt(testutil::random_box(rng, 0, 50, 4));
      for (auto& v : g.cuboid.vertices) {
        v.x = rng.uniform(g.box.x1, g.box.x2);
        v.y = rng.uniform(g.box.y1, g.box.y2);
      }
      gts.push_back(g);
      Cuboid2D p = g.cuboid;
      for (auto& v : p.vertices) {
        v.x += rng.normal(0, 1.5);
        v.y += rng.normal(0, 1.5);
      }
      gt_preds.push_back(p);
    }
    std::vector<Detection> dets;
    for (size_t d = 0; d < nd; ++d) {
      // half the detections hover near a GT box
      Detection det;
      if (rng.coin() && !gts.empty()) {
        const GtInstance& g = gts[rng.index(gts.size())];
        det = make_det(rng.uniform(),
                       BoundingBox{g.box.x1 + rng.normal(0, 2), g.box.y1 + rng.normal(0, 2),
                                   g.box.x2 + rng.normal(0, 2), g.box.y2 + rng.normal(0, 2)});
        if (!det.box.valid()) det.box = g.box;
        det.cuboid = g.cuboid;
        for (auto& v : det.cuboid.vertices) {
          v.x += rng.normal(0, 2);
          v.y += rng.normal(0, 2);
        }
      } else {
        det = make_det(rng.uniform(), testutil::random_box(rng, 0, 50, 3));
      }
      dets.push_back(det);
    }

    std::vector<ImageDetections> data(1);
    data[0].dets = dets;
    data[0].gts = gts;
    const DetectionEval de = evaluate_detections(data, 0.5);
    const ApkResult ar = apk(data, 0.1, 0.5);
    const PckResult pr = pck(gts, gt_preds, 0.1);
    const auto fr = face_pck(gts, gt_preds, 0.1);
    const OracleOut want = oracle_eval(dets, gts, gt_preds, 0.1, 0.5);

    CHECK(de.ap == want.ap);
    CHECK(pr.overall == want.pck);
    CHECK(ar.overall == want.apk);
    for (int f = 0; f < kNumFaces; ++f) CHECK(fr[f] == want.face[f]);
  }
}

TEST_CASE("metric invariants: ranges, APK bounded by AP, permutation stability") {
  Rng rng(419);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t ng = 1 + rng.index(4);
    const size_t nd = 1 + rng.index(8);
    std::vector<ImageDetections> data(1);
    for (size_t j = 0; j < ng; ++j) {
      data[0].gts.push_back(make_gt(testutil::random_box(rng, 0, 50, 4)));
    }
    std::vector<double> scores;
    for (size_t d = 0; d < nd; ++d) {
      double s;
      do {
        s = rng.uniform();
      } while (std::find(scores.begin(), scores.end(), s) != scores.end());
      scores.push_back(s);
      Detection det = make_det(s, testutil::random_box(rng, 0, 50, 3));
      if (rng.coin()) {
        det.box = data[0].gts[rng.index(ng)].box;
        det.cuboid = data[0].gts[rng.index(ng)].cuboid;
      }
      data[0].dets.push_back(det);
    }
    const DetectionEval de = evaluate_detections(data, 0.5);
    const ApkResult ar = apk(data, 0.1, 0.5);
    CHECK(de.ap >= 0.0);
    CHECK(de.ap <= 1.0);
    CHECK(ar.overall <= de.ap + 1e-12);  // keypoint TP requires a box TP

    // permuting detections with distinct scores changes nothing
    std::vector<ImageDetections> shuffled = data;
    rng.shuffle(shuffled[0].dets);
    CHECK(evaluate_detections(shuffled, 0.5).ap == de.ap);
    CHECK(apk(shuffled, 0.1, 0.5).overall == ar.overall);
  }
}
