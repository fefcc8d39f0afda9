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

// Times the OpenMP kernels against the serial reference on training-like and
// larger shapes, and checks that both paths agree while at it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cuboid/kernels.hpp"
#include "cuboid/kernels_ref.hpp"
#include "cuboid/rng.hpp"

using namespace cuboid;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-34s %10.3f ms %10.3f ms %8.2fx   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, match ? "match" : "MISMATCH");
}

std::vector<double> randn(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void bench_conv3x3(int c_in, int c_out, int h, int w, int reps, Rng& rng) {
  const auto in = randn(size_t(c_in) * h * w, rng);
  const auto wt = randn(size_t(c_out) * c_in * 9, rng);
  const auto b = randn(c_out, rng);
  std::vector<double> out(size_t(c_out) * h * w), out_ref(out.size());
  const double ts = time_ms(
      [&] { ref::conv3x3_forward(in.data(), c_in, h, w, wt.data(), b.data(), c_out, out_ref.data()); },
      reps);
  const double tp = time_ms(
      [&] { conv3x3_forward(in.data(), c_in, h, w, wt.data(), b.data(), c_out, out.data()); },
      reps);
  char name[64];
  std::snprintf(name, sizeof(name), "conv3x3 %dx%dx%d -> %d", h, w, c_in, c_out);
  report(name, ts, tp, out == out_ref);
}

void bench_fc(int n_in, int n_out, int reps, Rng& rng) {
  const auto x = randn(n_in, rng);
  const auto wt = randn(size_t(n_out) * n_in, rng);
  const auto b = randn(n_out, rng);
  std::vector<double> y(n_out), y_ref(n_out);
  const double ts = time_ms(
      [&] { ref::fc_forward(x.data(), n_in, wt.data(), b.data(), n_out, y_ref.data()); }, reps);
  const double tp = time_ms(
      [&] { fc_forward(x.data(), n_in, wt.data(), b.data(), n_out, y.data()); }, reps);
  char name[64];
  std::snprintf(name, sizeof(name), "fc %d -> %d", n_in, n_out);
  report(name, ts, tp, y == y_ref);
}

void bench_roi_pool(int c, int h, int w, int n_rois, int reps, Rng& rng) {
  FeatureMap fm(c, h, w, 4.0);
  for (double& v : fm.values) v = rng.normal();
  std::vector<BoundingBox> rois;
  for (int i = 0; i < n_rois; ++i) {
    const double x1 = rng.uniform(0, w * 4.0 - 8);
    const double y1 = rng.uniform(0, h * 4.0 - 8);
    rois.push_back(BoundingBox{x1, y1, x1 + rng.uniform(6, 40), y1 + rng.uniform(6, 40)});
  }
  bool match = true;
  const double ts = time_ms(
      [&] {
        for (const auto& r : rois) ref::roi_pool(fm, r);
      },
      reps);
  const double tp = time_ms(
      [&] {
        for (const auto& r : rois) roi_pool(fm, r);
      },
      reps);
  for (const auto& r : rois) {
    match = match && roi_pool(fm, r).values == ref::roi_pool(fm, r).values;
  }
  char name[64];
  std::snprintf(name, sizeof(name), "roi_pool %dx%dx%d, %d RoIs", h, w, c, n_rois);
  report(name, ts, tp, match);
}

void bench_extractor(int h, int w, int reps, Rng& rng) {
  Image img(h, w);
  for (double& p : img.pixels) p = rng.uniform();
  const double ts = time_ms([&] { ref::extract_features(img, 4); }, reps);
  const double tp = time_ms([&] { extract_features(img, 4); }, reps);
  const bool match = extract_features(img, 4).values == ref::extract_features(img, 4).values;
  char name[64];
  std::snprintf(name, sizeof(name), "extract_features %dx%d", h, w);
  report(name, ts, tp, match);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled (serial build)\n\n");
#endif
  std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  Rng rng(1);
  // training-scale shapes
  bench_extractor(64, 64, 50, rng);
  bench_conv3x3(9, 32, 16, 16, 50, rng);
  bench_fc(441, 64, 200, rng);
  bench_roi_pool(9, 16, 16, 32, 50, rng);
  // larger shapes where parallelism pays
  bench_extractor(512, 512, 5, rng);
  bench_conv3x3(32, 64, 64, 64, 5, rng);
  bench_fc(4096, 4096, 5, rng);
  bench_roi_pool(64, 64, 64, 256, 5, rng);
  return 0;
}
