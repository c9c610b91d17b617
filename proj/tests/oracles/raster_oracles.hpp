/* Copyright 2026 The floodmap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Per-pixel reference implementations for resampling, slope, HAND and
// confusion counting.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

/// Source pixel-center coordinate sampled by output index o.
inline double source_coord(std::size_t o, std::size_t src, std::size_t dst) {
  if (dst == 1) return (static_cast<double>(src) - 1.0) / 2.0;
  return static_cast<double>(o) * (static_cast<double>(src) - 1.0) / (static_cast<double>(dst) - 1.0);
}

/// Bilinear sample of a row-major w x h field at (sx, sy).
inline double bilinear_at(const std::vector<float>& v, std::size_t w, std::size_t h, double sx, double sy) {
  auto value = [&](long x, long y) {
    x = std::clamp(x, 0L, static_cast<long>(w) - 1);
    y = std::clamp(y, 0L, static_cast<long>(h) - 1);
    return static_cast<double>(v[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)]);
  };
  const long x0 = static_cast<long>(std::floor(sx));
  const long y0 = static_cast<long>(std::floor(sy));
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  const double top = value(x0, y0) + fx * (value(x0 + 1, y0) - value(x0, y0));
  const double bottom = value(x0, y0 + 1) + fx * (value(x0 + 1, y0 + 1) - value(x0, y0 + 1));
  return top + fy * (bottom - top);
}

/// Slope in degrees from central differences (interior pixels only).
inline double central_slope(const std::vector<float>& z, std::size_t w, std::size_t x, std::size_t y, double cell) {
  auto at = [&](std::size_t xx, std::size_t yy) { return static_cast<double>(z[yy * w + xx]); };
  const double dzdx = (at(x + 1, y) - at(x - 1, y)) / (2.0 * cell);
  const double dzdy = (at(x, y + 1) - at(x, y - 1)) / (2.0 * cell);
  return std::atan(std::hypot(dzdx, dzdy)) * 180.0 / M_PI;
}

/// HAND by scanning every stream cell for every pixel.
inline std::vector<double> hand_all_pairs(const std::vector<float>& z, const std::vector<std::uint8_t>& streams,
                                          std::size_t w, std::size_t h) {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < streams.size(); ++i)
    if (streams[i] == 1) cells.push_back(i);
  std::vector<double> out(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    if (streams[i] == 1) {
      out[i] = 0.0;
      continue;
    }
    const auto px = static_cast<long>(i % w), py = static_cast<long>(i / w);
    long best_d = std::numeric_limits<long>::max();
    double best_z = 0.0;
    for (std::size_t c : cells) {
      const long dx = static_cast<long>(c % w) - px, dy = static_cast<long>(c / w) - py;
      const long d = dx * dx + dy * dy;
      const double zc = z[c];
      if (d < best_d || (d == best_d && zc < best_z)) {
        best_d = d;
        best_z = zc;
      }
    }
    out[i] = std::max(0.0, static_cast<double>(z[i]) - best_z);
  }
  return out;
}

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts count_pairs(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p == 255 || t == 255) continue;
    if (p == 1 && t == 1) ++c.tp;
    if (p == 1 && t == 0) ++c.fp;
    if (p == 0 && t == 1) ++c.fn;
    if (p == 0 && t == 0) ++c.tn;
  }
  return c;
}

struct Scores {
  double precision, recall, f1, iou, accuracy;
};

inline Scores naive_scores(const Counts& c) {
  auto q = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  return {q(tp, tp + fp), q(tp, tp + fn), q(2 * tp, 2 * tp + fp + fn), q(tp, tp + fp + fn),
          q(tp + tn, tp + fp + fn + tn)};
}

}  // namespace oracle
