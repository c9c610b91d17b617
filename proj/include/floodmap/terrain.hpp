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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "floodmap/error.hpp"
#include "floodmap/parallel.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

/// Elevation grid in meters with its ground sampling distance.
struct DemGrid {
  Grid grid;
  double cell_size = 1.0;

  DemGrid(Grid g, double cell) : grid(std::move(g)), cell_size(cell) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) fail(Errc::kValue, "cell_size must be positive");
  }
};

/// Slope in degrees using Horn's 3x3 kernel. Neighborhoods at the border
/// replicate edge cells; a NaN anywhere in the window yields NaN.
inline Grid slope_from_dem(const DemGrid& dem, unsigned threads = 1) {
  const Grid& z = dem.grid;
  const std::size_t w = z.width();
  const std::size_t h = z.height();
  if (w < 3 || h < 3) fail(Errc::kShape, "slope needs a DEM of at least 3x3");

  std::vector<float> out(w * h);
  const double scale = 8.0 * dem.cell_size;
  parallel_chunks(h, threads, [&](std::size_t y_begin, std::size_t y_end) {
    for (std::size_t y = y_begin; y < y_end; ++y) {
      const std::size_t yn = y == 0 ? 0 : y - 1;
      const std::size_t ys = y + 1 == h ? y : y + 1;
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t xw = x == 0 ? 0 : x - 1;
        const std::size_t xe = x + 1 == w ? x : x + 1;
        const double a = z.at(xw, yn), b = z.at(x, yn), c = z.at(xe, yn);
        const double d = z.at(xw, y), f = z.at(xe, y);
        const double g = z.at(xw, ys), hh = z.at(x, ys), i = z.at(xe, ys);
        if (std::isnan(a) || std::isnan(b) || std::isnan(c) || std::isnan(d) || std::isnan(z.at(x, y)) ||
            std::isnan(f) || std::isnan(g) || std::isnan(hh) || std::isnan(i)) {
          out[y * w + x] = kNoData;
          continue;
        }
        const double dzdx = ((c + 2.0 * f + i) - (a + 2.0 * d + g)) / scale;
        const double dzdy = ((g + 2.0 * hh + i) - (a + 2.0 * b + c)) / scale;
        const double rad = std::atan(std::sqrt(dzdx * dzdx + dzdy * dzdy));
        out[y * w + x] = static_cast<float>(rad * 180.0 / std::numbers::pi);
      }
    }
  });
  return Grid(w, h, std::move(out));
}

namespace terrain_detail {

/// Exact squared Euclidean distance transform to the set of stream cells
/// (Felzenszwalb & Huttenlocher lower-envelope method, integer distances).
inline std::vector<std::int64_t> squared_distance_to_streams(const Mask& streams) {
  const auto w = static_cast<std::int64_t>(streams.width());
  const auto h = static_cast<std::int64_t>(streams.height());
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  // Column pass: vertical distance to the nearest stream cell in the same column.
  std::vector<std::int64_t> col(static_cast<std::size_t>(w * h), kInf);
  for (std::int64_t x = 0; x < w; ++x) {
    std::int64_t last = -1;
    for (std::int64_t y = 0; y < h; ++y) {
      if (streams.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == kMaskFlood) last = y;
      if (last >= 0) col[static_cast<std::size_t>(y * w + x)] = y - last;
    }
    last = -1;
    for (std::int64_t y = h - 1; y >= 0; --y) {
      if (streams.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == kMaskFlood) last = y;
      if (last >= 0) {
        auto& c = col[static_cast<std::size_t>(y * w + x)];
        c = std::min(c, last - y);
      }
    }
  }

  // Row pass: lower envelope of parabolas (x - q)^2 + g(q)^2.
  std::vector<std::int64_t> dist(static_cast<std::size_t>(w * h), kInf);
  std::vector<std::int64_t> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w) + 1);
  for (std::int64_t y = 0; y < h; ++y) {
    auto f = [&](std::int64_t q) {
      std::int64_t g = col[static_cast<std::size_t>(y * w + q)];
      return g == kInf ? kInf : g * g;
    };
    std::int64_t k = -1;
    for (std::int64_t q = 0; q < w; ++q) {
      if (f(q) == kInf) continue;
      if (k < 0) {
        k = 0;
        v[0] = q;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
        continue;
      }
      double s = 0.0;
      for (;;) {
        const std::int64_t p = v[static_cast<std::size_t>(k)];
        s = static_cast<double>((f(q) + q * q) - (f(p) + p * p)) / static_cast<double>(2 * (q - p));
        if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
          --k;
          continue;
        }
        break;
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) continue;
    std::int64_t j = 0;
    for (std::int64_t x = 0; x < w; ++x) {
      while (z[static_cast<std::size_t>(j) + 1] < static_cast<double>(x)) ++j;
      const std::int64_t q = v[static_cast<std::size_t>(j)];
      std::int64_t best = (x - q) * (x - q) + f(q);
      // Guard the floating envelope boundaries with an exact neighbour check.
      if (j > 0) {
        const std::int64_t p = v[static_cast<std::size_t>(j) - 1];
        best = std::min(best, (x - p) * (x - p) + f(p));
      }
      if (j < k) {
        const std::int64_t p = v[static_cast<std::size_t>(j) + 1];
        best = std::min(best, (x - p) * (x - p) + f(p));
      }
      dist[static_cast<std::size_t>(y * w + x)] = best;
    }
  }
  return dist;
}

inline std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace terrain_detail

/// Simplified height above nearest drainage: elevation above the
/// Euclidean-nearest stream cell, clamped at 0. Equidistant streams are
/// resolved by lowest stream elevation, then row-major position. This is a
/// surrogate for flow-path HAND, used for synthetic scenes.
inline Grid hand_simplified(const DemGrid& dem, const Mask& streams, unsigned threads = 1) {
  const Grid& z = dem.grid;
  if (streams.width() != z.width() || streams.height() != z.height())
    fail(Errc::kShape, "stream mask and DEM dimensions differ");
  if (streams.count(kMaskFlood) == 0) fail(Errc::kEmptyDrainage, "stream mask has no stream cells");

  const auto w = static_cast<std::int64_t>(z.width());
  const auto h = static_cast<std::int64_t>(z.height());
  const auto dist = terrain_detail::squared_distance_to_streams(streams);

  auto is_stream = [&](std::int64_t x, std::int64_t y) {
    return x >= 0 && y >= 0 && x < w && y < h &&
           streams.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == kMaskFlood;
  };

  std::vector<float> out(static_cast<std::size_t>(w * h));
  parallel_chunks(static_cast<std::size_t>(h), threads, [&](std::size_t y_begin, std::size_t y_end) {
    for (auto y = static_cast<std::int64_t>(y_begin); y < static_cast<std::int64_t>(y_end); ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y * w + x);
        if (is_stream(x, y)) {
          out[idx] = 0.0f;
          continue;
        }
        const float elev = z[idx];
        if (std::isnan(elev)) {
          out[idx] = kNoData;
          continue;
        }
        // Enumerate every stream cell at exactly the minimum squared distance.
        const std::int64_t d2 = dist[idx];
        const std::int64_t r = terrain_detail::isqrt(d2);
        bool found = false;
        float best_elev = 0.0f;
        std::int64_t best_pos = 0;
        auto consider = [&](std::int64_t sx, std::int64_t sy) {
          if (!is_stream(sx, sy)) return;
          const float se = z[static_cast<std::size_t>(sy * w + sx)];
          const std::int64_t pos = sy * w + sx;
          // NaN elevations sort last
          auto better = [&] {
            if (!found) return true;
            if (std::isnan(best_elev) != std::isnan(se)) return std::isnan(best_elev);
            if (se != best_elev && !std::isnan(se)) return se < best_elev;
            return pos < best_pos;
          };
          if (better()) {
            found = true;
            best_elev = se;
            best_pos = pos;
          }
        };
        for (std::int64_t dx = -r; dx <= r; ++dx) {
          const std::int64_t rem = d2 - dx * dx;
          const std::int64_t dy = terrain_detail::isqrt(rem);
          if (dy * dy != rem) continue;
          consider(x + dx, y - dy);
          if (dy != 0) consider(x + dx, y + dy);
        }
        if (!found) fail(Errc::kValue, "internal: nearest stream not found");
        if (std::isnan(best_elev)) {
          out[idx] = kNoData;
          continue;
        }
        const double height = static_cast<double>(elev) - static_cast<double>(best_elev);
        out[idx] = static_cast<float>(std::max(0.0, height));
      }
    }
  });
  return Grid(z.width(), z.height(), std::move(out));
}

}  // namespace floodmap
