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

// Procedural test scenes: value-noise terrain, valley-floor streams,
// simplified HAND, slope, a ground-truth flood mask and four spectral bands
// drawn from fixed water/land reflectance profiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "floodmap/dataset.hpp"
#include "floodmap/error.hpp"
#include "floodmap/random.hpp"
#include "floodmap/raster.hpp"
#include "floodmap/terrain.hpp"

namespace floodmap {

struct SynthParams {
  std::uint64_t seed = 0;
  std::size_t size = 512;
  double water_level = 2.0;   // meters of HAND below which a pixel floods
  double noise_sigma = 0.05;  // reflectance units
  int stream_count = 5;       // stream cells: valley floors below this DEM percentile
};

/// Fixed reflectance profiles (Blue, Green, Red, NIR).
struct SpectralProfile {
  std::array<double, 4> mean;
};
inline constexpr SpectralProfile kWaterProfile{{0.10, 0.35, 0.15, 0.05}};
inline constexpr SpectralProfile kLandProfile{{0.12, 0.25, 0.22, 0.45}};

inline constexpr double kSynthCellSize = 3.0;      // meters per pixel
inline constexpr double kSynthRelief = 40.0;       // meters, amplitude of the first octave
inline constexpr int kSynthOctaves = 4;
inline constexpr std::size_t kSynthMinPeriod = 16;  // pixels, coarsest lattice spacing floor

struct SynthScene {
  Raster stack;  // Blue, Green, Red, NIR, Slope, HAND, DEM
  Mask truth;
  Mask streams;
  SynthParams params;
};

namespace synth_detail {

inline double lattice_value(std::uint64_t seed, int octave, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = mix_seed(seed, static_cast<std::uint64_t>(octave));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Sum of value-noise octaves; octave o has period base/2^o and amplitude relief/2^o.
inline std::vector<double> value_noise(std::uint64_t seed, std::size_t size) {
  std::vector<double> z(size * size, 0.0);
  const double base = static_cast<double>(std::max(kSynthMinPeriod, size / 4));
  for (int o = 0; o < kSynthOctaves; ++o) {
    const double period = base / std::ldexp(1.0, o);
    const double amp = kSynthRelief / std::ldexp(1.0, o);
    for (std::size_t y = 0; y < size; ++y) {
      const double gy = static_cast<double>(y) / period;
      const auto iy = static_cast<std::int64_t>(std::floor(gy));
      const double ty = smoothstep(gy - static_cast<double>(iy));
      for (std::size_t x = 0; x < size; ++x) {
        const double gx = static_cast<double>(x) / period;
        const auto ix = static_cast<std::int64_t>(std::floor(gx));
        const double tx = smoothstep(gx - static_cast<double>(ix));
        const double v00 = lattice_value(seed, o, ix, iy);
        const double v10 = lattice_value(seed, o, ix + 1, iy);
        const double v01 = lattice_value(seed, o, ix, iy + 1);
        const double v11 = lattice_value(seed, o, ix + 1, iy + 1);
        const double top = v00 + (v10 - v00) * tx;
        const double bottom = v01 + (v11 - v01) * tx;
        z[y * size + x] += amp * (top + (bottom - top) * ty);
      }
    }
  }
  return z;
}

}  // namespace synth_detail

/// Valley-floor cells (strict minimum across their row or column
/// neighbours) at or below the stream_count-th percentile of the DEM. Falls
/// back to the global minimum when no cell qualifies.
inline Mask derive_streams(const Grid& dem, int stream_count) {
  const std::size_t w = dem.width();
  const std::size_t h = dem.height();
  std::vector<float> sorted(dem.values().begin(), dem.values().end());
  std::sort(sorted.begin(), sorted.end());
  const double p = std::clamp(stream_count / 100.0, 0.0, 1.0);
  const auto rank = static_cast<std::size_t>(std::floor(p * static_cast<double>(sorted.size() - 1)));
  const float cutoff = sorted[rank];

  std::vector<std::uint8_t> m(w * h, kMaskDry);
  bool any = false;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const float z = dem.at(x, y);
      if (z > cutoff) continue;
      const bool row_min = z < dem.at(x - 1, y) && z < dem.at(x + 1, y);
      const bool col_min = z < dem.at(x, y - 1) && z < dem.at(x, y + 1);
      if (row_min || col_min) {
        m[y * w + x] = kMaskFlood;
        any = true;
      }
    }
  }
  if (!any) {
    auto it = std::min_element(dem.values().begin(), dem.values().end());
    m[static_cast<std::size_t>(it - dem.values().begin())] = kMaskFlood;
  }
  return Mask(w, h, std::move(m));
}

inline SynthScene generate_scene(const SynthParams& params, unsigned threads = 1) {
  if (params.size < 64) fail(Errc::kValue, "synthetic scenes need size >= 64");
  if (!(params.noise_sigma >= 0.0) || !std::isfinite(params.noise_sigma))
    fail(Errc::kValue, "noise_sigma must be >= 0");
  if (params.stream_count < 1) fail(Errc::kValue, "stream_count must be >= 1");
  if (!std::isfinite(params.water_level)) fail(Errc::kValue, "water_level must be finite");

  const std::size_t n = params.size;
  const auto z = synth_detail::value_noise(params.seed, n);
  std::vector<float> zf(z.begin(), z.end());
  Grid dem(n, n, std::move(zf));

  Mask streams = derive_streams(dem, params.stream_count);
  const DemGrid dem_grid(dem, kSynthCellSize);
  Grid hand = hand_simplified(dem_grid, streams, threads);
  Grid slope = slope_from_dem(dem_grid, threads);

  std::vector<std::uint8_t> truth(n * n);
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth[i] = static_cast<double>(hand[i]) < params.water_level ? kMaskFlood : kMaskDry;

  std::vector<Grid> spectral;
  for (std::size_t b = 0; b < 4; ++b) {
    Rng rng = make_rng(params.seed, 100 + b);
    std::vector<float> band(n * n);
    for (std::size_t i = 0; i < band.size(); ++i) {
      const double mean = truth[i] == kMaskFlood ? kWaterProfile.mean[b] : kLandProfile.mean[b];
      const double noise = params.noise_sigma > 0.0 ? params.noise_sigma * standard_normal(rng) : 0.0;
      band[i] = static_cast<float>(std::clamp(mean + noise, 0.0, 1.0));
    }
    spectral.emplace_back(n, n, std::move(band));
  }

  const GeoTransform transform{0.0, static_cast<double>(n) * kSynthCellSize, kSynthCellSize, -kSynthCellSize};
  Raster stack({spectral[0], spectral[1], spectral[2], spectral[3], slope, hand, dem},
               {BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR, BandTag::kSlope, BandTag::kHAND,
                BandTag::kDEM},
               transform);
  return {std::move(stack), Mask(n, n, std::move(truth)), std::move(streams), params};
}

struct ExpertTile {
  Raster features;
  Mask label;
  std::size_t x0 = 0;
  std::size_t y0 = 0;
};

/// The tile_size window with the highest flood fraction that still contains
/// both classes; the first such window in row-major offset order wins ties.
inline ExpertTile expert_tile(const SynthScene& scene, std::size_t tile_size = 1024) {
  const std::size_t w = scene.truth.width();
  const std::size_t h = scene.truth.height();
  if (tile_size == 0 || tile_size > w || tile_size > h) fail(Errc::kShape, "expert tile larger than scene");

  // Summed-area table of flood pixels.
  std::vector<std::uint64_t> sat((w + 1) * (h + 1), 0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + sat[(y + 1) * (w + 1) + x] -
                                       sat[y * (w + 1) + x] + (scene.truth.at(x, y) == kMaskFlood ? 1 : 0);
  auto window = [&](std::size_t x0, std::size_t y0) {
    const std::size_t x1 = x0 + tile_size, y1 = y0 + tile_size;
    return sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
  };

  const std::uint64_t area = static_cast<std::uint64_t>(tile_size) * tile_size;
  bool found = false;
  std::uint64_t best = 0;
  std::size_t bx = 0, by = 0;
  for (std::size_t y0 = 0; y0 + tile_size <= h; ++y0) {
    for (std::size_t x0 = 0; x0 + tile_size <= w; ++x0) {
      const std::uint64_t c = window(x0, y0);
      if (c == 0 || c == area) continue;
      if (!found || c > best) {
        found = true;
        best = c;
        bx = x0;
        by = y0;
      }
    }
  }
  if (!found) fail(Errc::kDegenerateScene, "no window contains both flooded and dry pixels");
  return {crop(scene.stack, bx, by, tile_size, tile_size), crop(scene.truth, bx, by, tile_size, tile_size), bx, by};
}

/// Synthetic high-water marks: `count` flooded pixels drawn uniformly
/// (seeded), reported at their pixel-center map coordinates. With a nonzero
/// tile_size only pixels whose centered tile fits inside the scene are drawn;
/// if no flooded pixel qualifies, any fitting pixel is.
inline std::vector<HwmPoint> synth_hwm(const SynthScene& scene, std::size_t count, std::uint64_t seed,
                                       std::size_t tile_size = 0) {
  const std::size_t w = scene.truth.width();
  const std::size_t h = scene.truth.height();
  const std::size_t half = tile_size / 2;
  auto fits = [&](std::size_t x, std::size_t y) {
    return tile_size == 0 || (x >= half && y >= half && x - half + tile_size <= w && y - half + tile_size <= h);
  };
  std::vector<std::size_t> flooded;
  for (std::size_t i = 0; i < scene.truth.size(); ++i)
    if (scene.truth[i] == kMaskFlood && fits(i % w, i / w)) flooded.push_back(i);
  if (flooded.empty())
    for (std::size_t i = 0; i < scene.truth.size(); ++i)
      if (fits(i % w, i / w)) flooded.push_back(i);
  std::vector<HwmPoint> out;
  if (flooded.empty()) return out;
  const GeoTransform& t = *scene.stack.transform();
  Rng rng = make_rng(seed, 0x4A11);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = flooded[uniform_index(rng, flooded.size())];
    const double px = static_cast<double>(i % w) + 0.5;
    const double py = static_cast<double>(i / w) + 0.5;
    char id[32];
    std::snprintf(id, sizeof id, "hwm%03zu", k);
    out.push_back({id, t.origin_x + px * t.pixel_size_x, t.origin_y + py * t.pixel_size_y});
  }
  return out;
}

}  // namespace floodmap
