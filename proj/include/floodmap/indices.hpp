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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "floodmap/error.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

struct NdwiParams {
  double epsilon = 1e-8;
};

/// Normalized difference water index (G - N) / (G + N + eps) on reflectances.
inline Grid ndwi(const Grid& green, const Grid& nir, NdwiParams params = {}) {
  if (!(params.epsilon > 0.0)) fail(Errc::kValue, "NDWI epsilon must be positive");
  if (green.width() != nir.width() || green.height() != nir.height())
    fail(Errc::kShape, "green and NIR grids differ in size");
  std::vector<float> out(green.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = green[i];
    const double n = nir[i];
    if (std::isnan(g) || std::isnan(n)) {
      out[i] = kNoData;
      continue;
    }
    out[i] = static_cast<float>((g - n) / (g + n + params.epsilon));
  }
  return Grid(green.width(), green.height(), std::move(out));
}

inline constexpr std::size_t kOtsuBins = 256;

struct OtsuResult {
  double threshold = 0.0;
  double between_class_variance = 0.0;
  std::array<std::uint64_t, kOtsuBins> histogram{};
  double min = 0.0;  // bin_edges: finite range the histogram spans
  double max = 0.0;
};

/// 256-bin histogram over [min, max] of the finite values. Bin b covers
/// [min + b*w, min + (b+1)*w) with the maximum folded into the last bin.
inline std::array<std::uint64_t, kOtsuBins> otsu_histogram(const Grid& values, double lo, double hi) {
  std::array<std::uint64_t, kOtsuBins> hist{};
  const double span = hi - lo;
  for (float v : values.values()) {
    if (std::isnan(v)) continue;
    auto b = static_cast<std::size_t>(std::floor((static_cast<double>(v) - lo) / span * kOtsuBins));
    hist[std::min(b, kOtsuBins - 1)]++;
  }
  return hist;
}

/// w0 * w1 * (mu0 - mu1)^2 in bin units, from class counts and bin-index sums.
inline double otsu_between_class_variance(std::uint64_t n0, std::uint64_t s0, std::uint64_t total_n,
                                          std::uint64_t total_s) {
  const std::uint64_t n1 = total_n - n0;
  if (n0 == 0 || n1 == 0) return 0.0;
  const double w0 = static_cast<double>(n0) / static_cast<double>(total_n);
  const double w1 = static_cast<double>(n1) / static_cast<double>(total_n);
  const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
  const double mu1 = static_cast<double>(total_s - s0) / static_cast<double>(n1);
  return w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
}

/// Otsu's method. Candidate thresholds are the bin edges min + k*w for
/// k = 1..256; class 0 holds bins [0, k). Class means use bin positions.
/// The first (smallest) maximiser wins.
inline OtsuResult otsu_threshold(const Grid& values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t finite = 0;
  for (float v : values.values()) {
    if (std::isnan(v)) continue;
    ++finite;
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  if (finite < 2 || !(hi > lo)) fail(Errc::kDegenerateInput, "Otsu needs at least two distinct finite values");

  OtsuResult r;
  r.min = lo;
  r.max = hi;
  r.histogram = otsu_histogram(values, lo, hi);
  const double bin_width = (hi - lo) / kOtsuBins;

  std::uint64_t total_n = 0;
  std::uint64_t total_s = 0;
  for (std::size_t b = 0; b < kOtsuBins; ++b) {
    total_n += r.histogram[b];
    total_s += r.histogram[b] * b;
  }

  // |a| <= 255 * n0 * n1, so a^2 stays inside 128 bits up to this count.
  if (total_n > 400'000'000) fail(Errc::kValue, "Otsu input has too many finite values");

  // sigma_b^2 = (s0*N - S*n0)^2 / (N^2 * n0 * n1); candidates are compared
  // exactly as a^2/(n0*n1) split into quotient and remainder.
  using i128 = __int128;
  struct Key {
    i128 q = -1, r = 0, d = 1;
    bool greater_than(const Key& o) const { return q != o.q ? q > o.q : r * o.d > o.r * d; }
  };
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  Key best;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= kOtsuBins; ++k) {
    n0 += r.histogram[k - 1];
    s0 += r.histogram[k - 1] * (k - 1);
    const std::uint64_t n1 = total_n - n0;
    Key key{0, 0, 1};
    if (n0 != 0 && n1 != 0) {
      const i128 a = static_cast<i128>(s0) * total_n - static_cast<i128>(total_s) * n0;
      const i128 d = static_cast<i128>(n0) * n1;
      key = {a * a / d, a * a % d, d};
    }
    if (key.greater_than(best)) {
      best = key;
      best_k = k;
    }
  }
  std::uint64_t best_n0 = 0;
  std::uint64_t best_s0 = 0;
  for (std::size_t b = 0; b < best_k; ++b) {
    best_n0 += r.histogram[b];
    best_s0 += r.histogram[b] * b;
  }
  r.threshold = best_k == kOtsuBins ? hi : lo + static_cast<double>(best_k) * bin_width;
  r.between_class_variance =
      otsu_between_class_variance(best_n0, best_s0, total_n, total_s) * bin_width * bin_width;
  return r;
}

enum class ThresholdDirection { kAboveIsFlood, kBelowIsFlood };

/// Strict comparison against the threshold; NaN maps to nodata.
inline Mask apply_threshold(const Grid& values, double threshold, ThresholdDirection direction) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = values[i];
    if (std::isnan(v)) {
      out[i] = kMaskNoData;
      continue;
    }
    const bool flood = direction == ThresholdDirection::kAboveIsFlood ? static_cast<double>(v) > threshold
                                                                       : static_cast<double>(v) < threshold;
    out[i] = flood ? kMaskFlood : kMaskDry;
  }
  return Mask(values.width(), values.height(), std::move(out));
}

}  // namespace floodmap
