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
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "floodmap/error.hpp"

namespace floodmap {

inline constexpr float kNoData = std::numeric_limits<float>::quiet_NaN();

// ---------------------------------------------------------------------------
// Band semantics
// ---------------------------------------------------------------------------

enum class BandTag { kBlue, kGreen, kRed, kNIR, kSlope, kHAND, kNDWI, kDEM, kLabel, kOther };

/// Role of one band inside a Raster. kOther carries a free-form name; every
/// other tag is unique within a Raster.
struct BandSemantic {
  BandTag tag = BandTag::kOther;
  std::string name;  // only meaningful for kOther

  BandSemantic() = default;
  BandSemantic(BandTag t) : tag(t) {}  // NOLINT(google-explicit-constructor)
  static BandSemantic other(std::string n) {
    BandSemantic s(BandTag::kOther);
    s.name = std::move(n);
    return s;
  }

  friend bool operator==(const BandSemantic& a, const BandSemantic& b) {
    return a.tag == b.tag && (a.tag != BandTag::kOther || a.name == b.name);
  }

  std::string to_string() const {
    switch (tag) {
      case BandTag::kBlue: return "Blue";
      case BandTag::kGreen: return "Green";
      case BandTag::kRed: return "Red";
      case BandTag::kNIR: return "NIR";
      case BandTag::kSlope: return "Slope";
      case BandTag::kHAND: return "HAND";
      case BandTag::kNDWI: return "NDWI";
      case BandTag::kDEM: return "DEM";
      case BandTag::kLabel: return "Label";
      case BandTag::kOther: return "Other:" + name;
    }
    return "Other:" + name;
  }

  static BandSemantic parse(std::string_view s) {
    static constexpr std::array<std::pair<std::string_view, BandTag>, 9> kNames{{
        {"Blue", BandTag::kBlue},
        {"Green", BandTag::kGreen},
        {"Red", BandTag::kRed},
        {"NIR", BandTag::kNIR},
        {"Slope", BandTag::kSlope},
        {"HAND", BandTag::kHAND},
        {"NDWI", BandTag::kNDWI},
        {"DEM", BandTag::kDEM},
        {"Label", BandTag::kLabel},
    }};
    for (const auto& [text, tag] : kNames)
      if (s == text) return BandSemantic(tag);
    if (s.starts_with("Other:")) return other(std::string(s.substr(6)));
    fail(Errc::kSemantics, "unknown band semantic '" + std::string(s) + "'");
  }
};

/// The canonical 7-band feature stack order.
inline const std::vector<BandSemantic>& canonical_feature_bands() {
  static const std::vector<BandSemantic> kBands{BandTag::kBlue,  BandTag::kGreen, BandTag::kRed,
                                                BandTag::kNIR,   BandTag::kSlope, BandTag::kHAND,
                                                BandTag::kNDWI};
  return kBands;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Single-band, row-major, top-left origin float grid. NaN is nodata.
class Grid {
 public:
  Grid() = default;

  Grid(std::size_t width, std::size_t height, float fill = 0.0f)
      : width_(width), height_(height), values_(width * height, fill) {
    check_dims();
    check_value(fill);
  }

  Grid(std::size_t width, std::size_t height, std::vector<float> values)
      : width_(width), height_(height), values_(std::move(values)) {
    check_dims();
    if (values_.size() != width_ * height_)
      fail(Errc::kSizeMismatch, "grid expects " + std::to_string(width_ * height_) + " values, got " +
                                    std::to_string(values_.size()));
    for (float v : values_) check_value(v);
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  float at(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }
  float& at(std::size_t x, std::size_t y) noexcept { return values_[y * width_ + x]; }
  float operator[](std::size_t i) const noexcept { return values_[i]; }
  float& operator[](std::size_t i) noexcept { return values_[i]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void check_dims() const {
    if (width_ == 0 || height_ == 0) fail(Errc::kShape, "grid dimensions must be positive");
  }
  static void check_value(float v) {
    if (std::isinf(v)) fail(Errc::kValue, "grid values must be finite or NaN");
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> values_;
};

/// Bitwise equality (NaN == NaN), which is what roundtrip checks need.
inline bool bitwise_equal(const Grid& a, const Grid& b) {
  if (a.width() != b.width() || a.height() != b.height()) return false;
  auto av = a.values();
  auto bv = b.values();
  return std::equal(av.begin(), av.end(), bv.begin(), [](float x, float y) {
    return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
  });
}

// ---------------------------------------------------------------------------
// Mask
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kMaskDry = 0;
inline constexpr std::uint8_t kMaskFlood = 1;
inline constexpr std::uint8_t kMaskNoData = 255;

/// Binary flood mask: 0 non-flood, 1 flood, 255 nodata.
class Mask {
 public:
  Mask() = default;

  Mask(std::size_t width, std::size_t height, std::uint8_t fill = kMaskDry)
      : width_(width), height_(height), values_(width * height, fill) {
    if (width_ == 0 || height_ == 0) fail(Errc::kShape, "mask dimensions must be positive");
    check_value(fill);
  }

  Mask(std::size_t width, std::size_t height, std::vector<std::uint8_t> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width_ == 0 || height_ == 0) fail(Errc::kShape, "mask dimensions must be positive");
    if (values_.size() != width_ * height_)
      fail(Errc::kSizeMismatch, "mask expects " + std::to_string(width_ * height_) + " values, got " +
                                    std::to_string(values_.size()));
    for (auto v : values_) check_value(v);
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::uint8_t at(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }
  std::uint8_t operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Checked store; only 0, 1 and 255 are accepted.
  void set(std::size_t i, std::uint8_t v) {
    check_value(v);
    values_[i] = v;
  }
  void set(std::size_t x, std::size_t y, std::uint8_t v) { set(y * width_ + x, v); }

  std::span<const std::uint8_t> values() const noexcept { return values_; }

  std::size_t count(std::uint8_t v) const { return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), v)); }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  static void check_value(std::uint8_t v) {
    if (v != kMaskDry && v != kMaskFlood && v != kMaskNoData)
      fail(Errc::kValue, "mask values must be 0, 1 or 255 (got " + std::to_string(v) + ")");
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> values_;
};

// ---------------------------------------------------------------------------
// Raster
// ---------------------------------------------------------------------------

/// North-up affine placement: map = origin + (pixel index) * pixel_size,
/// measured at the top-left corner of a pixel.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size_x = 1.0;
  double pixel_size_y = -1.0;

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

/// Ordered stack of equally sized grids, each tagged with a band semantic.
class Raster {
 public:
  Raster() = default;

  Raster(std::vector<Grid> grids, std::vector<BandSemantic> semantics,
         std::optional<GeoTransform> transform = std::nullopt)
      : grids_(std::move(grids)), semantics_(std::move(semantics)), transform_(transform) {
    if (grids_.empty()) fail(Errc::kShape, "raster needs at least one band");
    if (grids_.size() != semantics_.size())
      fail(Errc::kShape, "raster has " + std::to_string(grids_.size()) + " grids but " +
                             std::to_string(semantics_.size()) + " semantics");
    for (const auto& g : grids_)
      if (g.width() != grids_[0].width() || g.height() != grids_[0].height())
        fail(Errc::kShape, "all raster bands must share dimensions");
    for (std::size_t i = 0; i < semantics_.size(); ++i)
      for (std::size_t j = i + 1; j < semantics_.size(); ++j)
        if (semantics_[i].tag != BandTag::kOther && semantics_[i] == semantics_[j])
          fail(Errc::kSemantics, "duplicate band semantic " + semantics_[i].to_string());
  }

  std::size_t width() const noexcept { return grids_.empty() ? 0 : grids_[0].width(); }
  std::size_t height() const noexcept { return grids_.empty() ? 0 : grids_[0].height(); }
  std::size_t band_count() const noexcept { return grids_.size(); }

  const Grid& band(std::size_t i) const { return grids_.at(i); }
  const std::vector<Grid>& bands() const noexcept { return grids_; }
  const std::vector<BandSemantic>& semantics() const noexcept { return semantics_; }
  const std::optional<GeoTransform>& transform() const noexcept { return transform_; }

  std::optional<std::size_t> find(const BandSemantic& s) const {
    for (std::size_t i = 0; i < semantics_.size(); ++i)
      if (semantics_[i] == s) return i;
    return std::nullopt;
  }

  /// Band with the given semantic; semantics error naming it if absent.
  const Grid& band(const BandSemantic& s) const {
    auto i = find(s);
    if (!i) fail(Errc::kSemantics, "raster has no " + s.to_string() + " band");
    return grids_[*i];
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::vector<Grid> grids_;
  std::vector<BandSemantic> semantics_;
  std::optional<GeoTransform> transform_;
};

inline bool bitwise_equal(const Raster& a, const Raster& b) {
  if (a.band_count() != b.band_count() || a.semantics() != b.semantics() || a.transform() != b.transform())
    return false;
  for (std::size_t i = 0; i < a.band_count(); ++i)
    if (!bitwise_equal(a.band(i), b.band(i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace detail {
inline void check_window(std::size_t width, std::size_t height, std::size_t x0, std::size_t y0, std::size_t w,
                         std::size_t h) {
  if (w == 0 || h == 0) fail(Errc::kShape, "crop window must be non-empty");
  if (x0 > width || y0 > height || w > width - x0 || h > height - y0)
    fail(Errc::kOutOfBounds, "window (" + std::to_string(x0) + "," + std::to_string(y0) + ") " +
                                 std::to_string(w) + "x" + std::to_string(h) + " exceeds " +
                                 std::to_string(width) + "x" + std::to_string(height));
}
}  // namespace detail

inline Grid crop(const Grid& grid, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  detail::check_window(grid.width(), grid.height(), x0, y0, w, h);
  std::vector<float> out(w * h);
  auto src = grid.values();
  for (std::size_t j = 0; j < h; ++j) {
    auto row = src.subspan((y0 + j) * grid.width() + x0, w);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(j * w));
  }
  return Grid(w, h, std::move(out));
}

inline Mask crop(const Mask& mask, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  detail::check_window(mask.width(), mask.height(), x0, y0, w, h);
  std::vector<std::uint8_t> out(w * h);
  auto src = mask.values();
  for (std::size_t j = 0; j < h; ++j) {
    auto row = src.subspan((y0 + j) * mask.width() + x0, w);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(j * w));
  }
  return Mask(w, h, std::move(out));
}

/// Extracts a window from every band. No clamping: windows must fit.
inline Raster crop(const Raster& raster, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  detail::check_window(raster.width(), raster.height(), x0, y0, w, h);
  std::vector<Grid> grids;
  grids.reserve(raster.band_count());
  for (const auto& g : raster.bands()) grids.push_back(crop(g, x0, y0, w, h));
  std::optional<GeoTransform> t = raster.transform();
  if (t) {
    t->origin_x += static_cast<double>(x0) * t->pixel_size_x;
    t->origin_y += static_cast<double>(y0) * t->pixel_size_y;
  }
  return Raster(std::move(grids), raster.semantics(), t);
}

/// Bilinear resampling. Output pixel centers are spread linearly over the
/// source pixel-center span, so the first and last centers of each axis
/// coincide with the source border centers; a single output sample sits at
/// the source midpoint. A NaN contributor with non-zero weight poisons the
/// output pixel.
inline Grid resample_bilinear(const Grid& grid, std::size_t target_w, std::size_t target_h) {
  if (grid.empty()) fail(Errc::kShape, "cannot resample an empty grid");
  if (target_w == 0 || target_h == 0) fail(Errc::kShape, "target dimensions must be positive");

  const std::size_t sw = grid.width();
  const std::size_t sh = grid.height();

  // Source coordinate -> (lower index, fraction) per output column/row.
  auto axis = [](std::size_t src, std::size_t dst) {
    std::vector<std::pair<std::size_t, double>> map(dst);
    for (std::size_t o = 0; o < dst; ++o) {
      double s = dst == 1 ? 0.5 * static_cast<double>(src - 1)
                          : static_cast<double>(o) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      auto lo = static_cast<std::size_t>(std::floor(s));
      if (lo + 1 >= src) lo = src >= 2 ? src - 2 : 0;
      double frac = src >= 2 ? s - static_cast<double>(lo) : 0.0;
      map[o] = {lo, frac};
    }
    return map;
  };
  const auto xs = axis(sw, target_w);
  const auto ys = axis(sh, target_h);

  std::vector<float> out(target_w * target_h);
  for (std::size_t oy = 0; oy < target_h; ++oy) {
    const auto [y0, fy] = ys[oy];
    const std::size_t y1 = std::min(y0 + 1, sh - 1);
    for (std::size_t ox = 0; ox < target_w; ++ox) {
      const auto [x0, fx] = xs[ox];
      const std::size_t x1 = std::min(x0 + 1, sw - 1);
      const double w00 = (1.0 - fx) * (1.0 - fy);
      const double w10 = fx * (1.0 - fy);
      const double w01 = (1.0 - fx) * fy;
      const double w11 = fx * fy;
      double acc = 0.0;
      bool nodata = false;
      auto add = [&](std::size_t x, std::size_t y, double w) {
        if (w == 0.0) return;
        float v = grid.at(x, y);
        if (std::isnan(v)) nodata = true;
        acc += w * static_cast<double>(v);
      };
      add(x0, y0, w00);
      add(x1, y0, w10);
      add(x0, y1, w01);
      add(x1, y1, w11);
      out[oy * target_w + ox] = nodata ? kNoData : static_cast<float>(acc);
    }
  }
  return Grid(target_w, target_h, std::move(out));
}

/// Builds a Raster from (grid, semantic) pairs in the given order.
inline Raster stack(std::vector<std::pair<Grid, BandSemantic>> inputs,
                    std::optional<GeoTransform> transform = std::nullopt) {
  if (inputs.empty()) fail(Errc::kShape, "stack needs at least one grid");
  std::vector<Grid> grids;
  std::vector<BandSemantic> semantics;
  for (auto& [g, s] : inputs) {
    if (g.width() != inputs[0].first.width() || g.height() != inputs[0].first.height())
      fail(Errc::kShape, "cannot stack " + std::to_string(g.width()) + "x" + std::to_string(g.height()) +
                             " with " + std::to_string(inputs[0].first.width()) + "x" +
                             std::to_string(inputs[0].first.height()));
    grids.push_back(std::move(g));
    semantics.push_back(std::move(s));
  }
  return Raster(std::move(grids), std::move(semantics), transform);
}

/// Selects bands by semantic, in the requested order.
inline Raster select_bands(const Raster& raster, const std::vector<BandSemantic>& wanted) {
  std::vector<Grid> grids;
  for (const auto& s : wanted) grids.push_back(raster.band(s));
  return Raster(std::move(grids), wanted, raster.transform());
}

}  // namespace floodmap
