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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodmap/error.hpp"
#include "floodmap/fgrid.hpp"
#include "floodmap/random.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

// ---------------------------------------------------------------------------
// High-water marks
// ---------------------------------------------------------------------------

struct HwmPoint {
  std::string id;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const HwmPoint&, const HwmPoint&) = default;
};

namespace dataset_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace dataset_detail

/// Parses a UTF-8 CSV with header `id,x,y`. Line numbers in errors are 1-based
/// and count the header.
inline std::vector<HwmPoint> parse_hwm_csv(std::string_view text) {
  using namespace dataset_detail;
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<HwmPoint> points;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (!header_seen) {
      auto cols = split_commas(line);
      if (cols.size() != 3 || cols[0] != "id" || cols[1] != "x" || cols[2] != "y")
        fail(Errc::kParse, "line 1: expected header 'id,x,y'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto cols = split_commas(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cols.size() != 3) fail(Errc::kParse, where + ": expected 3 fields, found " + std::to_string(cols.size()));
    if (cols[0].empty()) fail(Errc::kParse, where + ": empty id");
    HwmPoint p;
    p.id = std::string(cols[0]);
    auto parse_number = [&](std::string_view field, const char* name) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        fail(Errc::kParse, where + ": cannot parse " + name + " '" + std::string(field) + "'");
      if (!std::isfinite(v)) fail(Errc::kValue, where + ": non-finite " + name);
      return v;
    };
    p.x = parse_number(cols[1], "x");
    p.y = parse_number(cols[2], "y");
    points.push_back(std::move(p));
  }
  if (!header_seen) fail(Errc::kParse, "line 1: expected header 'id,x,y'");
  return points;
}

inline std::vector<HwmPoint> read_hwm_csv(const fs::path& path) {
  return parse_hwm_csv(fgrid_detail::read_file(path));
}

inline void write_hwm_csv(const std::vector<HwmPoint>& points, const fs::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "id,x,y\n";
  for (const auto& p : points) out << p.id << ',' << p.x << ',' << p.y << '\n';
  fgrid_detail::write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Tile sampling
// ---------------------------------------------------------------------------

struct SampledTile {
  HwmPoint hwm;
  Raster tile;
  std::size_t x0 = 0;
  std::size_t y0 = 0;
};

/// Cuts a tile_size window around each HWM point, placing the point's pixel
/// at tile index floor(tile_size / 2). Points whose window leaves the scene
/// are dropped; input order is preserved and overlapping tiles are all kept.
inline std::vector<SampledTile> sample_tiles(const Raster& scene, const std::vector<HwmPoint>& hwm,
                                             std::size_t tile_size = 1024) {
  if (!scene.transform()) fail(Errc::kMissingGeoreference, "scene raster has no transform");
  if (tile_size == 0 || tile_size > scene.width() || tile_size > scene.height())
    fail(Errc::kShape, "tile size " + std::to_string(tile_size) + " does not fit the scene");
  const GeoTransform& t = *scene.transform();
  const auto half = static_cast<std::int64_t>(tile_size / 2);
  std::vector<SampledTile> tiles;
  for (const auto& p : hwm) {
    const double fx = std::floor((p.x - t.origin_x) / t.pixel_size_x);
    const double fy = std::floor((p.y - t.origin_y) / t.pixel_size_y);
    if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
    const double x0 = fx - static_cast<double>(half);
    const double y0 = fy - static_cast<double>(half);
    if (x0 < 0 || y0 < 0 || x0 + static_cast<double>(tile_size) > static_cast<double>(scene.width()) ||
        y0 + static_cast<double>(tile_size) > static_cast<double>(scene.height()))
      continue;
    const auto ux = static_cast<std::size_t>(x0);
    const auto uy = static_cast<std::size_t>(y0);
    tiles.push_back({p, crop(scene, ux, uy, tile_size, tile_size), ux, uy});
  }
  return tiles;
}

// ---------------------------------------------------------------------------
// Stratified pixel sampling
// ---------------------------------------------------------------------------

/// Draws round(fraction * n_c) pixels without replacement from each class c
/// independently. Nodata is never drawn. Returned indices are ascending.
inline std::vector<std::size_t> stratified_pixel_sample(const Mask& label, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(Errc::kValue, "sample fraction must lie in (0, 1]");
  std::vector<std::size_t> strata[2];
  auto v = label.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != kMaskNoData) strata[v[i]].push_back(i);
  if (strata[0].empty() || strata[1].empty()) fail(Errc::kDegenerateStratum, "mask must contain both classes");

  std::vector<std::size_t> out;
  for (std::uint64_t c = 0; c < 2; ++c) {
    auto& pool = strata[c];
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
    Rng rng = make_rng(seed, 0x57A7 + c);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(uniform_index(rng, pool.size() - k));
      std::swap(pool[k], pool[pick]);
    }
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Crops and manifests
// ---------------------------------------------------------------------------

enum class BandSet { kOptical4, kFull6, kCustom };

inline std::string to_string(BandSet b) {
  switch (b) {
    case BandSet::kOptical4: return "Optical4";
    case BandSet::kFull6: return "Full6";
    case BandSet::kCustom: return "Custom";
  }
  return "Custom";
}

inline BandSet parse_band_set(std::string_view s) {
  if (s == "Optical4") return BandSet::kOptical4;
  if (s == "Full6") return BandSet::kFull6;
  if (s == "Custom") return BandSet::kCustom;
  fail(Errc::kConfig, "unknown band set '" + std::string(s) + "' (expected Optical4 or Full6)");
}

inline std::vector<BandSemantic> band_set_bands(BandSet b) {
  std::vector<BandSemantic> bands{BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR};
  if (b == BandSet::kFull6) {
    bands.emplace_back(BandTag::kSlope);
    bands.emplace_back(BandTag::kHAND);
  }
  if (b == BandSet::kCustom) fail(Errc::kConfig, "custom band sets have no fixed band list");
  return bands;
}

struct Crop {
  Raster features;
  Mask label;
  std::string source_tile;
  std::size_t x0 = 0;
  std::size_t y0 = 0;

  std::string id() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_x%05zu_y%05zu", x0, y0);
    return source_tile + buf;
  }
};

/// Regular grid of crop windows at offsets 0, stride, 2*stride, ... that fit
/// entirely inside the tile, emitted row-major. Crops whose label is at least
/// 95% nodata are dropped.
inline std::vector<Crop> make_crops(const Raster& tile_features, const Mask& tile_label, std::size_t crop_size = 128,
                                    std::size_t stride = 128, const std::string& source_tile = "tile") {
  if (crop_size == 0 || stride == 0) fail(Errc::kValue, "crop size and stride must be positive");
  if (tile_label.width() != tile_features.width() || tile_label.height() != tile_features.height())
    fail(Errc::kShape, "tile features and label differ in size");
  if (tile_features.width() < crop_size || tile_features.height() < crop_size)
    fail(Errc::kShape, "tile smaller than crop size " + std::to_string(crop_size));
  std::vector<Crop> crops;
  const std::size_t pixels = crop_size * crop_size;
  for (std::size_t y = 0; y + crop_size <= tile_features.height(); y += stride) {
    for (std::size_t x = 0; x + crop_size <= tile_features.width(); x += stride) {
      Mask label = crop(tile_label, x, y, crop_size, crop_size);
      if (label.count(kMaskNoData) * 100 >= pixels * 95) continue;
      crops.push_back({crop(tile_features, x, y, crop_size, crop_size), std::move(label), source_tile, x, y});
    }
  }
  return crops;
}

enum class SplitMode { kRandom, kSpatial };

struct DatasetManifest {
  std::size_t crop_size = 128;
  BandSet band_set = BandSet::kFull6;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  SplitMode split = SplitMode::kRandom;
  double test_fraction = 0.0;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline BandSet infer_band_set(const Raster& r) {
  auto matches = [&](BandSet b) { return r.semantics() == band_set_bands(b); };
  if (matches(BandSet::kOptical4)) return BandSet::kOptical4;
  if (matches(BandSet::kFull6)) return BandSet::kFull6;
  return BandSet::kCustom;
}

/// Random permutation by seed; the last round(n * test_fraction) entries are
/// the test split. kSpatial permutes source tiles instead of crops, so no
/// tile contributes to both splits.
inline DatasetManifest split_train_test(const std::vector<Crop>& crops, double test_fraction, std::uint64_t seed,
                                        SplitMode mode = SplitMode::kRandom) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(Errc::kValue, "test fraction must lie in (0, 1)");
  if (crops.size() < 2) fail(Errc::kShape, "need at least two crops to split");

  DatasetManifest m;
  m.crop_size = crops.front().label.width();
  m.band_set = infer_band_set(crops.front().features);
  m.seed = seed;
  m.split = mode;
  m.test_fraction = test_fraction;

  auto permute = [&](std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = make_rng(seed, 0x5B117);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    return perm;
  };

  if (mode == SplitMode::kRandom) {
    const auto perm = permute(crops.size());
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(crops.size())));
    for (std::size_t k = 0; k < perm.size(); ++k)
      (k + n_test >= perm.size() ? m.test_ids : m.train_ids).push_back(crops[perm[k]].id());
  } else {
    std::vector<std::string> tiles;
    for (const auto& c : crops)
      if (std::find(tiles.begin(), tiles.end(), c.source_tile) == tiles.end()) tiles.push_back(c.source_tile);
    if (tiles.size() < 2) fail(Errc::kShape, "spatial split needs crops from at least two tiles");
    const auto perm = permute(tiles.size());
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(tiles.size())));
    std::set<std::string> test_tiles;
    for (std::size_t k = perm.size() - n_test; k < perm.size(); ++k) test_tiles.insert(tiles[perm[k]]);
    for (const auto& c : crops) (test_tiles.count(c.source_tile) ? m.test_ids : m.train_ids).push_back(c.id());
  }
  m.n_train = m.train_ids.size();
  m.n_test = m.test_ids.size();
  return m;
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["crop_size"] = m.crop_size;
  j["band_set"] = to_string(m.band_set);
  j["train_ids"] = m.train_ids;
  j["test_ids"] = m.test_ids;
  j["seed"] = m.seed;
  j["counts"] = {{"n_train", m.n_train}, {"n_test", m.n_test}};
  j["split"] = m.split == SplitMode::kRandom ? "random" : "spatial";
  j["test_fraction"] = m.test_fraction;
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    DatasetManifest m;
    m.crop_size = j.at("crop_size").get<std::size_t>();
    m.band_set = parse_band_set(j.at("band_set").get<std::string>());
    m.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    m.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_train = j.at("counts").at("n_train").get<std::size_t>();
    m.n_test = j.at("counts").at("n_test").get<std::size_t>();
    m.split = j.value("split", std::string("random")) == "spatial" ? SplitMode::kSpatial : SplitMode::kRandom;
    m.test_fraction = j.value("test_fraction", 0.0);
    if (m.n_train != m.train_ids.size() || m.n_test != m.test_ids.size())
      fail(Errc::kFormat, "manifest counts disagree with id lists");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, std::string("bad manifest: ") + e.what());
  }
}

/// Writes `<id>_x` feature and `<id>_y` label FGRID pairs for every crop the
/// manifest names, then `manifest.json` last.
inline void export_dataset(const std::vector<Crop>& crops, const DatasetManifest& manifest, const fs::path& dir) {
  std::map<std::string, const Crop*> by_id;
  for (const auto& c : crops)
    if (!by_id.emplace(c.id(), &c).second) fail(Errc::kDuplicateId, "crop id " + c.id() + " occurs twice");

  std::set<std::string> seen;
  std::vector<const Crop*> selected;
  for (const auto* ids : {&manifest.train_ids, &manifest.test_ids}) {
    for (const auto& id : *ids) {
      if (!seen.insert(id).second) fail(Errc::kDuplicateId, "manifest lists " + id + " more than once");
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(Errc::kMissingId, "manifest references unknown crop " + id);
      selected.push_back(it->second);
    }
  }
  if (manifest.n_train != manifest.train_ids.size() || manifest.n_test != manifest.test_ids.size())
    fail(Errc::kValue, "manifest counts disagree with id lists");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::kIo, "cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json crop_meta = nlohmann::json::object();
  for (const Crop* c : selected) {
    write_grid_file(c->features, dir / (c->id() + "_x"));
    write_mask_file(c->label, dir / (c->id() + "_y"), c->features.transform());
    crop_meta[c->id()] = {{"source_tile", c->source_tile}, {"offset", {c->x0, c->y0}}};
  }
  nlohmann::json j = to_json(manifest);
  j["crops"] = crop_meta;
  fgrid_detail::write_file(dir / "manifest.json", j.dump(2) + "\n");
}

struct ImportedDataset {
  DatasetManifest manifest;
  std::vector<Crop> crops;  // train ids first, then test ids
};

inline ImportedDataset import_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) fail(Errc::kIo, "no manifest.json in " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(fgrid_detail::read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::kFormat, std::string("corrupt manifest: ") + e.what());
  }
  ImportedDataset out;
  out.manifest = manifest_from_json(j);
  const auto meta = j.value("crops", nlohmann::json::object());
  for (const auto* ids : {&out.manifest.train_ids, &out.manifest.test_ids}) {
    for (const auto& id : *ids) {
      Crop c;
      c.features = read_grid_file(dir / (id + "_x"));
      c.label = read_mask_file(dir / (id + "_y"));
      if (meta.contains(id)) {
        c.source_tile = meta[id].at("source_tile").get<std::string>();
        c.x0 = meta[id].at("offset").at(0).get<std::size_t>();
        c.y0 = meta[id].at("offset").at(1).get<std::size_t>();
      }
      out.crops.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace floodmap
