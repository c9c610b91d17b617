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

// FGRID on-disk format: `<name>.json` header plus `<name>.bin` payload.
//
//   {"width": W, "height": H, "bands": ["Blue", ...], "dtype": "f32" | "u8",
//    "nodata": "nan" | 255, "transform": [x0, y0, dx, dy] | null}
//
// f32 payloads are band-sequential, row-major, little-endian IEEE-754.
// u8 payloads (masks) are raw bytes in {0, 1, 255}.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodmap/error.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

namespace fs = std::filesystem;

namespace fgrid_detail {

/// Accepts `name`, `name.json` or `name.bin` and returns the shared stem path.
inline fs::path stem_path(const fs::path& path) {
  auto ext = path.extension();
  if (ext == ".json" || ext == ".bin") {
    fs::path p = path;
    p.replace_extension();
    return p;
  }
  return path;
}

inline fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::kIo, "failed reading " + path.string());
  return data;
}

inline void write_file(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(Errc::kIo, "failed writing " + path.string());
}

struct Header {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<BandSemantic> bands;
  std::string dtype;
  std::optional<GeoTransform> transform;
};

inline nlohmann::json header_json(std::size_t width, std::size_t height, const std::vector<BandSemantic>& bands,
                                  bool is_mask, const std::optional<GeoTransform>& t) {
  nlohmann::json j;
  j["width"] = width;
  j["height"] = height;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : bands) j["bands"].push_back(b.to_string());
  j["dtype"] = is_mask ? "u8" : "f32";
  if (is_mask)
    j["nodata"] = 255;
  else
    j["nodata"] = "nan";
  if (t)
    j["transform"] = {t->origin_x, t->origin_y, t->pixel_size_x, t->pixel_size_y};
  else
    j["transform"] = nullptr;
  return j;
}

inline Header parse_header(const fs::path& json_path) {
  if (!fs::exists(json_path)) fail(Errc::kFormat, "missing header " + json_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(json_path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::kFormat, "corrupt header " + json_path.string() + ": " + e.what());
  }
  Header h;
  try {
    if (!j.is_object()) fail(Errc::kFormat, "header is not an object");
    h.dtype = j.at("dtype").get<std::string>();
    if (h.dtype != "f32" && h.dtype != "u8") fail(Errc::kUnsupportedFormat, "dtype '" + h.dtype + "'");
    auto w = j.at("width").get<std::int64_t>();
    auto hh = j.at("height").get<std::int64_t>();
    if (w <= 0 || hh <= 0) fail(Errc::kFormat, "non-positive dimensions in " + json_path.string());
    h.width = static_cast<std::size_t>(w);
    h.height = static_cast<std::size_t>(hh);
    for (const auto& b : j.at("bands")) h.bands.push_back(BandSemantic::parse(b.get<std::string>()));
    if (h.bands.empty()) fail(Errc::kFormat, "header lists no bands");
    if (j.contains("transform") && !j["transform"].is_null()) {
      const auto& t = j["transform"];
      if (!t.is_array() || t.size() != 4) fail(Errc::kFormat, "transform must hold 4 numbers");
      h.transform = GeoTransform{t[0].get<double>(), t[1].get<double>(), t[2].get<double>(), t[3].get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, "bad header " + json_path.string() + ": " + e.what());
  }
  return h;
}

inline std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace fgrid_detail

/// Header-only view of an FGRID file (dimensions, bands, dtype).
inline fgrid_detail::Header read_fgrid_header(const fs::path& path) {
  return fgrid_detail::parse_header(fgrid_detail::with_ext(fgrid_detail::stem_path(path), ".json"));
}

inline void write_grid_file(const Raster& raster, const fs::path& path) {
  using namespace fgrid_detail;
  const fs::path stem = stem_path(path);
  const std::size_t n = raster.width() * raster.height();
  std::string payload(n * raster.band_count() * 4, '\0');
  char* dst = payload.data();
  for (const auto& g : raster.bands()) {
    for (float v : g.values()) {
      std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(v));
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
  auto header = header_json(raster.width(), raster.height(), raster.semantics(), false, raster.transform());
  write_file(with_ext(stem, ".bin"), payload);
  write_file(with_ext(stem, ".json"), header.dump(2) + "\n");
}

inline Raster read_grid_file(const fs::path& path) {
  using namespace fgrid_detail;
  const fs::path stem = stem_path(path);
  Header h = parse_header(with_ext(stem, ".json"));
  if (h.dtype != "f32") fail(Errc::kUnsupportedFormat, "expected f32 raster, found dtype " + h.dtype);
  const fs::path bin = with_ext(stem, ".bin");
  if (!fs::exists(bin)) fail(Errc::kFormat, "missing payload " + bin.string());
  std::string payload = read_file(bin);
  const std::size_t n = h.width * h.height;
  const std::size_t expected = n * h.bands.size() * 4;
  if (payload.size() != expected)
    fail(Errc::kSizeMismatch, bin.string() + " holds " + std::to_string(payload.size()) + " bytes, header implies " +
                                  std::to_string(expected));
  std::vector<Grid> grids;
  const char* src = payload.data();
  for (std::size_t b = 0; b < h.bands.size(); ++b) {
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, src, 4);
      src += 4;
      float v = std::bit_cast<float>(to_little(bits));
      if (std::isinf(v)) fail(Errc::kFormat, "infinite value in " + bin.string());
      values[i] = v;
    }
    grids.emplace_back(h.width, h.height, std::move(values));
  }
  return Raster(std::move(grids), std::move(h.bands), h.transform);
}

inline void write_mask_file(const Mask& mask, const fs::path& path,
                            const std::optional<GeoTransform>& transform = std::nullopt) {
  using namespace fgrid_detail;
  const fs::path stem = stem_path(path);
  auto v = mask.values();
  std::string payload(reinterpret_cast<const char*>(v.data()), v.size());
  auto header = header_json(mask.width(), mask.height(), {BandTag::kLabel}, true, transform);
  write_file(with_ext(stem, ".bin"), payload);
  write_file(with_ext(stem, ".json"), header.dump(2) + "\n");
}

inline Mask read_mask_file(const fs::path& path) {
  using namespace fgrid_detail;
  const fs::path stem = stem_path(path);
  Header h = parse_header(with_ext(stem, ".json"));
  if (h.dtype != "u8") fail(Errc::kUnsupportedFormat, "expected u8 mask, found dtype " + h.dtype);
  if (h.bands.size() != 1) fail(Errc::kFormat, "mask must have exactly one band");
  const fs::path bin = with_ext(stem, ".bin");
  if (!fs::exists(bin)) fail(Errc::kFormat, "missing payload " + bin.string());
  std::string payload = read_file(bin);
  if (payload.size() != h.width * h.height)
    fail(Errc::kSizeMismatch, bin.string() + " holds " + std::to_string(payload.size()) + " bytes, header implies " +
                                  std::to_string(h.width * h.height));
  std::vector<std::uint8_t> values(payload.begin(), payload.end());
  try {
    return Mask(h.width, h.height, std::move(values));
  } catch (const Error& e) {
    fail(Errc::kFormat, bin.string() + ": " + e.what());
  }
}

}  // namespace floodmap
