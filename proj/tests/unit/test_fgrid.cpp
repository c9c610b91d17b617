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

#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "floodmap/fgrid.hpp"
#include "support.hpp"

using namespace floodmap;
using testing_support::read_bytes;
using testing_support::TempDir;

namespace {

void write_raw(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kValue;
}

}  // namespace

TEST(Fgrid, RoundTripRandomThreeBand) {
  TempDir tmp("fgrid_rt");
  std::mt19937_64 rng(1);
  Raster r({testing_support::random_grid(rng, 17, 9, -1e6, 1e6), testing_support::random_grid(rng, 17, 9),
            testing_support::random_grid(rng, 17, 9, 0, 1, 0.3)},
           {BandTag::kRed, BandSemantic::other("aux"), BandTag::kNDWI}, GeoTransform{500000.5, 4e6, 3, -3});
  write_grid_file(r, tmp / "r");
  const Raster back = read_grid_file(tmp / "r");
  EXPECT_TRUE(bitwise_equal(back, r));
  EXPECT_EQ(back.semantics(), r.semantics());
  EXPECT_EQ(back.transform(), r.transform());
}

TEST(Fgrid, RoundTripPropertyWithNan) {
  TempDir tmp("fgrid_prop");
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t w = 1 + rng() % 12, h = 1 + rng() % 12, bands = 1 + rng() % 4;
    std::vector<Grid> grids;
    std::vector<BandSemantic> sem;
    for (std::size_t b = 0; b < bands; ++b) {
      grids.push_back(testing_support::random_grid(rng, w, h, -50, 50, 0.25));
      sem.push_back(BandSemantic::other("b" + std::to_string(b)));
    }
    std::optional<GeoTransform> t;
    if (trial % 2) t = GeoTransform{1.0 * trial, 2.0, 0.5, -0.5};
    Raster r(std::move(grids), std::move(sem), t);
    write_grid_file(r, tmp / "p");
    EXPECT_TRUE(bitwise_equal(read_grid_file(tmp / "p.json"), r));
  }
}

TEST(Fgrid, HandEncodedLittleEndianPayload) {
  TempDir tmp("fgrid_hand");
  write_raw(tmp / "g.json", R"({"width":2,"height":1,"bands":["DEM"],"dtype":"f32","nodata":"nan","transform":null})");
  // 1.5 = 0x3FC00000, -2.0 = 0xC0000000, least significant byte first
  const unsigned char bytes[] = {0x00, 0x00, 0xC0, 0x3F, 0x00, 0x00, 0x00, 0xC0};
  write_raw(tmp / "g.bin", std::string(reinterpret_cast<const char*>(bytes), sizeof bytes));
  const Raster r = read_grid_file(tmp / "g");
  EXPECT_EQ(r.band(0)[0], 1.5f);
  EXPECT_EQ(r.band(0)[1], -2.0f);
  EXPECT_FALSE(r.transform().has_value());
}

TEST(Fgrid, ShortPayloadIsSizeMismatch) {
  TempDir tmp("fgrid_short");
  write_raw(tmp / "g.json", R"({"width":4,"height":4,"bands":["DEM"],"dtype":"f32","nodata":"nan","transform":null})");
  write_raw(tmp / "g.bin", std::string(15 * 4, '\0'));
  EXPECT_EQ(code_of([&] { read_grid_file(tmp / "g"); }), Errc::kSizeMismatch);
}

TEST(Fgrid, HeaderErrors) {
  TempDir tmp("fgrid_hdr");
  EXPECT_EQ(code_of([&] { read_grid_file(tmp / "missing"); }), Errc::kFormat);
  write_raw(tmp / "bad.json", "{not json");
  EXPECT_EQ(code_of([&] { read_grid_file(tmp / "bad"); }), Errc::kFormat);
  write_raw(tmp / "f64.json", R"({"width":1,"height":1,"bands":["DEM"],"dtype":"f64","nodata":"nan","transform":null})");
  write_raw(tmp / "f64.bin", std::string(8, '\0'));
  EXPECT_EQ(code_of([&] { read_grid_file(tmp / "f64"); }), Errc::kUnsupportedFormat);
}

TEST(Fgrid, ZeroPixelPayloadIsFourZeroBytes) {
  TempDir tmp("fgrid_zero");
  write_grid_file(Raster({Grid(1, 1, 0.0f)}, {BandTag::kDEM}), tmp / "z");
  EXPECT_EQ(read_bytes(tmp / "z.bin"), std::string(4, '\0'));
}

TEST(Fgrid, NanPreserved) {
  TempDir tmp("fgrid_nan");
  write_grid_file(Raster({Grid(2, 1, std::vector<float>{kNoData, 3.0f})}, {BandTag::kHAND}), tmp / "n");
  const Raster r = read_grid_file(tmp / "n");
  EXPECT_TRUE(std::isnan(r.band(0)[0]));
  EXPECT_EQ(r.band(0)[1], 3.0f);
}

TEST(Fgrid, RepeatedWritesAreByteIdentical) {
  TempDir tmp("fgrid_det");
  std::mt19937_64 rng(3);
  Raster r({testing_support::random_grid(rng, 5, 7, 0, 1, 0.1)}, {BandTag::kGreen}, GeoTransform{0, 21, 3, -3});
  write_grid_file(r, tmp / "a");
  write_grid_file(r, tmp / "b");
  EXPECT_EQ(read_bytes(tmp / "a.bin"), read_bytes(tmp / "b.bin"));
  EXPECT_EQ(read_bytes(tmp / "a.json"), read_bytes(tmp / "b.json"));
}

TEST(Fgrid, UnwritablePathIsIoError) {
  TempDir tmp("fgrid_io");
  write_raw(tmp / "file", "x");
  EXPECT_EQ(code_of([&] { write_grid_file(Raster({Grid(1, 1)}, {BandTag::kDEM}), tmp / "file" / "sub" / "g"); }),
            Errc::kIo);
}

TEST(MaskFile, HeaderAndRoundTrip) {
  TempDir tmp("mask_rt");
  std::mt19937_64 rng(4);
  const Mask m = testing_support::random_mask(rng, 13, 6, 0.4, 0.1);
  write_mask_file(m, tmp / "m", GeoTransform{1, 2, 3, -3});
  EXPECT_EQ(read_mask_file(tmp / "m"), m);
  const auto j = nlohmann::json::parse(read_bytes(tmp / "m.json"));
  EXPECT_EQ(j["dtype"], "u8");
  EXPECT_EQ(j["nodata"], 255);
  EXPECT_EQ(j["bands"], nlohmann::json::array({"Label"}));
  EXPECT_EQ(j["width"], 13);
  EXPECT_EQ(j["transform"], nlohmann::json::array({1.0, 2.0, 3.0, -3.0}));
  EXPECT_EQ(read_bytes(tmp / "m.bin").size(), 13u * 6u);
}

TEST(MaskFile, RejectsInvalidBytesAndWrongDtype) {
  TempDir tmp("mask_bad");
  write_raw(tmp / "m.json", R"({"width":2,"height":1,"bands":["Label"],"dtype":"u8","nodata":255,"transform":null})");
  write_raw(tmp / "m.bin", std::string("\x01\x07", 2));
  EXPECT_EQ(code_of([&] { read_mask_file(tmp / "m"); }), Errc::kFormat);
  write_grid_file(Raster({Grid(2, 1)}, {BandTag::kDEM}), tmp / "g");
  EXPECT_EQ(code_of([&] { read_mask_file(tmp / "g"); }), Errc::kUnsupportedFormat);
  EXPECT_EQ(code_of([&] { read_grid_file(tmp / "m"); }), Errc::kUnsupportedFormat);
}
