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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "floodmap/raster.hpp"
#include "oracles/raster_oracles.hpp"
#include "support.hpp"

using namespace floodmap;

namespace {

Grid ramp(std::size_t w, std::size_t h) {
  std::vector<float> v(w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) v[y * w + x] = static_cast<float>(10 * y + x);
  return Grid(w, h, std::move(v));
}

template <class F>
void expect_error(Errc code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(BandSemantic, RoundTripsNames) {
  for (auto t : {BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR, BandTag::kSlope, BandTag::kHAND,
                 BandTag::kNDWI, BandTag::kDEM, BandTag::kLabel}) {
    BandSemantic s(t);
    EXPECT_EQ(BandSemantic::parse(s.to_string()), s);
  }
  const auto other = BandSemantic::other("cloud");
  EXPECT_EQ(BandSemantic::parse(other.to_string()), other);
  expect_error(Errc::kSemantics, [] { BandSemantic::parse("Purple"); });
}

TEST(Grid, RejectsBadShapesAndInfinity) {
  expect_error(Errc::kShape, [] { Grid(0, 3); });
  expect_error(Errc::kSizeMismatch, [] { Grid(2, 2, std::vector<float>(3)); });
  expect_error(Errc::kValue, [] { Grid(1, 1, std::vector<float>{INFINITY}); });
  Grid g(1, 2, std::vector<float>{kNoData, 1.0f});
  EXPECT_TRUE(std::isnan(g[0]));
}

TEST(Mask, OnlyAllowsZeroOneNodata) {
  expect_error(Errc::kValue, [] { Mask(1, 1, std::vector<std::uint8_t>{2}); });
  Mask m(2, 1, std::vector<std::uint8_t>{kMaskFlood, kMaskNoData});
  EXPECT_EQ(m.count(kMaskFlood), 1u);
  expect_error(Errc::kValue, [&] { m.set(0, 7); });
}

TEST(Raster, RejectsDuplicateTagsButAllowsDuplicateOther) {
  Grid g(2, 2);
  expect_error(Errc::kSemantics, [&] { Raster({g, g}, {BandTag::kRed, BandTag::kRed}); });
  EXPECT_NO_THROW(Raster({g, g}, {BandSemantic::other("a"), BandSemantic::other("a")}));
  expect_error(Errc::kShape, [&] { Raster({g, Grid(3, 2)}, {BandTag::kRed, BandTag::kGreen}); });
}

TEST(Raster, BandLookupNamesMissingBand) {
  Raster r({Grid(1, 1)}, {BandTag::kGreen});
  try {
    r.band(BandTag::kNIR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSemantics);
    EXPECT_NE(std::string(e.what()).find("NIR"), std::string::npos);
  }
}

TEST(Crop, FullExtentIsIdentity) {
  Raster r({ramp(5, 4)}, {BandTag::kDEM}, GeoTransform{100, 200, 3, -3});
  EXPECT_EQ(crop(r, 0, 0, 5, 4), r);
}

TEST(Crop, SinglePixelIndexing) {
  const Grid g = ramp(5, 5);
  const Grid c = crop(g, 2, 3, 1, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], 32.0f);
}

TEST(Crop, OverhangIsOutOfBounds) {
  const Grid g = ramp(5, 5);
  expect_error(Errc::kOutOfBounds, [&] { crop(g, 1, 0, 5, 5); });
  expect_error(Errc::kOutOfBounds, [&] { crop(Mask(4, 4), 0, 2, 4, 3); });
}

TEST(Crop, ShiftsTransformOrigin) {
  Raster r({ramp(5, 5)}, {BandTag::kDEM}, GeoTransform{100, 200, 3, -2});
  const Raster c = crop(r, 2, 1, 2, 2);
  EXPECT_EQ(*c.transform(), (GeoTransform{106, 198, 3, -2}));
  EXPECT_EQ(c.band(0).at(1, 1), r.band(0).at(3, 2));
}

TEST(Crop, CompositionMatchesDirectWindow) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> d(1, 20);
    const std::size_t w = d(rng), h = d(rng);
    Raster r({testing_support::random_grid(rng, w, h)}, {BandTag::kRed}, GeoTransform{0, 0, 1, -1});
    auto pick = [&](std::size_t extent, std::size_t& a, std::size_t& len) {
      a = std::uniform_int_distribution<std::size_t>(0, extent - 1)(rng);
      len = std::uniform_int_distribution<std::size_t>(1, extent - a)(rng);
    };
    std::size_t ax, aw, ay, ah, bx, bw, by, bh;
    pick(w, ax, aw);
    pick(h, ay, ah);
    pick(aw, bx, bw);
    pick(ah, by, bh);
    EXPECT_EQ(crop(crop(r, ax, ay, aw, ah), bx, by, bw, bh), crop(r, ax + bx, ay + by, bw, bh));
  }
}

TEST(Resample, ConstantStaysConstant) {
  const Grid g(3, 4, 7.0f);
  for (auto [w, h] : {std::pair<std::size_t, std::size_t>{1, 1}, {9, 2}, {3, 4}, {17, 31}}) {
    const Grid out = resample_bilinear(g, w, h);
    for (float v : out.values()) EXPECT_EQ(v, 7.0f);
  }
}

TEST(Resample, LinearRampUpsample) {
  const Grid g(2, 2, std::vector<float>{0, 1, 0, 1});
  const Grid out = resample_bilinear(g, 5, 2);
  const float want[] = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 5; ++x) EXPECT_FLOAT_EQ(out.at(x, y), want[x]);
}

TEST(Resample, MatchesPerPixelOracle) {
  std::mt19937_64 rng(5);
  const Grid g = testing_support::random_grid(rng, 8, 8, -5, 5);
  const Grid out = resample_bilinear(g, 23, 17);
  std::vector<float> src(g.values().begin(), g.values().end());
  for (std::size_t y = 0; y < 17; ++y)
    for (std::size_t x = 0; x < 23; ++x)
      EXPECT_NEAR(out.at(x, y),
                  oracle::bilinear_at(src, 8, 8, oracle::source_coord(x, 8, 23), oracle::source_coord(y, 8, 17)), 1e-6);
}

TEST(Resample, SameSizeIsIdentity) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 1 + rng() % 30, h = 1 + rng() % 30;
    const Grid g = testing_support::random_grid(rng, w, h, -100, 100);
    const Grid out = resample_bilinear(g, w, h);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(out[i], g[i], 1e-7 * std::max(1.0f, std::abs(g[i])));
  }
}

TEST(Resample, ExactOnBilinearFunctions) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const std::size_t w = 2 + rng() % 15, h = 2 + rng() % 15;
    const std::size_t tw = 1 + rng() % 40, th = 1 + rng() % 40;
    std::vector<float> v(w * h);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) v[y * w + x] = static_cast<float>(a + b * x + c * y + d * x * y);
    const Grid out = resample_bilinear(Grid(w, h, v), tw, th);
    for (std::size_t y = 0; y < th; ++y)
      for (std::size_t x = 0; x < tw; ++x) {
        const double sx = oracle::source_coord(x, w, tw), sy = oracle::source_coord(y, h, th);
        EXPECT_NEAR(out.at(x, y), oracle::bilinear_at(v, w, h, sx, sy), 1e-6 * (1 + std::abs(a + b * sx + c * sy + d * sx * sy)));
      }
  }
}

TEST(Resample, NanPoisonsOnlyWithWeight) {
  Grid g(3, 1, std::vector<float>{0.0f, kNoData, 2.0f});
  const Grid out = resample_bilinear(g, 5, 1);
  EXPECT_EQ(out[0], 0.0f);
  EXPECT_TRUE(std::isnan(out[1]));
  EXPECT_TRUE(std::isnan(out[2]));
  EXPECT_TRUE(std::isnan(out[3]));
  EXPECT_EQ(out[4], 2.0f);
}

TEST(Resample, SingleSampleSitsAtSourceMidpoint) {
  const Grid g(3, 1, std::vector<float>{0.0f, 4.0f, 8.0f});
  EXPECT_FLOAT_EQ(resample_bilinear(g, 1, 1)[0], 4.0f);
  const Grid one(1, 1, 5.0f);
  const Grid up = resample_bilinear(one, 4, 3);
  for (float v : up.values()) EXPECT_EQ(v, 5.0f);
}

TEST(Resample, RejectsEmptyTarget) {
  expect_error(Errc::kShape, [] { resample_bilinear(Grid(2, 2), 0, 3); });
}

TEST(Stack, SingleGridIsIdentity) {
  const Grid g = ramp(3, 3);
  const Raster r = stack({{g, BandTag::kRed}});
  EXPECT_EQ(r.band_count(), 1u);
  EXPECT_EQ(r.band(0), g);
}

TEST(Stack, CanonicalOrderPutsNdwiLast) {
  std::vector<std::pair<Grid, BandSemantic>> in;
  for (const auto& s : canonical_feature_bands()) in.emplace_back(Grid(2, 2), s);
  const Raster r = stack(in);
  EXPECT_EQ(r.semantics()[6], BandSemantic(BandTag::kNDWI));
}

TEST(Stack, ShapeAndDuplicateErrors) {
  expect_error(Errc::kShape, [] { stack({{Grid(4, 4), BandTag::kRed}, {Grid(5, 4), BandTag::kGreen}}); });
  expect_error(Errc::kSemantics, [] { stack({{Grid(4, 4), BandTag::kRed}, {Grid(4, 4), BandTag::kRed}}); });
}

TEST(Stack, ExtractReturnsOriginalValues) {
  std::mt19937_64 rng(9);
  const Grid a = testing_support::random_grid(rng, 6, 5, 0, 1, 0.2);
  const Grid b = testing_support::random_grid(rng, 6, 5, 0, 1, 0.2);
  const Raster r = stack({{a, BandTag::kGreen}, {b, BandTag::kNIR}});
  EXPECT_TRUE(bitwise_equal(r.band(BandTag::kGreen), a));
  EXPECT_TRUE(bitwise_equal(r.band(BandTag::kNIR), b));
  const Raster s = select_bands(r, {BandTag::kNIR});
  EXPECT_TRUE(bitwise_equal(s.band(0), b));
}
