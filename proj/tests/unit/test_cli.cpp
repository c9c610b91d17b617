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

#include <cstdio>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "floodmap/floodmap.hpp"
#include "support.hpp"

using namespace floodmap;
using testing_support::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  CliRun r;
  const std::string cmd = std::string(FLOODMAP_CLI_PATH) + " " + args + " 2>/dev/null";
  std::FILE* p = ::popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, ExitCodes) {
  TempDir tmp("cli_codes");
  EXPECT_EQ(cli("--version").code, 0);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("ndwi --out x").code, 1);
  EXPECT_EQ(cli("otsu --in " + q(tmp / "missing")).code, 2);
  std::ofstream(tmp / "bad.json") << "{not json";
  EXPECT_EQ(cli("pipeline run --config " + q(tmp / "bad.json")).code, 1);
}

TEST(Cli, IndexAndTerrainCommands) {
  TempDir tmp("cli_idx");
  std::mt19937_64 rng(91);
  std::vector<Grid> g;
  for (int b = 0; b < 4; ++b) g.push_back(testing_support::random_grid(rng, 12, 9, 0.05, 1.0));
  const Raster spectral(g, {BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR}, GeoTransform{0, 27, 3, -3});
  write_grid_file(spectral, tmp / "s");

  ASSERT_EQ(cli("ndwi --in " + q(tmp / "s") + " --out " + q(tmp / "ndwi")).code, 0);
  const Raster idx = read_grid_file(tmp / "ndwi");
  EXPECT_TRUE(bitwise_equal(idx.band(0), ndwi(g[1], g[3])));
  EXPECT_EQ(idx.transform(), spectral.transform());

  const CliRun o = cli("otsu --in " + q(tmp / "ndwi") + " --mask-out " + q(tmp / "m"));
  ASSERT_EQ(o.code, 0);
  const auto j = nlohmann::json::parse(o.out);
  const auto ref = otsu_threshold(idx.band(0));
  EXPECT_EQ(j["threshold"].get<double>(), ref.threshold);
  EXPECT_EQ(read_mask_file(tmp / "m"), apply_threshold(idx.band(0), ref.threshold, ThresholdDirection::kAboveIsFlood));
  EXPECT_EQ(cli("otsu --in " + q(tmp / "s")).code, 1);

  write_grid_file(Raster({testing_support::random_grid(rng, 12, 9, 0, 50)}, {BandTag::kDEM}, spectral.transform()),
                  tmp / "dem");
  ASSERT_EQ(cli("slope --dem " + q(tmp / "dem") + " --out " + q(tmp / "slope")).code, 0);
  const Raster dem = read_grid_file(tmp / "dem");
  EXPECT_TRUE(bitwise_equal(read_grid_file(tmp / "slope").band(0), slope_from_dem(DemGrid(dem.band(0), 3.0))));
  Mask streams(12, 9, kMaskDry);
  streams.set(4, 4, kMaskFlood);
  write_mask_file(streams, tmp / "streams");
  ASSERT_EQ(cli("hand --dem " + q(tmp / "dem") + " --streams " + q(tmp / "streams") + " --out " + q(tmp / "hand")).code, 0);
  EXPECT_TRUE(bitwise_equal(read_grid_file(tmp / "hand").band(0), hand_simplified(DemGrid(dem.band(0), 3.0), streams)));

  ASSERT_EQ(cli("stack --spectral " + q(tmp / "s") + " --slope " + q(tmp / "slope") + " --hand " + q(tmp / "hand") +
                " --out " + q(tmp / "stack"))
                .code,
            0);
  EXPECT_EQ(read_grid_file(tmp / "stack").band_count(), 7u);
}

TEST(Cli, SynthGenPipelineAndDownstreamCommands) {
  TempDir tmp("cli_pipe");
  const fs::path sg = tmp / "sg";
  ASSERT_EQ(cli("synth-gen --seed 5 --size 192 --tile-size 96 --hwm-count 3 --out " + q(sg)).code, 0);
  ASSERT_TRUE(fs::exists(sg / "config.json"));
  auto cfg = nlohmann::json::parse(testing_support::read_bytes(sg / "config.json"));
  cfg["forest"]["n_trees"] = 6;
  cfg["dataset"]["crop_size"] = 32;
  cfg["dataset"]["stride"] = 32;
  cfg["dataset"]["test_fraction"] = 0.25;
  std::ofstream(sg / "config.json") << cfg.dump();

  const CliRun r = cli("pipeline run --config " + q(sg / "config.json") + " --threads 2");
  ASSERT_EQ(r.code, 0);
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["tiles"], 3);
  EXPECT_TRUE(fs::exists(sg / "run" / "metrics.json"));

  // A second run into a locked directory is refused.
  std::ofstream(sg / "run" / ".lock") << "";
  EXPECT_EQ(cli("pipeline run --config " + q(sg / "config.json")).code, 2);

  const CliRun e = cli("eval --pred " + q(sg / "run" / "stage2" / "rf_masks") + " --truth " +
                    q(sg / "run" / "eval" / "truth") + " --out " + q(tmp / "m.json"));
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(nlohmann::json::parse(e.out)["pairs"], 3);
  EXPECT_EQ(cli("eval --pred " + q(sg / "run" / "stage2" / "rf_masks") + " --truth " + q(sg / "inputs_missing")).code, 2);

  const auto off = cfg["expert_offset"];
  const CliRun t = cli("rf-train --stack " + q(sg / "run" / "stage1" / "stack") + " --labels " + q(sg / "expert_mask") +
                    " --offset " + std::to_string(off[0].get<int>()) + " " + std::to_string(off[1].get<int>()) +
                    " --n-trees 4 --seed 2 --out " + q(tmp / "forest.json"));
  ASSERT_EQ(t.code, 0);
  EXPECT_GT(nlohmann::json::parse(t.out)["train_accuracy"].get<double>(), 0.95);
  ASSERT_EQ(cli("rf-predict --forest " + q(tmp / "forest.json") + " --stack " + q(sg / "run" / "stage1" / "stack") +
                " --out " + q(tmp / "pred"))
                .code,
            0);
  EXPECT_EQ(read_mask_file(tmp / "pred").width(), 192u);

  ASSERT_EQ(cli("sample-tiles --scene " + q(sg / "run" / "stage1" / "stack") + " --hwm " + q(sg / "hwm.csv") +
                " --tile-size 96 --out " + q(tmp / "tiles"))
                .code,
            0);
  EXPECT_TRUE(fs::exists(tmp / "tiles" / "tiles.json"));

  const CliRun x = cli("export-dataset --features " + q(sg / "run" / "stage2" / "rf_masks" / "tile000") + " --labels " +
                    q(sg / "run" / "stage2" / "rf_masks" / "tile000") + " --out " + q(tmp / "ds"));
  EXPECT_EQ(x.code, 1);
  const CliRun ok = cli("export-dataset --features " + q(tmp / "tiles" / "tile000") + " " + q(tmp / "tiles" / "tile001") +
                     " --labels " + q(sg / "run" / "stage2" / "rf_masks" / "tile000") + " " +
                     q(sg / "run" / "stage2" / "rf_masks" / "tile001") +
                     " --band-set Optical4 --crop-size 32 --stride 32 --test-fraction 0.5 --spatial-split --out " +
                     q(tmp / "ds"));
  ASSERT_EQ(ok.code, 0);
  const auto ds = import_dataset(tmp / "ds");
  EXPECT_EQ(ds.manifest.n_train + ds.manifest.n_test, 18u);
  EXPECT_EQ(ds.crops[0].features.band_count(), 4u);
}
