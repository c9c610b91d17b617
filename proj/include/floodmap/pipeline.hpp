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

// Three-stage annotation pipeline:
//   1. aggregate spectral bands, slope and HAND into the 7-band feature stack;
//   2. train a Random Forest on one expert-annotated tile and label every
//      HWM-centered tile with it;
//   3. cut the labelled tiles into crops and export the training dataset.
// Each run writes under output_dir, guarded by a lock file.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodmap/dataset.hpp"
#include "floodmap/error.hpp"
#include "floodmap/fgrid.hpp"
#include "floodmap/indices.hpp"
#include "floodmap/metrics.hpp"
#include "floodmap/random_forest.hpp"
#include "floodmap/raster.hpp"
#include "floodmap/scene_synth.hpp"

namespace floodmap {

inline constexpr const char* kVersion = "0.1.0";

struct DatasetConfig {
  std::size_t crop_size = 128;
  std::size_t stride = 128;
  double test_fraction = 320.0 / 1088.0;
  std::optional<std::uint64_t> seed;  // falls back to PipelineConfig::seed
  SplitMode split = SplitMode::kRandom;
};

struct PipelineConfig {
  // Scene inputs (FGRID paths). Ignored when `synthetic` is set.
  fs::path spectral;
  fs::path slope;
  fs::path hand;
  std::optional<fs::path> dem;
  fs::path hwm_csv;
  fs::path expert_mask;  // tile-sized mask placed at expert_offset in the stack
  std::size_t expert_x0 = 0;
  std::size_t expert_y0 = 0;
  std::optional<fs::path> truth_mask;  // scene-sized; enables evaluation

  std::optional<SynthParams> synthetic;
  std::size_t synthetic_hwm_count = 8;

  BandSet band_set = BandSet::kFull6;
  ForestParams forest;
  bool forest_seed_set = false;
  DatasetConfig dataset;
  double sample_fraction = 0.5;
  std::size_t tile_size = 1024;
  fs::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 1;

  std::uint64_t forest_seed() const { return forest_seed_set ? forest.seed : seed; }
  std::uint64_t dataset_seed() const { return dataset.seed.value_or(seed); }
};

namespace pipeline_detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { fgrid_detail::write_file(path, j.dump(2) + "\n"); }

inline std::string tile_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tile%03zu", i);
  return buf;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Parses a pipeline config. Relative paths resolve against base_dir.
inline PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
  PipelineConfig c;
  auto path = [&](const char* key) {
    fs::path p = j.at(key).get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("output_dir")) c.output_dir = path("output_dir");
    if (j.contains("band_set")) c.band_set = parse_band_set(j["band_set"].get<std::string>());
    if (c.band_set == BandSet::kCustom) fail(Errc::kConfig, "band_set must be Optical4 or Full6");
    if (j.contains("sample_fraction")) c.sample_fraction = j["sample_fraction"].get<double>();
    if (j.contains("tile_size")) c.tile_size = j["tile_size"].get<std::size_t>();

    if (j.contains("forest")) {
      const auto& f = j["forest"];
      c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
      if (f.contains("mtry") && !f["mtry"].is_null()) c.forest.mtry = f["mtry"].get<int>();
      c.forest.min_samples_split = f.value("min_samples_split", c.forest.min_samples_split);
      c.forest.min_samples_leaf = f.value("min_samples_leaf", c.forest.min_samples_leaf);
      if (f.contains("max_depth") && !f["max_depth"].is_null()) c.forest.max_depth = f["max_depth"].get<int>();
      c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
      if (f.contains("seed")) {
        c.forest.seed = f["seed"].get<std::uint64_t>();
        c.forest_seed_set = true;
      }
    }
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      c.dataset.crop_size = d.value("crop_size", c.dataset.crop_size);
      c.dataset.stride = d.value("stride", c.dataset.stride);
      c.dataset.test_fraction = d.value("test_fraction", c.dataset.test_fraction);
      if (d.contains("seed")) c.dataset.seed = d["seed"].get<std::uint64_t>();
      const auto split = d.value("split", std::string("random"));
      if (split != "random" && split != "spatial") fail(Errc::kConfig, "dataset.split must be random or spatial");
      c.dataset.split = split == "spatial" ? SplitMode::kSpatial : SplitMode::kRandom;
    }

    const auto& syn = j.contains("synthetic") ? j["synthetic"] : nlohmann::json();
    if (syn.is_boolean() ? syn.get<bool>() : syn.is_object()) {
      SynthParams p;
      if (syn.is_object()) {
        p.size = syn.value("size", p.size);
        p.water_level = syn.value("water_level", p.water_level);
        p.noise_sigma = syn.value("noise_sigma", p.noise_sigma);
        p.stream_count = syn.value("stream_count", p.stream_count);
        c.synthetic_hwm_count = syn.value("hwm_count", c.synthetic_hwm_count);
        if (syn.contains("seed")) p.seed = syn["seed"].get<std::uint64_t>();
        else p.seed = c.seed;
      } else {
        p.seed = c.seed;
      }
      c.synthetic = p;
    } else {
      c.spectral = path("spectral");
      c.slope = path("slope");
      c.hand = path("hand");
      if (j.contains("dem") && !j["dem"].is_null()) c.dem = path("dem");
      c.hwm_csv = path("hwm_csv");
      c.expert_mask = path("expert_mask");
      const auto& off = j.at("expert_offset");
      c.expert_x0 = off.at(0).get<std::size_t>();
      c.expert_y0 = off.at(1).get<std::size_t>();
      if (j.contains("truth_mask") && !j["truth_mask"].is_null()) c.truth_mask = path("truth_mask");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kConfig, e.what());
  }
  if (!(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0)) fail(Errc::kConfig, "sample_fraction must lie in (0, 1]");
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["band_set"] = to_string(c.band_set);
  j["sample_fraction"] = c.sample_fraction;
  j["tile_size"] = c.tile_size;
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"mtry", c.forest.mtry ? nlohmann::json(*c.forest.mtry) : nlohmann::json(nullptr)},
                 {"min_samples_split", c.forest.min_samples_split},
                 {"min_samples_leaf", c.forest.min_samples_leaf},
                 {"max_depth", c.forest.max_depth ? nlohmann::json(*c.forest.max_depth) : nlohmann::json(nullptr)},
                 {"bootstrap", c.forest.bootstrap},
                 {"seed", c.forest_seed()}};
  j["dataset"] = {{"crop_size", c.dataset.crop_size},
                  {"stride", c.dataset.stride},
                  {"test_fraction", c.dataset.test_fraction},
                  {"seed", c.dataset_seed()},
                  {"split", c.dataset.split == SplitMode::kSpatial ? "spatial" : "random"}};
  if (c.synthetic) {
    j["synthetic"] = {{"seed", c.synthetic->seed},
                      {"size", c.synthetic->size},
                      {"water_level", c.synthetic->water_level},
                      {"noise_sigma", c.synthetic->noise_sigma},
                      {"stream_count", c.synthetic->stream_count},
                      {"hwm_count", c.synthetic_hwm_count}};
  } else {
    j["spectral"] = c.spectral.string();
    j["slope"] = c.slope.string();
    j["hand"] = c.hand.string();
    j["dem"] = c.dem ? nlohmann::json(c.dem->string()) : nlohmann::json(nullptr);
    j["hwm_csv"] = c.hwm_csv.string();
    j["expert_mask"] = c.expert_mask.string();
    j["expert_offset"] = {c.expert_x0, c.expert_y0};
    j["truth_mask"] = c.truth_mask ? nlohmann::json(c.truth_mask->string()) : nlohmann::json(nullptr);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output directory lock
// ---------------------------------------------------------------------------

/// Exclusive `.lock` file in the output directory, removed on destruction.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::kIo, "cannot create " + dir.string() + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) fail(Errc::kLocked, path_.string() + " exists; another run is using this directory");
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Writes the synthetic scene's inputs under `in` (default output_dir/inputs)
/// and rewrites `config` to read them, so synthetic and file-based runs share
/// one path.
inline SynthScene materialize_synthetic(PipelineConfig& config, std::optional<fs::path> in_dir = std::nullopt) {
  const SynthParams& p = *config.synthetic;
  SynthScene scene = generate_scene(p, resolve_threads(config.threads));
  const fs::path in = in_dir.value_or(config.output_dir / "inputs");
  const auto& s = scene.stack;
  const auto t = s.transform();
  write_grid_file(select_bands(s, {BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR}), in / "spectral");
  write_grid_file(Raster({s.band(BandTag::kSlope)}, {BandTag::kSlope}, t), in / "slope");
  write_grid_file(Raster({s.band(BandTag::kHAND)}, {BandTag::kHAND}, t), in / "hand");
  write_grid_file(Raster({s.band(BandTag::kDEM)}, {BandTag::kDEM}, t), in / "dem");
  write_mask_file(scene.truth, in / "truth", t);
  write_mask_file(scene.streams, in / "streams", t);
  const auto tile = expert_tile(scene, std::min(config.tile_size, p.size));
  write_mask_file(tile.label, in / "expert_mask", tile.features.transform());
  write_hwm_csv(synth_hwm(scene, config.synthetic_hwm_count, p.seed, std::min(config.tile_size, p.size)), in / "hwm.csv");

  config.spectral = in / "spectral";
  config.slope = in / "slope";
  config.hand = in / "hand";
  config.dem = in / "dem";
  config.hwm_csv = in / "hwm.csv";
  config.expert_mask = in / "expert_mask";
  config.expert_x0 = tile.x0;
  config.expert_y0 = tile.y0;
  config.truth_mask = in / "truth";
  return scene;
}

namespace pipeline_detail {
inline const Grid& single_band(const Raster& r, BandTag tag) {
  if (auto i = r.find(tag)) return r.band(*i);
  if (r.band_count() == 1) return r.band(0);
  fail(Errc::kSemantics, "raster has no " + BandSemantic(tag).to_string() + " band");
}
}  // namespace pipeline_detail

/// Canonical 7-band stack on the spectral grid. Slope and HAND are brought
/// to the spectral resolution by bilinear resampling.
inline Raster build_feature_stack(const Raster& spectral, const Raster& slope_r, const Raster& hand_r) {
  for (BandTag t : {BandTag::kBlue, BandTag::kGreen, BandTag::kRed, BandTag::kNIR})
    if (!spectral.find(t)) fail(Errc::kSemantics, "spectral raster is missing the " + BandSemantic(t).to_string() + " band");
  const std::size_t w = spectral.width(), h = spectral.height();
  Grid slope = resample_bilinear(pipeline_detail::single_band(slope_r, BandTag::kSlope), w, h);
  Grid hand = resample_bilinear(pipeline_detail::single_band(hand_r, BandTag::kHAND), w, h);
  const Grid& green = spectral.band(BandTag::kGreen);
  const Grid& nir = spectral.band(BandTag::kNIR);
  Grid index = ndwi(green, nir);

  return stack({{spectral.band(BandTag::kBlue), BandTag::kBlue},
                {green, BandTag::kGreen},
                {spectral.band(BandTag::kRed), BandTag::kRed},
                {nir, BandTag::kNIR},
                {std::move(slope), BandTag::kSlope},
                {std::move(hand), BandTag::kHAND},
                {std::move(index), BandTag::kNDWI}},
               spectral.transform());
}

inline Raster run_stage1_aggregate(const PipelineConfig& config) {
  Raster stacked =
      build_feature_stack(read_grid_file(config.spectral), read_grid_file(config.slope), read_grid_file(config.hand));
  write_grid_file(stacked, config.output_dir / "stage1" / "stack");
  return stacked;
}

struct LabelledTile {
  std::string name;
  SampledTile sampled;
  Mask rf_mask;
};

struct Stage2Result {
  Forest forest;
  std::vector<LabelledTile> tiles;
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
  double overlap_fraction = 0.0;
};

/// Trains on a stratified sample of the expert tile, scores the unsampled
/// complement, then labels every HWM tile with the forest.
inline Stage2Result run_stage2_rf(const PipelineConfig& config, const Raster& stack, const Mask& expert_mask) {
  using pipeline_detail::write_json;
  const unsigned threads = resolve_threads(config.threads);
  const Raster expert = crop(stack, config.expert_x0, config.expert_y0, expert_mask.width(), expert_mask.height());

  const auto sampled = stratified_pixel_sample(expert_mask, config.sample_fraction, config.seed);
  const SampleMatrix train = samples_from_pixels(expert, &expert_mask, sampled);

  ForestParams params = config.forest;
  params.seed = config.forest_seed();
  Stage2Result r;
  r.forest = fit_forest(train, params, threads, default_feature_names(stack.band_count()));

  auto accuracy = [&](const SampleMatrix& s) {
    if (s.n() == 0) return 0.0;
    const auto pred = predict_forest(r.forest, s, threads);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < s.n(); ++i) hit += pred.labels[i] == s.label(i);
    return static_cast<double>(hit) / static_cast<double>(s.n());
  };
  r.n_train = train.n();
  r.train_accuracy = accuracy(train);

  std::vector<std::size_t> complement;
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < expert_mask.size(); ++i) {
      if (k < sampled.size() && sampled[k] == i) {
        ++k;
        continue;
      }
      if (expert_mask[i] != kMaskNoData) complement.push_back(i);
    }
  }
  const SampleMatrix heldout = samples_from_pixels(expert, &expert_mask, complement);
  r.n_heldout = heldout.n();
  r.heldout_accuracy = accuracy(heldout);

  const fs::path out = config.output_dir / "stage2";
  write_json(out / "forest.json", r.forest.to_json());

  const auto hwm = read_hwm_csv(config.hwm_csv);
  auto tiles = sample_tiles(stack, hwm, config.tile_size);
  Mask mosaic(stack.width(), stack.height(), kMaskNoData);
  std::vector<std::uint8_t> covered(stack.width() * stack.height(), 0);
  std::size_t overlapped = 0, covered_px = 0;
  nlohmann::json tile_list = nlohmann::json::array();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    LabelledTile lt{pipeline_detail::tile_name(i), std::move(tiles[i]), {}};
    lt.rf_mask = predict_raster(r.forest, lt.sampled.tile, threads);
    write_mask_file(lt.rf_mask, out / "rf_masks" / lt.name, lt.sampled.tile.transform());
    for (std::size_t y = 0; y < lt.rf_mask.height(); ++y) {
      for (std::size_t x = 0; x < lt.rf_mask.width(); ++x) {
        const std::size_t idx = (lt.sampled.y0 + y) * stack.width() + lt.sampled.x0 + x;
        if (covered[idx] == 1) ++overlapped;
        if (covered[idx] == 0) ++covered_px;
        covered[idx] = covered[idx] == 0 ? 1 : 2;
        mosaic.set(idx, lt.rf_mask.at(x, y));  // later tiles overwrite earlier ones
      }
    }
    tile_list.push_back({{"name", lt.name}, {"hwm", lt.sampled.hwm.id}, {"offset", {lt.sampled.x0, lt.sampled.y0}}});
    r.tiles.push_back(std::move(lt));
  }
  r.overlap_fraction = covered_px == 0 ? 0.0 : static_cast<double>(overlapped) / static_cast<double>(covered_px);
  write_mask_file(mosaic, out / "rf_scene_mask", stack.transform());

  nlohmann::json report;
  report["train_accuracy"] = r.train_accuracy;
  report["heldout_accuracy"] = r.heldout_accuracy;
  report["n_train"] = r.n_train;
  report["n_heldout"] = r.n_heldout;
  report["sample_fraction"] = config.sample_fraction;
  report["expert_offset"] = {config.expert_x0, config.expert_y0};
  nlohmann::json imp = nlohmann::json::array();
  for (const auto& [name, w] : feature_importance(r.forest)) imp.push_back({{"feature", name}, {"weight", w}});
  report["importances"] = imp;
  report["tiles"] = tile_list;
  report["hwm_total"] = hwm.size();
  report["overlap_fraction"] = r.overlap_fraction;
  write_json(out / "rf_report.json", report);
  return r;
}

/// Crops every labelled tile, keeps the configured band subset, splits and
/// exports the dataset directory.
inline DatasetManifest run_stage3_export(const PipelineConfig& config, const std::vector<LabelledTile>& tiles) {
  const auto bands = band_set_bands(config.band_set);
  std::vector<Crop> crops;
  for (const auto& t : tiles) {
    const Raster features = select_bands(t.sampled.tile, bands);
    auto tile_crops = make_crops(features, t.rf_mask, config.dataset.crop_size, config.dataset.stride, t.name);
    for (auto& c : tile_crops) crops.push_back(std::move(c));
  }
  DatasetManifest m = split_train_test(crops, config.dataset.test_fraction, config.dataset_seed(), config.dataset.split);
  export_dataset(crops, m, config.output_dir / "dataset");
  return m;
}

struct EvalResult {
  MetricsReport report;
  std::size_t pairs = 0;
};

inline nlohmann::json to_json(const EvalResult& e) {
  nlohmann::json j = to_json(e.report);
  j["pairs"] = e.pairs;
  j["f1_from_iou"] = f1_from_iou(e.report.iou);
  return j;
}

/// Pools confusion counts over every mask pair sharing a file stem, then
/// scores the pooled matrix once.
inline EvalResult run_eval(const fs::path& pred_dir, const fs::path& truth_dir) {
  auto stems = [](const fs::path& dir) {
    if (!fs::is_directory(dir)) fail(Errc::kIo, dir.string() + " is not a directory");
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json" && read_fgrid_header(e.path()).dtype == "u8")
        out.insert(e.path().stem().string());
    return out;
  };
  const auto pred = stems(pred_dir);
  const auto truth = stems(truth_dir);
  if (pred != truth) {
    std::string missing;
    for (const auto& s : pred)
      if (!truth.count(s)) missing += " " + s + "(no truth)";
    for (const auto& s : truth)
      if (!pred.count(s)) missing += " " + s + "(no prediction)";
    fail(Errc::kPairing, "unpaired masks:" + missing);
  }
  if (pred.empty()) fail(Errc::kEmptyInput, "no masks to evaluate");
  ConfusionMatrix pooled;
  for (const auto& s : pred) pooled += confusion(read_mask_file(pred_dir / s), read_mask_file(truth_dir / s));
  return {scores(pooled), pred.size()};
}

struct PipelineResult {
  Stage2Result stage2;
  DatasetManifest manifest;
  std::optional<EvalResult> eval;
};

/// Runs all three stages (and evaluation when a truth mask is known).
inline PipelineResult run_pipeline(PipelineConfig config) {
  using namespace pipeline_detail;
  const std::string started = utc_now();
  const std::string config_text = config_to_json(config).dump();
  OutputLock lock(config.output_dir);

  if (config.synthetic) materialize_synthetic(config);
  for (const auto* p : {&config.spectral, &config.slope, &config.hand, &config.hwm_csv})
    if (!fs::exists(*p) && !fs::exists(fs::path(p->string() + ".json")))
      fail(Errc::kIo, "input " + p->string() + " does not exist");

  const Raster stack = run_stage1_aggregate(config);
  const Mask expert = read_mask_file(config.expert_mask);

  PipelineResult result;
  result.stage2 = run_stage2_rf(config, stack, expert);
  result.manifest = run_stage3_export(config, result.stage2.tiles);

  nlohmann::json baselines;
  if (config.truth_mask) {
    const Mask truth = read_mask_file(*config.truth_mask);
    if (truth.width() != stack.width() || truth.height() != stack.height())
      fail(Errc::kShape, "truth mask does not match the scene grid");
    const fs::path truth_dir = config.output_dir / "eval" / "truth";
    ConfusionMatrix ndwi_cm, otsu_cm;
    nlohmann::json otsu_thresholds = nlohmann::json::array();
    for (const auto& t : result.stage2.tiles) {
      const Mask truth_tile = crop(truth, t.sampled.x0, t.sampled.y0, t.rf_mask.width(), t.rf_mask.height());
      write_mask_file(truth_tile, truth_dir / t.name, t.sampled.tile.transform());
      const Grid& index = t.sampled.tile.band(BandTag::kNDWI);
      ndwi_cm += confusion(apply_threshold(index, 0.0, ThresholdDirection::kAboveIsFlood), truth_tile);
      try {
        const auto otsu = otsu_threshold(index);
        otsu_cm += confusion(apply_threshold(index, otsu.threshold, ThresholdDirection::kAboveIsFlood), truth_tile);
        otsu_thresholds.push_back(otsu.threshold);
      } catch (const Error& e) {
        if (e.code() != Errc::kDegenerateInput) throw;
        otsu_thresholds.push_back(nullptr);
      }
    }
    if (!result.stage2.tiles.empty()) {
      result.eval = run_eval(config.output_dir / "stage2" / "rf_masks", truth_dir);
      write_json(config.output_dir / "metrics.json", to_json(*result.eval));
      baselines["ndwi_zero"] = ndwi_cm.total() ? to_json(scores(ndwi_cm)) : nlohmann::json(nullptr);
      baselines["otsu"] = otsu_cm.total() ? to_json(scores(otsu_cm)) : nlohmann::json(nullptr);
      baselines["otsu_thresholds"] = otsu_thresholds;
      write_json(config.output_dir / "baselines.json", baselines);
    }
  }

  nlohmann::json run;
  run["version"] = kVersion;
  run["config_hash"] = hex64(fnv1a(config_text));
  run["config"] = nlohmann::json::parse(config_text);
  run["threads"] = resolve_threads(config.threads);
  run["started_at"] = started;
  run["finished_at"] = utc_now();
  run["outputs"] = {{"stack", "stage1/stack"},
                    {"forest", "stage2/forest.json"},
                    {"rf_report", "stage2/rf_report.json"},
                    {"dataset", "dataset/manifest.json"},
                    {"metrics", result.eval ? nlohmann::json("metrics.json") : nlohmann::json(nullptr)}};
  write_json(config.output_dir / "run.json", run);
  return result;
}

}  // namespace floodmap
