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

// floodmap command-line interface.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "floodmap/floodmap.hpp"

namespace fs = std::filesystem;
using namespace floodmap;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool out_required = true) {
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  auto* o = app->add_option("--out", c.out, "Output path");
  if (out_required) o->required();
}

void require_input(const fs::path& p) {
  if (fs::exists(p) || fs::exists(fs::path(p.string() + ".json"))) return;
  fail(Errc::kIo, "input " + p.string() + " does not exist");
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

BandSemantic band_arg(const std::string& s) { return BandSemantic::parse(s); }

const Grid& pick_band(const Raster& r, const std::string& band) {
  if (!band.empty()) return r.band(band_arg(band));
  if (r.band_count() != 1) fail(Errc::kSemantics, "raster has several bands; pass --band");
  return r.band(0);
}

SplitMode split_arg(const std::string& s) {
  if (s == "random") return SplitMode::kRandom;
  if (s == "spatial") return SplitMode::kSpatial;
  fail(Errc::kConfig, "split must be random or spatial");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flood extent mapping: index baselines, Random Forest label propagation, dataset export"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // synth-gen
  Common sg;
  SynthParams sp;
  std::size_t sg_tile = 1024, sg_hwm = 8;
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic scene and a ready-to-run pipeline config");
  add_common(synth, sg);
  synth->add_option("--size", sp.size, "Scene width and height in pixels")->capture_default_str();
  synth->add_option("--water-level", sp.water_level, "HAND below which pixels flood (m)")->capture_default_str();
  synth->add_option("--noise", sp.noise_sigma, "Reflectance noise sigma")->capture_default_str();
  synth->add_option("--stream-count", sp.stream_count, "DEM percentile for stream cells")->capture_default_str();
  synth->add_option("--tile-size", sg_tile, "Expert/HWM tile size")->capture_default_str();
  synth->add_option("--hwm-count", sg_hwm, "Synthetic high-water marks")->capture_default_str();

  // ndwi
  Common nd;
  double epsilon = NdwiParams{}.epsilon;
  std::string nd_in, nd_green, nd_nir;
  auto* ndwi_cmd = app.add_subcommand("ndwi", "Compute NDWI from Green and NIR bands");
  add_common(ndwi_cmd, nd);
  ndwi_cmd->add_option("--in", nd_in, "Raster with Green and NIR bands");
  ndwi_cmd->add_option("--green", nd_green, "Single-band Green raster");
  ndwi_cmd->add_option("--nir", nd_nir, "Single-band NIR raster");
  ndwi_cmd->add_option("--epsilon", epsilon, "Denominator guard")->capture_default_str();

  // otsu
  Common ot;
  std::string ot_in, ot_band, ot_mask;
  bool ot_below = false;
  auto* otsu = app.add_subcommand("otsu", "Otsu threshold of one band; prints the result as JSON");
  add_common(otsu, ot, false);
  otsu->add_option("--in", ot_in, "Input raster")->required();
  otsu->add_option("--band", ot_band, "Band semantic (required for multi-band rasters)");
  otsu->add_option("--mask-out", ot_mask, "Write the thresholded mask here");
  otsu->add_flag("--below", ot_below, "Values below the threshold are flood");

  // slope
  Common sl;
  std::string sl_dem;
  std::optional<double> sl_cell;
  auto* slope = app.add_subcommand("slope", "Horn slope in degrees from a DEM");
  add_common(slope, sl);
  slope->add_option("--dem", sl_dem, "DEM raster")->required();
  slope->add_option("--cell-size", sl_cell, "Meters per pixel (default: transform pixel size)");

  // hand
  Common hd;
  std::string hd_dem, hd_streams;
  std::optional<double> hd_cell;
  auto* hand = app.add_subcommand("hand", "Simplified HAND from a DEM and a stream mask");
  add_common(hand, hd);
  hand->add_option("--dem", hd_dem, "DEM raster")->required();
  hand->add_option("--streams", hd_streams, "Stream mask")->required();
  hand->add_option("--cell-size", hd_cell, "Meters per pixel (default: transform pixel size)");

  // stack
  Common st;
  std::string st_spectral, st_slope, st_hand;
  auto* stack_cmd = app.add_subcommand("stack", "Build the 7-band feature stack");
  add_common(stack_cmd, st);
  stack_cmd->add_option("--spectral", st_spectral, "Blue/Green/Red/NIR raster")->required();
  stack_cmd->add_option("--slope", st_slope, "Slope raster")->required();
  stack_cmd->add_option("--hand", st_hand, "HAND raster")->required();

  // rf-train
  Common rt;
  std::string rt_stack, rt_labels;
  std::vector<std::size_t> rt_offset;
  double rt_fraction = 0.5;
  ForestParams fp;
  bool rt_no_bootstrap = false;
  auto* rf_train = app.add_subcommand("rf-train", "Train a Random Forest on a labelled window of a feature stack");
  add_common(rf_train, rt);
  rf_train->add_option("--stack", rt_stack, "Feature stack")->required();
  rf_train->add_option("--labels", rt_labels, "Label mask")->required();
  rf_train->add_option("--offset", rt_offset, "Label window offset x0 y0 in the stack")->expected(2);
  rf_train->add_option("--sample-fraction", rt_fraction, "Stratified training fraction")->capture_default_str();
  rf_train->add_option("--n-trees", fp.n_trees)->capture_default_str();
  rf_train->add_option("--mtry", fp.mtry);
  rf_train->add_option("--min-samples-split", fp.min_samples_split)->capture_default_str();
  rf_train->add_option("--min-samples-leaf", fp.min_samples_leaf)->capture_default_str();
  rf_train->add_option("--max-depth", fp.max_depth);
  rf_train->add_flag("--no-bootstrap", rt_no_bootstrap);

  // rf-predict
  Common rp;
  std::string rp_forest, rp_stack;
  auto* rf_predict = app.add_subcommand("rf-predict", "Predict a flood mask with a trained forest");
  add_common(rf_predict, rp);
  rf_predict->add_option("--forest", rp_forest, "forest.json")->required();
  rf_predict->add_option("--stack", rp_stack, "Feature stack")->required();

  // sample-tiles
  Common ts;
  std::string ts_scene, ts_hwm;
  std::size_t ts_tile = 1024;
  auto* sample = app.add_subcommand("sample-tiles", "Cut HWM-centered tiles from a scene");
  add_common(sample, ts);
  sample->add_option("--scene", ts_scene, "Georeferenced scene raster")->required();
  sample->add_option("--hwm", ts_hwm, "hwm.csv")->required();
  sample->add_option("--tile-size", ts_tile)->capture_default_str();

  // export-dataset
  Common ex;
  std::vector<std::string> ex_features, ex_labels;
  std::string ex_band_set = "Full6", ex_split = "random";
  std::size_t ex_crop = 128, ex_stride = 128;
  double ex_test = 320.0 / 1088.0;
  auto* exp = app.add_subcommand("export-dataset", "Cut tiles into crops, split, and export the training dataset");
  add_common(exp, ex);
  exp->add_option("--features", ex_features, "Tile feature rasters")->required();
  exp->add_option("--labels", ex_labels, "Tile label masks, one per feature raster")->required();
  exp->add_option("--band-set", ex_band_set, "Optical4 or Full6")->capture_default_str();
  exp->add_option("--crop-size", ex_crop)->capture_default_str();
  exp->add_option("--stride", ex_stride)->capture_default_str();
  exp->add_option("--test-fraction", ex_test)->capture_default_str();
  exp->add_option("--split", ex_split, "random or spatial")->capture_default_str();
  bool ex_spatial = false;
  exp->add_flag("--spatial-split", ex_spatial, "Shorthand for --split spatial");

  // eval
  Common ev;
  std::string ev_pred, ev_truth;
  auto* eval = app.add_subcommand("eval", "Pooled segmentation metrics over paired mask directories");
  add_common(eval, ev, false);
  eval->add_option("--pred", ev_pred, "Directory of predicted masks")->required();
  eval->add_option("--truth", ev_truth, "Directory of truth masks")->required();

  // pipeline run
  Common pr;
  std::string pr_config;
  auto* pipeline = app.add_subcommand("pipeline", "Three-stage pipeline");
  pipeline->require_subcommand(1);
  auto* run = pipeline->add_subcommand("run", "Run all stages from a JSON config");
  add_common(run, pr, false);
  run->add_option("--config", pr_config, "Pipeline config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) {
      PipelineConfig c;
      c.seed = sg.seed.value_or(0);
      sp.seed = c.seed;
      c.synthetic = sp;
      c.threads = sg.threads;
      c.tile_size = std::min(sg_tile, sp.size);
      c.synthetic_hwm_count = sg_hwm;
      const fs::path out = sg.out;
      materialize_synthetic(c, out);
      c.synthetic.reset();
      c.output_dir = "run";
      nlohmann::json j = config_to_json(c);
      for (const char* k : {"spectral", "slope", "hand", "dem", "hwm_csv", "expert_mask", "truth_mask"})
        j[k] = fs::path(j[k].get<std::string>()).lexically_relative(out).string();
      pipeline_detail::write_json(out / "config.json", j);
      print_json({{"config", (out / "config.json").string()}, {"expert_offset", {c.expert_x0, c.expert_y0}}});
    } else if (*ndwi_cmd) {
      NdwiParams params{epsilon};
      Grid index = [&] {
        if (!nd_in.empty()) {
          require_input(nd_in);
          const Raster r = read_grid_file(nd_in);
          return ndwi(r.band(BandTag::kGreen), r.band(BandTag::kNIR), params);
        }
        if (nd_green.empty() || nd_nir.empty()) fail(Errc::kConfig, "pass --in or both --green and --nir");
        require_input(nd_green);
        require_input(nd_nir);
        const Raster g = read_grid_file(nd_green);
        const Raster n = read_grid_file(nd_nir);
        return ndwi(pick_band(g, g.find(BandTag::kGreen) ? "Green" : ""), pick_band(n, n.find(BandTag::kNIR) ? "NIR" : ""),
                    params);
      }();
      const auto t = read_fgrid_header(nd_in.empty() ? nd_green : nd_in).transform;
      write_grid_file(Raster({std::move(index)}, {BandTag::kNDWI}, t), nd.out);
    } else if (*otsu) {
      require_input(ot_in);
      const Raster r = read_grid_file(ot_in);
      const Grid& g = pick_band(r, ot_band);
      const OtsuResult res = otsu_threshold(g);
      nlohmann::json j{{"threshold", res.threshold},
                       {"between_class_variance", res.between_class_variance},
                       {"bin_edges", {res.min, res.max}},
                       {"histogram", res.histogram}};
      if (!ot_mask.empty())
        write_mask_file(apply_threshold(g, res.threshold,
                                        ot_below ? ThresholdDirection::kBelowIsFlood : ThresholdDirection::kAboveIsFlood),
                        ot_mask, r.transform());
      if (!ot.out.empty()) pipeline_detail::write_json(ot.out, j);
      j.erase("histogram");
      print_json(j);
    } else if (*slope) {
      require_input(sl_dem);
      const Raster r = read_grid_file(sl_dem);
      const double cell = sl_cell ? *sl_cell : r.transform() ? std::abs(r.transform()->pixel_size_x) : 1.0;
      Grid s = slope_from_dem(DemGrid(pick_band(r, r.find(BandTag::kDEM) ? "DEM" : ""), cell), sl.threads);
      write_grid_file(Raster({std::move(s)}, {BandTag::kSlope}, r.transform()), sl.out);
    } else if (*hand) {
      require_input(hd_dem);
      require_input(hd_streams);
      const Raster r = read_grid_file(hd_dem);
      const double cell = hd_cell ? *hd_cell : r.transform() ? std::abs(r.transform()->pixel_size_x) : 1.0;
      Grid h = hand_simplified(DemGrid(pick_band(r, r.find(BandTag::kDEM) ? "DEM" : ""), cell),
                               read_mask_file(hd_streams), hd.threads);
      write_grid_file(Raster({std::move(h)}, {BandTag::kHAND}, r.transform()), hd.out);
    } else if (*stack_cmd) {
      for (const auto& p : {st_spectral, st_slope, st_hand}) require_input(p);
      write_grid_file(
          build_feature_stack(read_grid_file(st_spectral), read_grid_file(st_slope), read_grid_file(st_hand)), st.out);
    } else if (*rf_train) {
      require_input(rt_stack);
      require_input(rt_labels);
      const Raster full = read_grid_file(rt_stack);
      const Mask labels = read_mask_file(rt_labels);
      const std::size_t x0 = rt_offset.empty() ? 0 : rt_offset[0];
      const std::size_t y0 = rt_offset.empty() ? 0 : rt_offset[1];
      const Raster window = crop(full, x0, y0, labels.width(), labels.height());
      const std::uint64_t seed = rt.seed.value_or(0);
      const auto picked = stratified_pixel_sample(labels, rt_fraction, seed);
      const SampleMatrix train = samples_from_pixels(window, &labels, picked);
      fp.seed = seed;
      fp.bootstrap = !rt_no_bootstrap;
      std::vector<std::string> names;
      for (const auto& s : full.semantics()) names.push_back(s.to_string());
      const Forest forest = fit_forest(train, fp, rt.threads, names);
      pipeline_detail::write_json(rt.out, forest.to_json());
      const auto pred = predict_forest(forest, train, rt.threads);
      std::size_t hit = 0;
      for (std::size_t i = 0; i < train.n(); ++i) hit += pred.labels[i] == train.label(i);
      nlohmann::json imp = nlohmann::json::object();
      for (const auto& [name, w] : feature_importance(forest)) imp[name] = w;
      print_json({{"n_train", train.n()},
                  {"train_accuracy", static_cast<double>(hit) / static_cast<double>(train.n())},
                  {"importances", imp}});
    } else if (*rf_predict) {
      require_input(rp_forest);
      require_input(rp_stack);
      const Forest forest = Forest::from_json(nlohmann::json::parse(fgrid_detail::read_file(rp_forest)));
      const Raster s = read_grid_file(rp_stack);
      write_mask_file(predict_raster(forest, s, rp.threads), rp.out, s.transform());
    } else if (*sample) {
      require_input(ts_scene);
      require_input(ts_hwm);
      const Raster scene = read_grid_file(ts_scene);
      const auto tiles = sample_tiles(scene, read_hwm_csv(ts_hwm), ts_tile);
      nlohmann::json list = nlohmann::json::array();
      for (std::size_t i = 0; i < tiles.size(); ++i) {
        const std::string name = pipeline_detail::tile_name(i);
        write_grid_file(tiles[i].tile, fs::path(ts.out) / name);
        list.push_back({{"name", name}, {"hwm", tiles[i].hwm.id}, {"offset", {tiles[i].x0, tiles[i].y0}}});
      }
      pipeline_detail::write_json(fs::path(ts.out) / "tiles.json", list);
      print_json({{"tiles", tiles.size()}});
    } else if (*exp) {
      if (ex_features.size() != ex_labels.size()) fail(Errc::kConfig, "--features and --labels differ in count");
      const BandSet bs = parse_band_set(ex_band_set);
      if (bs == BandSet::kCustom) fail(Errc::kConfig, "band set must be Optical4 or Full6");
      std::vector<Crop> crops;
      for (std::size_t i = 0; i < ex_features.size(); ++i) {
        require_input(ex_features[i]);
        require_input(ex_labels[i]);
        const Raster features = select_bands(read_grid_file(ex_features[i]), band_set_bands(bs));
        const std::string name = fgrid_detail::stem_path(ex_features[i]).filename().string();
        for (auto& c : make_crops(features, read_mask_file(ex_labels[i]), ex_crop, ex_stride, name))
          crops.push_back(std::move(c));
      }
      const DatasetManifest m =
          split_train_test(crops, ex_test, ex.seed.value_or(0), ex_spatial ? SplitMode::kSpatial : split_arg(ex_split));
      export_dataset(crops, m, ex.out);
      print_json({{"n_train", m.n_train}, {"n_test", m.n_test}});
    } else if (*run) {
      require_input(pr_config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(fgrid_detail::read_file(pr_config));
      } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::kConfig, std::string("config is not valid JSON: ") + e.what());
      }
      if (pr.seed) j["seed"] = *pr.seed;
      PipelineConfig c = config_from_json(j, fs::path(pr_config).parent_path());
      if (!run->get_option("--threads")->empty()) c.threads = pr.threads;
      if (!pr.out.empty()) c.output_dir = pr.out;
      const PipelineResult r = run_pipeline(c);
      nlohmann::json summary{{"heldout_accuracy", r.stage2.heldout_accuracy},
                             {"train_accuracy", r.stage2.train_accuracy},
                             {"tiles", r.stage2.tiles.size()},
                             {"n_train_crops", r.manifest.n_train},
                             {"n_test_crops", r.manifest.n_test}};
      if (r.eval) summary["iou"] = r.eval->report.iou;
      print_json(summary);
    } else if (*eval) {
      const EvalResult r = run_eval(ev_pred, ev_truth);
      const nlohmann::json j = to_json(r);
      if (!ev.out.empty()) pipeline_detail::write_json(ev.out, j);
      print_json(j);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_io() ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
