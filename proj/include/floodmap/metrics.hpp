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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodmap/error.hpp"
#include "floodmap/raster.hpp"

namespace floodmap {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix counts;
  std::vector<std::string> undefined_flags;  // scores whose quotient was 0/0
};

/// Pixel-wise confusion counts. Nodata in either mask excludes the pixel.
inline ConfusionMatrix confusion(const Mask& pred, const Mask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height())
    fail(Errc::kShape, "prediction and truth masks differ in size");
  ConfusionMatrix cm;
  auto p = pred.values();
  auto t = truth.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == kMaskNoData || t[i] == kMaskNoData) continue;
    if (p[i] == kMaskFlood)
      (t[i] == kMaskFlood ? cm.tp : cm.fp)++;
    else
      (t[i] == kMaskFlood ? cm.fn : cm.tn)++;
  }
  return cm;
}

/// Derived scores. A 0/0 quotient is reported as 0 and named in undefined_flags.
inline MetricsReport scores(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(Errc::kEmptyInput, "confusion matrix has no valid pixels");
  MetricsReport r;
  r.counts = cm;
  auto ratio = [&](std::uint64_t num, std::uint64_t den, const char* name) {
    if (den == 0) {
      r.undefined_flags.emplace_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(cm.tp, cm.tp + cm.fp, "precision");
  r.recall = ratio(cm.tp, cm.tp + cm.fn, "recall");
  r.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, "f1");
  r.iou = ratio(cm.tp, cm.tp + cm.fp + cm.fn, "iou");
  r.accuracy = ratio(cm.tp + cm.tn, cm.total(), "accuracy");
  return r;
}

/// F1 implied by an IoU computed from the same confusion matrix.
inline double f1_from_iou(double iou) {
  if (!(iou >= 0.0 && iou <= 1.0)) fail(Errc::kValue, "IoU must lie in [0, 1]");
  return 2.0 * iou / (1.0 + iou);
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}};
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["iou"] = r.iou;
  j["accuracy"] = r.accuracy;
  j["undefined_flags"] = r.undefined_flags;
  return j;
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  try {
    ConfusionMatrix cm;
    const auto& c = j.at("counts");
    cm.tp = c.at("tp").get<std::uint64_t>();
    cm.fp = c.at("fp").get<std::uint64_t>();
    cm.fn = c.at("fn").get<std::uint64_t>();
    cm.tn = c.at("tn").get<std::uint64_t>();
    return scores(cm);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, std::string("bad metrics document: ") + e.what());
  }
}

}  // namespace floodmap
