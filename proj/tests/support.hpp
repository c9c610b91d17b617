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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "floodmap/floodmap.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh per-process scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("floodmap_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline floodmap::Grid random_grid(std::mt19937_64& rng, std::size_t w, std::size_t h, double lo = 0.0,
                                  double hi = 1.0, double nan_rate = 0.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::bernoulli_distribution nan(nan_rate);
  std::vector<float> v(w * h);
  for (auto& x : v) x = nan_rate > 0.0 && nan(rng) ? floodmap::kNoData : static_cast<float>(u(rng));
  return floodmap::Grid(w, h, std::move(v));
}

inline floodmap::Mask random_mask(std::mt19937_64& rng, std::size_t w, std::size_t h, double p_flood,
                                  double p_nodata = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint8_t> v(w * h);
  for (auto& x : v) {
    const double r = u(rng);
    x = r < p_nodata ? floodmap::kMaskNoData : r < p_nodata + p_flood ? floodmap::kMaskFlood : floodmap::kMaskDry;
  }
  return floodmap::Mask(w, h, std::move(v));
}

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
