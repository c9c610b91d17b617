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

#include <stdexcept>
#include <string>
#include <string_view>

namespace floodmap {

/// Failure categories surfaced by the library. The CLI maps kIo to exit
/// code 2 and everything else to exit code 1.
enum class Errc {
  kFormat,
  kSizeMismatch,
  kUnsupportedFormat,
  kIo,
  kOutOfBounds,
  kShape,
  kSemantics,
  kValue,
  kDegenerateInput,
  kEmptyNode,
  kEmptyDrainage,
  kMissingGeoreference,
  kDegenerateStratum,
  kDuplicateId,
  kMissingId,
  kParse,
  kPairing,
  kEmptyInput,
  kDegenerateScene,
  kDegenerateTraining,
  kConfig,
  kLocked,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kFormat: return "format error";
    case Errc::kSizeMismatch: return "size mismatch";
    case Errc::kUnsupportedFormat: return "unsupported format";
    case Errc::kIo: return "I/O error";
    case Errc::kOutOfBounds: return "out of bounds";
    case Errc::kShape: return "shape error";
    case Errc::kSemantics: return "semantics error";
    case Errc::kValue: return "value error";
    case Errc::kDegenerateInput: return "degenerate input";
    case Errc::kEmptyNode: return "empty node";
    case Errc::kEmptyDrainage: return "empty drainage";
    case Errc::kMissingGeoreference: return "missing georeference";
    case Errc::kDegenerateStratum: return "degenerate stratum";
    case Errc::kDuplicateId: return "duplicate id";
    case Errc::kMissingId: return "missing id";
    case Errc::kParse: return "parse error";
    case Errc::kPairing: return "pairing error";
    case Errc::kEmptyInput: return "empty input";
    case Errc::kDegenerateScene: return "degenerate scene";
    case Errc::kDegenerateTraining: return "degenerate training data";
    case Errc::kConfig: return "config error";
    case Errc::kLocked: return "output directory locked";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  bool is_io() const noexcept { return code_ == Errc::kIo || code_ == Errc::kLocked; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace floodmap
