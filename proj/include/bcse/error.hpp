/* Copyright 2026 The bcse Authors. All Rights Reserved.

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

#ifndef BCSE_ERROR_HPP_
#define BCSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bcse {

enum class Errc {
  invalid_shape,
  shape_mismatch,
  invalid_axis,
  invalid_argument,
  invalid_geometry,
  format,
  parse,
  too_short,
  dataset_layout,
  split_conflict,
  silence_unavailable,
  undefined_snr,
  invalid_label,
  empty_split,
  divergence,
  state_corruption,
  invalid_config,
  corrupt_checkpoint,
  incomplete_checkpoint,
  io,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_shape: return "invalid-shape";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::invalid_axis: return "invalid-axis";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::format: return "format";
    case Errc::parse: return "parse";
    case Errc::too_short: return "too-short";
    case Errc::dataset_layout: return "dataset-layout";
    case Errc::split_conflict: return "split-conflict";
    case Errc::silence_unavailable: return "silence-unavailable";
    case Errc::undefined_snr: return "undefined-snr";
    case Errc::invalid_label: return "invalid-label";
    case Errc::empty_split: return "empty-split";
    case Errc::divergence: return "divergence";
    case Errc::state_corruption: return "state-corruption";
    case Errc::invalid_config: return "invalid-config";
    case Errc::corrupt_checkpoint: return "corrupt-checkpoint";
    case Errc::incomplete_checkpoint: return "incomplete-checkpoint";
    case Errc::io: return "io";
  }
  return "unknown";
}

// Every failure in the library is reported through this type; code() lets
// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + " error: " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bcse

#endif  // BCSE_ERROR_HPP_
