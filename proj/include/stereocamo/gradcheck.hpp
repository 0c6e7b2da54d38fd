/*
Copyright 2026 The stereocamo Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stereocamo {

struct GradcheckConfig {
  int texture_size = 16;
  int image_height = 48;
  int image_width = 64;
  int d_max = 16;
  double step = 1e-3;               // central-difference step
  double segment_tolerance = 1e-4;  // renderer, matcher and individual losses
  double chain_tolerance = 1e-3;    // texture -> total loss
  double magnitude_floor = 1e-6;    // gradients below this in both routes are not scored
  int matcher_coords = 400;         // sampled image coordinates per matcher check
  int lighting_draws = 2;           // EoT lighting draws for the renderer check
  std::uint64_t seed = 0;
  bool inject_bug = false;          // negative control: corrupt analytic texture gradients

  void validate() const;
};

struct SegmentResult {
  std::string name;
  double worst_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;      // coordinates straddling a kink
  std::size_t below_floor = 0;  // both gradients smaller than the magnitude floor
  double tolerance = 0.0;

  bool passed() const { return checked > 0 && worst_rel_error < tolerance; }
};

struct GradcheckReport {
  std::vector<SegmentResult> segments;
  double seconds = 0.0;

  bool passed() const;
  std::string format() const;
};

GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

// |a - n| / max(|a|, |n|, floor). Entries where both magnitudes are at or
// below the floor are not scored.
double relative_error(double analytic, double numeric, double floor);

}  // namespace stereocamo
