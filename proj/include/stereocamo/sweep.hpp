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

#include "stereocamo/eot.hpp"
#include "stereocamo/metrics.hpp"
#include "stereocamo/pipeline.hpp"

namespace stereocamo {

struct EvalFrames {
  StereoFrame adversarial;
  StereoFrame benign;
  EvalRecord record;
};

// Renders both textures under the same environment and scores the adversarial
// disparity against the benign one.
EvalFrames evaluate_textures(const AttackScene& scene, const Texture& adversarial,
                             const Texture& benign, const EoTSample& env,
                             const MatcherConfig& matcher, const MetricConfig& metrics);

EvalRecord evaluate_scene(const AttackScene& scene, const Texture& adversarial,
                          const Texture& benign, const EoTSample& env,
                          const MatcherConfig& matcher, const MetricConfig& metrics);

struct WeatherPreset {
  std::string name;
  bool randomized = false;        // false: nominal lighting, no noise
  EoTConfig eot;
  double light_intensity_scale = 1.0;
};

// nominal, morning, midday, sunset, night, foggy, rainy.
std::vector<WeatherPreset> weather_presets();
WeatherPreset find_weather(const std::string& name);

EoTSample draw_weather(const WeatherPreset& preset, const Lighting& nominal, Rng& rng);

struct DistanceBin {
  double lo = 0.0;
  double hi = 0.0;  // lo == hi pins the distance
};

struct SweepSpec {
  std::vector<DistanceBin> distance_bins = {{3.0, 9.0}, {9.0, 15.0}, {15.0, 20.0}};
  std::vector<double> headings_deg = {0, 30, 60, 90, 120, 150, 180, 210, 240, 270, 300, 330};
  std::vector<std::string> weather = {"morning", "midday", "sunset", "night", "foggy", "rainy"};
  int samples_per_cell = 1;
  std::uint64_t seed = 0;
  int threads = 1;  // worker threads; 0 uses the hardware concurrency

  void validate() const;
  std::size_t cell_count() const {
    return distance_bins.size() * headings_deg.size() * weather.size();
  }
};

// Moves the box to `distance_m` from the left camera along the same azimuth,
// keeping its height above the ground, and sets the heading.
BBox3D place_at_viewpoint(const Scene& scene, double distance_m, double heading_rad);

// One record per (distance bin, heading, weather, sample), in that nesting order.
// Each cell draws from its own seeded stream, so the output does not depend on
// the thread count.
std::vector<EvalRecord> run_sweep(const Scene& scene, const Mesh& canonical_mesh,
                                  const Texture& adversarial, const Texture& benign,
                                  const AttackSettings& settings, const SweepSpec& spec,
                                  const MetricConfig& metrics);

}  // namespace stereocamo
