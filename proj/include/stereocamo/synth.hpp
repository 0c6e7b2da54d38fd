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
#include "stereocamo/geometry.hpp"
#include "stereocamo/image.hpp"
#include "stereocamo/mesh.hpp"
#include "stereocamo/pipeline.hpp"

namespace stereocamo {

// Multi-octave value noise in [0,1]. `cell` is the coarsest lattice spacing in pixels.
ScalarMap value_noise(int height, int width, int cell, int octaves, Rng& rng);

// Random-texture stereo pair whose true disparity is `disparity` everywhere:
// right(i, j) = left(i, j + disparity).
std::pair<Image, Image> shifted_pair(int height, int width, int disparity, std::uint64_t seed);

struct ObjectPlacement {
  double distance_m = 10.0;   // depth of the box center
  double lateral_m = 0.0;     // x offset of the box center
  double heading_deg = 90.0;
  double wall_depth_m = 50.0; // backdrop distance
};

struct BenchmarkConfig {
  int width = 256;
  int height = 96;
  int supersample = 3;
  double full_fx = 721.5;      // focal length at full_width
  int full_width = 1242;
  double baseline_m = 0.54;
  double camera_height_m = 1.65;
  double car_length_m = 4.2;
  double car_width_m = 1.8;
  double car_height_m = 1.5;
  std::vector<ObjectPlacement> placements = {
      {8.0, -1.5, 90.0, 45.0}, {10.0, 1.0, 60.0, 50.0}, {12.0, -0.5, 120.0, 55.0},
      {14.0, 2.0, 0.0, 60.0},  {16.0, 0.0, 90.0, 40.0}};
  std::uint64_t seed = 7;
};

StereoRig benchmark_rig(const BenchmarkConfig& cfg);

// Sedan-sized box resting on the ground plane.
BBox3D ground_bbox(const BenchmarkConfig& cfg, double distance_m, double lateral_m, double heading_rad);

// Nominal lighting: light above and behind the camera side of the object.
Lighting nominal_lighting(const BBox3D& bbox);

// Ground plane and facade rendered into both eyes, with background ground truth.
Scene make_background_scene(const BenchmarkConfig& cfg, const std::string& id, const BBox3D& bbox,
                            double wall_depth_m, std::uint64_t seed);

std::vector<Scene> make_benchmark(const BenchmarkConfig& cfg);

// Ordinary paint job for the sedan atlas: body color with dark glass on the cabin sides.
Texture benign_texture(int height, int width, std::uint64_t seed);

}  // namespace stereocamo
