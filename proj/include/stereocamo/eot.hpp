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
#include <random>

#include "stereocamo/image.hpp"
#include "stereocamo/mesh.hpp"

namespace stereocamo {

using Rng = std::mt19937_64;

struct EoTConfig {
  double light_offset_range = 3.0;  // +/- meters per axis around the nominal light
  double ambient_min = 0.3;
  double ambient_max = 0.9;
  double noise_sigma_max = 0.02;
  int samples_per_step = 1;

  void validate() const;
};

// One environmental draw. The noise fields are generated from noise_seed so a
// draw can be replayed exactly.
struct EoTSample {
  Lighting lighting;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

EoTSample sample_eot(Rng& rng, const EoTConfig& cfg, const Lighting& nominal);

// The nominal environment with no noise.
EoTSample nominal_sample(const Lighting& nominal);

// Adds N(0, sigma) per channel, clamps to [0,1] and marks clamped channels.
// `stream` selects an independent noise field for the same seed (0 = left, 1 = right).
void apply_noise(Image& image, double sigma, std::uint64_t seed, int stream, Image* clamped = nullptr);

}  // namespace stereocamo
