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

#include "stereocamo/eot.hpp"

#include <algorithm>
#include <cmath>

#include "stereocamo/errors.hpp"

namespace stereocamo {

void EoTConfig::validate() const {
  require(std::isfinite(light_offset_range) && light_offset_range >= 0.0,
          "light offset range must be non-negative");
  require(ambient_min <= ambient_max, "ambient range must be ordered");
  require(ambient_min >= 0.0 && ambient_max <= 1.0, "ambient range must lie in [0,1]");
  require(noise_sigma_max >= 0.0, "noise sigma must be non-negative");
  require(samples_per_step >= 1, "samples_per_step must be at least 1");
}

EoTSample sample_eot(Rng& rng, const EoTConfig& cfg, const Lighting& nominal) {
  cfg.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  EoTSample s;
  s.lighting = nominal;
  for (int k = 0; k < 3; ++k) {
    s.lighting.point_light_position[k] += uniform(-cfg.light_offset_range, cfg.light_offset_range);
  }
  s.lighting.ambient = uniform(cfg.ambient_min, cfg.ambient_max);
  s.noise_sigma = uniform(0.0, cfg.noise_sigma_max);
  s.noise_seed = rng();
  return s;
}

EoTSample nominal_sample(const Lighting& nominal) { return EoTSample{nominal, 0.0, 0}; }

void apply_noise(Image& image, double sigma, std::uint64_t seed, int stream, Image* clamped) {
  if (clamped) *clamped = Image(image.height(), image.width(), image.channels(), 0.0);
  auto v = image.values();
  if (sigma > 0.0) {
    Rng rng(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(stream + 1)));
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& x : v) x += noise(rng);
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] < 0.0 || v[k] > 1.0) {
      v[k] = std::clamp(v[k], 0.0, 1.0);
      if (clamped) clamped->values()[k] = 1.0;
    }
  }
}

}  // namespace stereocamo
