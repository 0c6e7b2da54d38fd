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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "stereocamo/image.hpp"

namespace stereocamo::testing {

inline Image random_image(int h, int w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0,
                          int channels = 3) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(h, w, channels);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

inline ScalarMap random_map(int h, int w, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarMap m(h, w);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

// Central difference of f along coordinate k of params.
inline double central_difference(std::span<double> params, std::size_t k, double step,
                                 const std::function<double()>& f) {
  const double saved = params[k];
  params[k] = saved + step;
  const double up = f();
  params[k] = saved - step;
  const double down = f();
  params[k] = saved;
  return (up - down) / (2.0 * step);
}

inline double rel_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Random-texture pair with right(i, j) = left(i, j + d); the true disparity is
// d wherever the left pixel's match lies inside the right image (j >= d).
inline std::pair<Image, Image> shifted_random_pair(int h, int w, int d, std::mt19937_64& rng) {
  const Image wide = random_image(h, w + d, rng);
  Image left(h, w), right(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < 3; ++c) {
        left(i, j, c) = wide(i, j, c);
        right(i, j, c) = wide(i, j + d, c);
      }
    }
  }
  return {left, right};
}

}  // namespace stereocamo::testing
