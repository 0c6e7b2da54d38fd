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

#include "stereocamo/image.hpp"

namespace stereocamo {

std::size_t count(const Mask& mask) {
  std::size_t n = 0;
  for (auto v : mask.values()) n += v != 0;
  return n;
}

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  require(height >= 0 && width >= 0, "image dimensions must be non-negative");
  require(channels >= 1, "image needs at least one channel");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

void Image::clamp01() {
  for (auto& v : data_) v = std::clamp(v, 0.0, 1.0);
}

ScalarMap to_luma(const Image& rgb) {
  require(rgb.channels() == 3 || rgb.channels() == 1, "luma expects an RGB or gray image");
  ScalarMap out(rgb.height(), rgb.width());
  for (int i = 0; i < rgb.height(); ++i) {
    for (int j = 0; j < rgb.width(); ++j) {
      out(i, j) = rgb.channels() == 1
                      ? rgb(i, j, 0)
                      : kLumaR * rgb(i, j, 0) + kLumaG * rgb(i, j, 1) + kLumaB * rgb(i, j, 2);
    }
  }
  return out;
}

Image luma_backward(const ScalarMap& grad_luma) {
  Image out(grad_luma.height(), grad_luma.width(), 3);
  for (int i = 0; i < grad_luma.height(); ++i) {
    for (int j = 0; j < grad_luma.width(); ++j) {
      const double g = grad_luma(i, j);
      out(i, j, 0) = kLumaR * g;
      out(i, j, 1) = kLumaG * g;
      out(i, j, 2) = kLumaB * g;
    }
  }
  return out;
}

}  // namespace stereocamo
