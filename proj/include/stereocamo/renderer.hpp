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

#include <array>
#include <cstdint>
#include <vector>

#include "stereocamo/geometry.hpp"
#include "stereocamo/image.hpp"
#include "stereocamo/mesh.hpp"

namespace stereocamo {

// Linear map from texels to one pixel: color_c = shading * sum_k weight_k * texel_k[c],
// before clamping. `saturated` has bit c set when channel c was clipped at 1.
struct TexelSample {
  std::array<std::int32_t, 4> texel{};
  std::array<double, 4> weight{};
  double shading = 1.0;
  std::uint8_t saturated = 0;
};

struct RenderOutput {
  Image image;                       // RGB, zero outside the mask
  Mask mask;
  ScalarMap depth;                   // camera-frame z, 0 outside the mask
  Grid<std::int32_t> sample_index;   // index into samples, -1 outside the mask
  std::vector<TexelSample> samples;
  int texture_width = 0;
  int texture_height = 0;

  const TexelSample* jacobian(int row, int col) const {
    const auto idx = sample_index(row, col);
    return idx < 0 ? nullptr : &samples[static_cast<std::size_t>(idx)];
  }
};

struct RasterOptions {
  double near_plane = 0.05;
  bool cull_backfaces = true;
};

// Bilinear sample location of a UV coordinate; v runs bottom-to-top as in OBJ.
TexelSample bilinear_footprint(const Vec2& uv, int texture_width, int texture_height);

RenderOutput rasterize(const Mesh& world_mesh, const Texture& texture, const CameraPose& pose,
                       const CameraIntrinsics& intrinsics, const Lighting& lighting,
                       const RasterOptions& options = {});

// Object pixels where the mask is set, background elsewhere.
Image composite(const RenderOutput& render, const Image& background);

// Accumulates d(loss)/d(texture) from d(loss)/d(pixel) through the recorded
// texel Jacobian. Saturated channels pass no gradient.
Image backward_texture(const RenderOutput& render, const Image& pixel_grad);

// Same, accumulated into an existing gradient buffer of texture shape.
void accumulate_texture_grad(const RenderOutput& render, const Image& pixel_grad, Image& texture_grad);

}  // namespace stereocamo
