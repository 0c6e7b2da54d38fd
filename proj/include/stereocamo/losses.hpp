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
#include <string>
#include <vector>

#include "stereocamo/image.hpp"
#include "stereocamo/mesh.hpp"
#include "stereocamo/regions.hpp"

namespace stereocamo {

// Scalar loss over a disparity map with its gradient w.r.t. that map.
struct DisparityLoss {
  double value = 0.0;
  ScalarMap grad;
  bool upper_omitted = false;
  bool lower_omitted = false;
};

// Scalar loss over a texture (or any image) with its gradient.
struct TextureLoss {
  double value = 0.0;
  Image grad;
};

// (mean obj_up - mean bg_up)^2 + (mean obj_bt - mean bg_bt)^2. Ring pixels are
// assigned to a side by the segmentation line. Empty regions drop their term.
DisparityLoss merging_loss(const DisparityMap& disp, const RegionSegmentation& seg,
                           const BackgroundDepthContext& ctx);

// mean over the mask of (disp - d_max)^2.
DisparityLoss appearing_loss(const DisparityMap& disp, const Mask& object, double d_max);

// mean over the mask of disp^2: pushes the object toward zero disparity.
DisparityLoss hiding_loss(const DisparityMap& disp, const Mask& object);

// Anisotropic squared TV over horizontal and vertical neighbours, all channels,
// divided by the texel count.
TextureLoss tv_loss(const Image& texture);

using Rgb = std::array<double, 3>;
using Palette = std::vector<Rgb>;

// 27-point lattice on {0.1,0.5,0.9}^3 followed by three grays.
Palette default_palette();

// One "r g b" triple per line; '#' starts a comment.
Palette parse_palette(const std::string& text);

// Mean over texels of the squared distance to the nearest palette color
// (ties resolve to the earliest entry).
TextureLoss nps_loss(const Image& texture, const Palette& palette);

struct LossWeights {
  double alpha = 5.0;  // printability
  double beta = 0.1;   // smoothness

  void validate() const;
};

enum class AttackMode { Merge, Appear, Hide };

AttackMode parse_mode(const std::string& name);
std::string to_string(AttackMode mode);

struct TotalLoss {
  double value = 0.0;
  double main = 0.0;
  double nps = 0.0;
  double tv = 0.0;
  Image grad;  // texture-shaped
};

// L = L_main + alpha * L_nps + beta * L_tv. `main_grad` is d(L_main)/d(texture),
// already pulled back through the matcher and renderer.
TotalLoss total_loss(double main_value, const Image& main_grad, const Texture& texture,
                     const Palette& palette, const LossWeights& weights);

}  // namespace stereocamo
