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

#include "stereocamo/image.hpp"

namespace stereocamo {

// Background ring around the object and the reference disparities on it.
struct BackgroundDepthContext {
  Mask boundary;            // m_bg
  ScalarMap boundary_disp;  // d * m_bg
  double mean_disp = 0.0;   // sum(d_bg) / sum(m_bg)
  int kernel = 3;
};

struct PixelIndex {
  int row = 0;
  int col = 0;
  bool operator==(const PixelIndex&) const = default;
};

// Object mask split by the line through two boundary anchors.
struct RegionSegmentation {
  Mask upper;
  Mask lower;
  PixelIndex left_anchor;
  PixelIndex right_anchor;

  // True when (row, col) lies strictly above the anchor line.
  bool above(int row, int col) const;
};

// Stride-1, same-padded max filter with an odd square kernel.
Mask dilate(const Mask& mask, int kernel);

// p_k scaled to an image width from its full-resolution value (forced odd, >= 3).
int scaled_kernel(int image_width, int full_kernel = 40, int full_width = 1242);

BackgroundDepthContext boundary_depth(const Mask& object, const ScalarMap& disparity, int kernel);

RegionSegmentation segment_regions(const Mask& object, const ScalarMap& disparity,
                                   const BackgroundDepthContext& ctx);

}  // namespace stereocamo
