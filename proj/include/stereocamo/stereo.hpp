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

#include <optional>
#include <vector>

#include "stereocamo/image.hpp"

namespace stereocamo {

enum class MatchCost { SAD, ZNCC };

struct MatcherConfig {
  int d_max = 32;
  int patch_radius = 2;
  double temperature = 0.5;
  MatchCost cost = MatchCost::SAD;

  void validate() const;
};

// Half-open pixel rectangle [row0,row1) x [col0,col1).
struct PixelRect {
  int row0 = 0;
  int row1 = 0;
  int col0 = 0;
  int col1 = 0;

  bool contains(int row, int col) const { return row >= row0 && row < row1 && col >= col0 && col < col1; }
  static PixelRect full(int height, int width) { return {0, height, 0, width}; }
  // Bounding rectangle of the set pixels grown by `margin`, clipped to the grid.
  static PixelRect around(const Mask& mask, int margin);
};

// Matching costs for candidates 0..d_max. Entries outside the evaluated region are zero.
class CostVolume {
 public:
  CostVolume(int height, int width, int candidates)
      : height_(height), width_(width), candidates_(candidates),
        data_(static_cast<std::size_t>(height) * width * candidates, 0.0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int candidates() const { return candidates_; }

  double& operator()(int row, int col, int d) { return data_[index(row, col, d)]; }
  double operator()(int row, int col, int d) const { return data_[index(row, col, d)]; }
  std::span<const double> at(int row, int col) const {
    return {data_.data() + index(row, col, 0), static_cast<std::size_t>(candidates_)};
  }

 private:
  std::size_t index(int row, int col, int d) const {
    return (static_cast<std::size_t>(row) * width_ + col) * candidates_ + d;
  }
  int height_, width_, candidates_;
  std::vector<double> data_;
};

// cost(i,j,d) compares the left patch at (i,j) with the right patch at (i,j-d)
// on luma, with edge clamping. SAD sums absolute differences; ZNCC stores
// 1 - correlation in [0,2].
CostVolume cost_volume(const Image& left, const Image& right, const MatcherConfig& cfg,
                       std::optional<PixelRect> region = std::nullopt);

// disp = sum_d d * softmax_d(-cost/temperature), max-subtracted.
DisparityMap soft_argmin(const CostVolume& cv, double temperature,
                         std::optional<PixelRect> region = std::nullopt);

// d(loss)/d(cost) given d(loss)/d(disp): -p_d (d - disp) / temperature * disp_grad.
CostVolume soft_argmin_backward(const CostVolume& cv, double temperature,
                                const DisparityMap& disp_grad,
                                std::optional<PixelRect> region = std::nullopt);

DisparityMap predict_disparity(const Image& left, const Image& right, const MatcherConfig& cfg,
                               std::optional<PixelRect> region = std::nullopt);

// argmin_d cost, ties toward the smaller candidate.
DisparityMap wta_baseline(const Image& left, const Image& right, const MatcherConfig& cfg,
                          std::optional<PixelRect> region = std::nullopt);

struct StereoGradient {
  Image left;
  Image right;
};

// Exact chain rule through soft_argmin and the cost volume into both RGB inputs.
StereoGradient backward_disparity(const Image& left, const Image& right, const MatcherConfig& cfg,
                                  const DisparityMap& disp_grad,
                                  std::optional<PixelRect> region = std::nullopt);

// Sign pattern of every luma difference the SAD cost touches. Two inputs with
// equal patterns lie in the same linear piece of the SAD cost.
std::vector<signed char> sad_sign_pattern(const Image& left, const Image& right,
                                          const MatcherConfig& cfg,
                                          std::optional<PixelRect> region = std::nullopt);

}  // namespace stereocamo
