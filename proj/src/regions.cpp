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

#include "stereocamo/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stereocamo/errors.hpp"

namespace stereocamo {

Mask dilate(const Mask& mask, int kernel) {
  require(kernel >= 1 && kernel % 2 == 1, "dilation kernel must be odd");
  const int r = kernel / 2;
  const int H = mask.height(), W = mask.width();
  // Separable max: rows then columns.
  Mask horiz(H, W, 0);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      std::uint8_t v = 0;
      for (int k = std::max(0, j - r); k <= std::min(W - 1, j + r) && !v; ++k) v = mask(i, k) ? 1 : 0;
      horiz(i, j) = v;
    }
  }
  Mask out(H, W, 0);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      std::uint8_t v = 0;
      for (int k = std::max(0, i - r); k <= std::min(H - 1, i + r) && !v; ++k) v = horiz(k, j);
      out(i, j) = v;
    }
  }
  return out;
}

int scaled_kernel(int image_width, int full_kernel, int full_width) {
  int k = static_cast<int>(std::lround(static_cast<double>(full_kernel) * image_width / full_width));
  if (k % 2 == 0) ++k;
  return std::max(3, k);
}

BackgroundDepthContext boundary_depth(const Mask& object, const ScalarMap& disparity, int kernel) {
  require(object.same_shape(disparity), "boundary_depth: mask and disparity sizes differ");
  require(kernel >= 3 && kernel % 2 == 1, "boundary kernel must be odd and at least 3");
  require(count(object) > 0, "boundary_depth: object mask is empty");
  BackgroundDepthContext ctx;
  ctx.kernel = kernel;
  ctx.boundary = dilate(object, kernel);
  ctx.boundary_disp = ScalarMap(object.height(), object.width(), 0.0);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < object.size(); ++k) {
    ctx.boundary[k] = (ctx.boundary[k] && !object[k]) ? 1 : 0;
    if (ctx.boundary[k]) {
      ctx.boundary_disp[k] = disparity[k];
      sum += disparity[k];
      ++n;
    }
  }
  if (n == 0) throw ValidationError("no background ring around the object");
  ctx.mean_disp = sum / static_cast<double>(n);
  return ctx;
}

bool RegionSegmentation::above(int row, int col) const {
  const double dc = right_anchor.col - left_anchor.col;
  const double t = dc == 0.0 ? 0.0 : (col - left_anchor.col) / dc;
  const double line_row = left_anchor.row + t * (right_anchor.row - left_anchor.row);
  return row < line_row;
}

RegionSegmentation segment_regions(const Mask& object, const ScalarMap& disparity,
                                   const BackgroundDepthContext& ctx) {
  require(object.same_shape(disparity) && object.same_shape(ctx.boundary),
          "segment_regions: input sizes differ");
  const int H = object.height(), W = object.width();
  int first_col = W, last_col = -1;
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      if (!object(i, j)) continue;
      first_col = std::min(first_col, j);
      last_col = std::max(last_col, j);
    }
  }
  require(last_col > first_col, "segment_regions: object must span at least two columns");

  auto touches_ring = [&](int i, int j) {
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if (a >= 0 && a < H && b >= 0 && b < W && ctx.boundary(a, b)) return true;
      }
    }
    return false;
  };
  auto anchor_in = [&](int col) {
    PixelIndex best{-1, col};
    double best_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < H; ++i) {
      if (!object(i, col) || !touches_ring(i, col)) continue;
      const double gap = std::abs(disparity(i, col) - ctx.mean_disp);
      if (gap < best_gap) {
        best_gap = gap;
        best.row = i;
      }
    }
    if (best.row < 0) throw ValidationError("segment_regions: no boundary-adjacent object pixel");
    return best;
  };

  RegionSegmentation seg;
  seg.left_anchor = anchor_in(first_col);
  seg.right_anchor = anchor_in(last_col);
  seg.upper = Mask(H, W, 0);
  seg.lower = Mask(H, W, 0);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      if (!object(i, j)) continue;
      (seg.above(i, j) ? seg.upper : seg.lower)(i, j) = 1;
    }
  }
  return seg;
}

}  // namespace stereocamo
