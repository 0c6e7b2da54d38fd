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

#include "stereocamo/losses.hpp"

#include <limits>
#include <sstream>

#include "stereocamo/errors.hpp"

namespace stereocamo {

DisparityLoss merging_loss(const DisparityMap& disp, const RegionSegmentation& seg,
                           const BackgroundDepthContext& ctx) {
  require(disp.same_shape(seg.upper) && disp.same_shape(ctx.boundary),
          "merging_loss: input sizes differ");
  double obj_sum[2] = {0, 0}, bg_sum[2] = {0, 0};
  std::size_t obj_n[2] = {0, 0}, bg_n[2] = {0, 0};
  for (int i = 0; i < disp.height(); ++i) {
    for (int j = 0; j < disp.width(); ++j) {
      if (seg.upper(i, j)) { obj_sum[0] += disp(i, j); ++obj_n[0]; }
      if (seg.lower(i, j)) { obj_sum[1] += disp(i, j); ++obj_n[1]; }
      if (ctx.boundary(i, j)) {
        const int side = seg.above(i, j) ? 0 : 1;
        bg_sum[side] += ctx.boundary_disp(i, j);
        ++bg_n[side];
      }
    }
  }
  DisparityLoss out;
  out.grad = ScalarMap(disp.height(), disp.width(), 0.0);
  double coeff[2] = {0, 0};
  for (int side = 0; side < 2; ++side) {
    const bool omitted = obj_n[side] == 0 || bg_n[side] == 0;
    (side == 0 ? out.upper_omitted : out.lower_omitted) = omitted;
    if (omitted) continue;
    const double gap = obj_sum[side] / obj_n[side] - bg_sum[side] / bg_n[side];
    out.value += gap * gap;
    coeff[side] = 2.0 * gap / static_cast<double>(obj_n[side]);
  }
  for (std::size_t k = 0; k < disp.size(); ++k) {
    if (seg.upper[k]) out.grad[k] = coeff[0];
    else if (seg.lower[k]) out.grad[k] = coeff[1];
  }
  return out;
}

namespace {

DisparityLoss mask_mse(const DisparityMap& disp, const Mask& object, double target) {
  require(disp.same_shape(object), "loss: mask and disparity sizes differ");
  const std::size_t n = count(object);
  require(n > 0, "loss: object mask is empty");
  DisparityLoss out;
  out.grad = ScalarMap(disp.height(), disp.width(), 0.0);
  for (std::size_t k = 0; k < disp.size(); ++k) {
    if (!object[k]) continue;
    const double e = disp[k] - target;
    out.value += e * e;
    out.grad[k] = 2.0 * e / static_cast<double>(n);
  }
  out.value /= static_cast<double>(n);
  return out;
}

}  // namespace

DisparityLoss appearing_loss(const DisparityMap& disp, const Mask& object, double d_max) {
  return mask_mse(disp, object, d_max);
}

DisparityLoss hiding_loss(const DisparityMap& disp, const Mask& object) {
  return mask_mse(disp, object, 0.0);
}

TextureLoss tv_loss(const Image& t) {
  require(t.height() >= 2 && t.width() >= 2, "tv_loss: texture must be at least 2x2");
  const double norm = static_cast<double>(t.height()) * t.width();
  TextureLoss out;
  out.grad = Image(t.height(), t.width(), t.channels(), 0.0);
  for (int i = 0; i < t.height(); ++i) {
    for (int j = 0; j < t.width(); ++j) {
      for (int c = 0; c < t.channels(); ++c) {
        if (j + 1 < t.width()) {
          const double d = t(i, j + 1, c) - t(i, j, c);
          out.value += d * d;
          out.grad(i, j + 1, c) += 2.0 * d / norm;
          out.grad(i, j, c) -= 2.0 * d / norm;
        }
        if (i + 1 < t.height()) {
          const double d = t(i + 1, j, c) - t(i, j, c);
          out.value += d * d;
          out.grad(i + 1, j, c) += 2.0 * d / norm;
          out.grad(i, j, c) -= 2.0 * d / norm;
        }
      }
    }
  }
  out.value /= norm;
  return out;
}

Palette default_palette() {
  Palette p;
  const double levels[3] = {0.1, 0.5, 0.9};
  for (double r : levels)
    for (double g : levels)
      for (double b : levels) p.push_back({r, g, b});
  for (double v : {0.05, 0.3, 0.7}) p.push_back({v, v, v});
  return p;
}

Palette parse_palette(const std::string& text) {
  Palette p;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Rgb c;
    if (!(ls >> c[0])) continue;
    if (!(ls >> c[1] >> c[2]))
      throw ValidationError("palette line " + std::to_string(line_no) + ": expected three values");
    for (double v : c) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("palette line " + std::to_string(line_no) + ": values must lie in [0,1]");
    }
    p.push_back(c);
  }
  return p;
}

TextureLoss nps_loss(const Image& t, const Palette& palette) {
  require(!palette.empty(), "nps_loss: empty palette");
  require(t.channels() == 3, "nps_loss: texture must be RGB");
  const double n = static_cast<double>(t.height()) * t.width();
  TextureLoss out;
  out.grad = Image(t.height(), t.width(), 3, 0.0);
  for (int i = 0; i < t.height(); ++i) {
    for (int j = 0; j < t.width(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < palette.size(); ++k) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double e = t(i, j, c) - palette[k][c];
          d2 += e * e;
        }
        if (d2 < best) {
          best = d2;
          best_k = k;
        }
      }
      out.value += best;
      for (int c = 0; c < 3; ++c) out.grad(i, j, c) = 2.0 * (t(i, j, c) - palette[best_k][c]) / n;
    }
  }
  out.value /= n;
  return out;
}

void LossWeights::validate() const {
  require(alpha >= 0.0 && beta >= 0.0, "loss weights must be non-negative");
}

AttackMode parse_mode(const std::string& name) {
  if (name == "merge") return AttackMode::Merge;
  if (name == "appear") return AttackMode::Appear;
  if (name == "hide") return AttackMode::Hide;
  throw ValidationError("unknown attack mode '" + name + "' (expected merge, appear or hide)");
}

std::string to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::Merge: return "merge";
    case AttackMode::Appear: return "appear";
    case AttackMode::Hide: return "hide";
  }
  return "merge";
}

TotalLoss total_loss(double main_value, const Image& main_grad, const Texture& texture,
                     const Palette& palette, const LossWeights& weights) {
  weights.validate();
  require(main_grad.same_shape(texture.image()), "total_loss: gradient shape differs from texture");
  TotalLoss out;
  out.main = main_value;
  out.grad = main_grad;
  auto g = out.grad.values();
  if (weights.alpha != 0.0) {
    const TextureLoss nps = nps_loss(texture.image(), palette);
    out.nps = nps.value;
    const auto ng = nps.grad.values();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += weights.alpha * ng[k];
  }
  if (weights.beta != 0.0) {
    const TextureLoss tv = tv_loss(texture.image());
    out.tv = tv.value;
    const auto tg = tv.grad.values();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += weights.beta * tg[k];
  }
  out.value = main_value + weights.alpha * out.nps + weights.beta * out.tv;
  return out;
}

}  // namespace stereocamo
