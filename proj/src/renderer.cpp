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

#include "stereocamo/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stereocamo/errors.hpp"

namespace stereocamo {

namespace {

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

struct Fragment {
  int face = -1;
  std::array<double, 3> bary{};  // perspective-correct
  double depth = std::numeric_limits<double>::infinity();
};

}  // namespace

TexelSample bilinear_footprint(const Vec2& uv, int texture_width, int texture_height) {
  const double tx = uv.x() * texture_width - 0.5;
  const double ty = (1.0 - uv.y()) * texture_height - 0.5;
  const double fx0 = std::floor(tx);
  const double fy0 = std::floor(ty);
  const double ax = tx - fx0;
  const double ay = ty - fy0;
  const int x0 = std::clamp(static_cast<int>(fx0), 0, texture_width - 1);
  const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, texture_width - 1);
  const int y0 = std::clamp(static_cast<int>(fy0), 0, texture_height - 1);
  const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, texture_height - 1);
  TexelSample s;
  s.texel = {y0 * texture_width + x0, y0 * texture_width + x1, y1 * texture_width + x0,
             y1 * texture_width + x1};
  s.weight = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  return s;
}

RenderOutput rasterize(const Mesh& world_mesh, const Texture& texture, const CameraPose& pose,
                       const CameraIntrinsics& intrinsics, const Lighting& lighting,
                       const RasterOptions& options) {
  const int H = intrinsics.height;
  const int W = intrinsics.width;
  std::vector<Fragment> frags(static_cast<std::size_t>(H) * W);

  const auto& verts = world_mesh.vertices();
  const auto& faces = world_mesh.faces();
  for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
    const Face& f = faces[fi];
    const Vec3& p0 = verts[f.vertex[0]];
    if (options.cull_backfaces && f.normal.dot(pose.position - p0) <= 0.0) continue;

    std::array<Vec3, 3> q;
    bool in_front = true;
    for (int k = 0; k < 3; ++k) {
      q[k] = pose.to_camera(verts[f.vertex[k]]);
      in_front = in_front && q[k].z() >= options.near_plane;
    }
    if (!in_front) continue;

    std::array<double, 3> su, sv, inv_z;
    for (int k = 0; k < 3; ++k) {
      inv_z[k] = 1.0 / q[k].z();
      su[k] = intrinsics.fx * q[k].x() * inv_z[k] + intrinsics.cx;
      sv[k] = intrinsics.fy * q[k].y() * inv_z[k] + intrinsics.cy;
    }
    const double area = edge(su[0], sv[0], su[1], sv[1], su[2], sv[2]);
    if (std::abs(area) < 1e-12) continue;

    const int c0 = std::max(0, static_cast<int>(std::ceil(*std::min_element(su.begin(), su.end()))));
    const int c1 = std::min(W - 1, static_cast<int>(std::floor(*std::max_element(su.begin(), su.end()))));
    const int r0 = std::max(0, static_cast<int>(std::ceil(*std::min_element(sv.begin(), sv.end()))));
    const int r1 = std::min(H - 1, static_cast<int>(std::floor(*std::max_element(sv.begin(), sv.end()))));

    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double px = c, py = r;
        const double w0 = edge(su[1], sv[1], su[2], sv[2], px, py) / area;
        const double w1 = edge(su[2], sv[2], su[0], sv[0], px, py) / area;
        const double w2 = edge(su[0], sv[0], su[1], sv[1], px, py) / area;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double iz = w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2];
        const double z = 1.0 / iz;
        Fragment& frag = frags[static_cast<std::size_t>(r) * W + c];
        if (!(z < frag.depth)) continue;
        frag.face = fi;
        frag.depth = z;
        frag.bary = {w0 * inv_z[0] * z, w1 * inv_z[1] * z, w2 * inv_z[2] * z};
      }
    }
  }

  RenderOutput out;
  out.image = Image(H, W, 3, 0.0);
  out.mask = Mask(H, W, 0);
  out.depth = ScalarMap(H, W, 0.0);
  out.sample_index = Grid<std::int32_t>(H, W, -1);
  out.texture_width = texture.width();
  out.texture_height = texture.height();

  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const Fragment& frag = frags[static_cast<std::size_t>(r) * W + c];
      if (frag.face < 0) continue;
      const Face& f = faces[frag.face];
      Vec2 uv = Vec2::Zero();
      Vec3 world = Vec3::Zero();
      for (int k = 0; k < 3; ++k) {
        uv += frag.bary[k] * f.uv[k];
        world += frag.bary[k] * verts[f.vertex[k]];
      }
      uv = uv.cwiseMax(0.0).cwiseMin(1.0);

      TexelSample s = bilinear_footprint(uv, texture.width(), texture.height());
      double shade = lighting.ambient;
      if (lighting.point_light_intensity > 0.0) {
        const Vec3 to_light = lighting.point_light_position - world;
        const double len = to_light.norm();
        if (len > 0.0) shade += lighting.point_light_intensity * std::max(0.0, f.normal.dot(to_light) / len);
      }
      s.shading = std::clamp(shade, 0.0, 1.0);

      const auto tv = texture.values();
      for (int ch = 0; ch < 3; ++ch) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += s.weight[k] * tv[static_cast<std::size_t>(s.texel[k]) * 3 + ch];
        v *= s.shading;
        if (v > 1.0) {
          s.saturated |= static_cast<std::uint8_t>(1u << ch);
          v = 1.0;
        } else if (v < 0.0) {
          s.saturated |= static_cast<std::uint8_t>(1u << ch);
          v = 0.0;
        }
        out.image(r, c, ch) = v;
      }
      out.mask(r, c) = 1;
      out.depth(r, c) = frag.depth;
      out.sample_index(r, c) = static_cast<std::int32_t>(out.samples.size());
      out.samples.push_back(s);
    }
  }
  return out;
}

Image composite(const RenderOutput& render, const Image& background) {
  require(background.same_extent(render.mask) && background.channels() == 3,
          "composite: render and background sizes differ");
  Image out = background;
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      if (!render.mask(r, c)) continue;
      for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = render.image(r, c, ch);
    }
  }
  return out;
}

void accumulate_texture_grad(const RenderOutput& render, const Image& pixel_grad, Image& texture_grad) {
  require(pixel_grad.same_extent(render.mask) && pixel_grad.channels() == 3,
          "backward_texture: gradient size differs from render");
  require(texture_grad.height() == render.texture_height &&
              texture_grad.width() == render.texture_width && texture_grad.channels() == 3,
          "backward_texture: texture gradient has the wrong shape");
  auto g = texture_grad.values();
  for (int r = 0; r < render.mask.height(); ++r) {
    for (int c = 0; c < render.mask.width(); ++c) {
      const TexelSample* s = render.jacobian(r, c);
      if (!s) continue;
      for (int ch = 0; ch < 3; ++ch) {
        if (s->saturated & (1u << ch)) continue;
        const double gp = pixel_grad(r, c, ch) * s->shading;
        if (gp == 0.0) continue;
        for (int k = 0; k < 4; ++k) g[static_cast<std::size_t>(s->texel[k]) * 3 + ch] += s->weight[k] * gp;
      }
    }
  }
}

Image backward_texture(const RenderOutput& render, const Image& pixel_grad) {
  Image grad(render.texture_height, render.texture_width, 3, 0.0);
  accumulate_texture_grad(render, pixel_grad, grad);
  return grad;
}

}  // namespace stereocamo
