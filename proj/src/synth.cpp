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

#include "stereocamo/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "stereocamo/errors.hpp"
#include "stereocamo/renderer.hpp"

namespace stereocamo {

ScalarMap value_noise(int height, int width, int cell, int octaves, Rng& rng) {
  require(height > 0 && width > 0 && cell >= 1 && octaves >= 1, "value_noise: bad parameters");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ScalarMap out(height, width, 0.0);
  double amplitude = 1.0, total = 0.0;
  for (int o = 0; o < octaves; ++o) {
    const int step = std::max(1, cell >> o);
    const int gh = height / step + 2, gw = width / step + 2;
    ScalarMap lattice(gh, gw);
    for (auto& v : lattice.values()) v = uni(rng);
    for (int i = 0; i < height; ++i) {
      const double fy = double(i) / step;
      const int y0 = static_cast<int>(fy);
      const double ty = fy - y0;
      for (int j = 0; j < width; ++j) {
        const double fx = double(j) / step;
        const int x0 = static_cast<int>(fx);
        const double tx = fx - x0;
        const double top = (1 - tx) * lattice(y0, x0) + tx * lattice(y0, x0 + 1);
        const double bot = (1 - tx) * lattice(y0 + 1, x0) + tx * lattice(y0 + 1, x0 + 1);
        out(i, j) += amplitude * ((1 - ty) * top + ty * bot);
      }
    }
    total += amplitude;
    amplitude *= 0.5;
  }
  for (auto& v : out.values()) v /= total;
  return out;
}

std::pair<Image, Image> shifted_pair(int height, int width, int disparity, std::uint64_t seed) {
  require(disparity >= 0 && disparity < width, "shifted_pair: disparity out of range");
  Rng rng(seed);
  const int wide = width + disparity;
  const ScalarMap coarse = value_noise(height, wide, 4, 3, rng);
  std::uniform_real_distribution<double> grain(-0.15, 0.15);
  ScalarMap base(height, wide);
  for (std::size_t k = 0; k < base.size(); ++k) base[k] = std::clamp(coarse[k] + grain(rng), 0.0, 1.0);
  Image left(height, width, 3), right(height, width, 3);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int c = 0; c < 3; ++c) {
        left(i, j, c) = base(i, j);
        right(i, j, c) = base(i, j + disparity);
      }
    }
  }
  return {std::move(left), std::move(right)};
}

StereoRig benchmark_rig(const BenchmarkConfig& cfg) {
  require(cfg.width > 0 && cfg.height > 0 && cfg.supersample >= 1, "benchmark: bad image size");
  const double f = cfg.full_fx * cfg.width / cfg.full_width;
  const auto intr = CameraIntrinsics::make(f, f, (cfg.width - 1) / 2.0,
                                           std::round(cfg.height * 0.46), cfg.width, cfg.height);
  return StereoRig(intr, cfg.baseline_m, Vec3(0.0, cfg.camera_height_m, 0.0));
}

BBox3D ground_bbox(const BenchmarkConfig& cfg, double distance_m, double lateral_m, double heading_rad) {
  return BBox3D::make(Vec3(lateral_m, cfg.car_height_m / 2.0, distance_m), cfg.car_length_m,
                      cfg.car_width_m, cfg.car_height_m, heading_rad, "car");
}

Lighting nominal_lighting(const BBox3D& bbox) {
  return Lighting::make(0.6, bbox.center + Vec3(2.0, 6.0, -3.0), 0.4);
}

namespace {

struct AtlasCell {
  double u0, v0, u1, v1;
};

// Quad p0..p3 (in order around the rim) facing `normal`.
void add_quad(std::vector<Vec3>& verts, std::vector<Face>& faces, const std::array<Vec3, 4>& p,
              const Vec3& normal, const AtlasCell& uv) {
  const int base = static_cast<int>(verts.size());
  for (const auto& q : p) verts.push_back(q);
  std::array<Vec2, 4> t = {Vec2(uv.u0, uv.v0), Vec2(uv.u1, uv.v0), Vec2(uv.u1, uv.v1),
                           Vec2(uv.u0, uv.v1)};
  std::array<int, 4> idx = {0, 1, 2, 3};
  if ((p[1] - p[0]).cross(p[2] - p[0]).dot(normal) < 0.0) std::swap(idx[1], idx[3]);
  faces.push_back(Face{{base + idx[0], base + idx[1], base + idx[2]}, {t[idx[0]], t[idx[1]], t[idx[2]]}, {}});
  faces.push_back(Face{{base + idx[0], base + idx[2], base + idx[3]}, {t[idx[0]], t[idx[2]], t[idx[3]]}, {}});
}

constexpr int kAtlas = 16;  // atlas is kAtlas x kAtlas cells
constexpr int kCellTexels = 32;
constexpr int kGroundCells = kAtlas * kAtlas / 2;

AtlasCell atlas_cell(int index) {
  const int r = index / kAtlas, c = index % kAtlas;
  // Half-texel inset keeps bilinear taps inside the cell.
  const double e = 0.5 / (kAtlas * kCellTexels);
  return {double(c) / kAtlas + e, double(r) / kAtlas + e, double(c + 1) / kAtlas - e,
          double(r + 1) / kAtlas - e};
}

// The first half of the cells holds ground tiles, the rest facade tiles.
Texture background_atlas(Rng& rng) {
  const int n = kAtlas * kCellTexels;
  Image img(n, n, 3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int cell = 0; cell < kAtlas * kAtlas; ++cell) {
    const int r0 = (kAtlas - 1 - cell / kAtlas) * kCellTexels;  // v grows upward
    const int c0 = (cell % kAtlas) * kCellTexels;
    const bool ground = cell < kGroundCells;
    std::array<ScalarMap, 3> noise;
    for (auto& n : noise) n = value_noise(kCellTexels, kCellTexels, ground ? 8 : 12, 4, rng);
    for (int i = 0; i < kCellTexels; ++i) {
      for (int j = 0; j < kCellTexels; ++j) {
        const double g = 0.3 * uni(rng) - 0.15;
        double rgb[3];
        if (ground) {
          // Gray aggregate with strong blotches.
          const double v = std::clamp(0.5 + 1.6 * (noise[0](i, j) - 0.5) + g, 0.05, 0.95);
          rgb[0] = v;
          rgb[1] = v * 0.96;
          rgb[2] = v * 0.9;
        } else {
          // Facade: tinted, aperiodic plaster; contrast lives mostly in luminance.
          const double v = 0.5 + 1.8 * (noise[0](i, j) - 0.5) + 0.5 * g;
          for (int c = 0; c < 3; ++c) rgb[c] = v + 0.4 * (noise[c](i, j) - 0.5);
        }
        for (int c = 0; c < 3; ++c) img(r0 + i, c0 + j, c) = std::clamp(rgb[c], 0.0, 1.0);
      }
    }
  }
  return Texture(std::move(img));
}

Mesh background_mesh(double wall_depth, Rng& rng) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  // Consecutive tiles along a row never share a cell, so no false matches
  // appear at the tile pitch.
  std::uniform_int_distribution<int> offset(0, kGroundCells - 1);
  const int ground_offset = offset(rng), facade_offset = offset(rng);
  const double tile = 2.0;
  const double half_width = 1.6 * wall_depth;
  int iz = 0;
  for (double z = 2.0; z < wall_depth - 1e-9; z += tile, ++iz) {
    const double z1 = std::min(z + tile, wall_depth);
    int ix = 0;
    for (double x = -half_width; x < half_width - 1e-9; x += tile, ++ix) {
      const int cell = (ground_offset + ix + 11 * iz) % kGroundCells;
      add_quad(verts, faces, {Vec3(x, 0, z), Vec3(x + tile, 0, z), Vec3(x + tile, 0, z1), Vec3(x, 0, z1)},
               Vec3::UnitY(), atlas_cell(cell));
    }
  }
  const double facade = 4.0;
  int iy = 0;
  for (double y = 0.0; y < 0.6 * wall_depth; y += facade, ++iy) {
    int ix = 0;
    for (double x = -half_width; x < half_width - 1e-9; x += facade, ++ix) {
      const int cell = kGroundCells + (facade_offset + ix + 37 * iy) % kGroundCells;
      add_quad(verts, faces,
               {Vec3(x, y, wall_depth), Vec3(x + facade, y, wall_depth),
                Vec3(x + facade, y + facade, wall_depth), Vec3(x, y + facade, wall_depth)},
               -Vec3::UnitZ(), atlas_cell(cell));
    }
  }
  return Mesh(std::move(verts), std::move(faces));
}

CameraIntrinsics supersampled(const CameraIntrinsics& k, int s) {
  return CameraIntrinsics::make(k.fx * s, k.fy * s, k.cx * s + (s - 1) / 2.0, k.cy * s + (s - 1) / 2.0,
                                k.width * s, k.height * s);
}

Image box_downsample(const Image& hi, int s) {
  Image out(hi.height() / s, hi.width() / s, hi.channels());
  const double norm = 1.0 / (s * s);
  for (int i = 0; i < out.height(); ++i) {
    for (int j = 0; j < out.width(); ++j) {
      for (int c = 0; c < out.channels(); ++c) {
        double sum = 0.0;
        for (int a = 0; a < s; ++a) {
          for (int b = 0; b < s; ++b) sum += hi(i * s + a, j * s + b, c);
        }
        out(i, j, c) = sum * norm;
      }
    }
  }
  return out;
}

Image render_view(const Mesh& mesh, const Texture& atlas, const CameraPose& pose,
                  const CameraIntrinsics& k, int s) {
  const Lighting flat = Lighting::make(1.0, Vec3::Zero(), 0.0);
  const RenderOutput r = rasterize(mesh, atlas, pose, supersampled(k, s), flat);
  Image img = composite(r, Image(k.height * s, k.width * s, 3, 0.75));  // sky
  return box_downsample(img, s);
}

}  // namespace

Scene make_background_scene(const BenchmarkConfig& cfg, const std::string& id, const BBox3D& bbox,
                            double wall_depth_m, std::uint64_t seed) {
  require(wall_depth_m > 4.0, "wall depth must exceed 4 m");
  Rng rng(seed);
  const Texture atlas = background_atlas(rng);
  const Mesh mesh = background_mesh(wall_depth_m, rng);
  const StereoRig rig = benchmark_rig(cfg);
  const auto& k = rig.intrinsics();
  Image left = render_view(mesh, atlas, rig.left_pose(), k, cfg.supersample);
  Image right = render_view(mesh, atlas, rig.right_pose(), k, cfg.supersample);
  const RenderOutput depth = rasterize(mesh, atlas, rig.left_pose(), k, Lighting::make(1.0, Vec3::Zero(), 0.0));
  DisparityMap gt = render_ground_truth(depth, rig);
  return Scene{id, std::move(left), std::move(right), rig, bbox, nominal_lighting(bbox), std::move(gt)};
}

std::vector<Scene> make_benchmark(const BenchmarkConfig& cfg) {
  require(!cfg.placements.empty(), "benchmark needs at least one placement");
  std::vector<Scene> scenes;
  for (std::size_t n = 0; n < cfg.placements.size(); ++n) {
    const auto& p = cfg.placements[n];
    const BBox3D bbox = ground_bbox(cfg, p.distance_m, p.lateral_m, p.heading_deg * std::numbers::pi / 180.0);
    scenes.push_back(make_background_scene(cfg, "bench" + std::to_string(n), bbox, p.wall_depth_m,
                                           cfg.seed * 1000 + n));
  }
  return scenes;
}

Texture benign_texture(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  const ScalarMap grain = value_noise(height, width, 8, 2, rng);
  const double paint[3] = {0.62, 0.12, 0.10};
  const double glass[3] = {0.10, 0.12, 0.15};
  Image img(height, width, 3);
  for (int i = 0; i < height; ++i) {
    // Atlas rows: v in [0,1/3) body sides, [1/3,2/3) body ends and cabin sides,
    // [2/3,1] cabin top and ends. Row 0 of the image is v = 1.
    const double v = 1.0 - (i + 0.5) / height;
    for (int j = 0; j < width; ++j) {
      const double u = (j + 0.5) / width;
      const int cell = std::min(2, int(v * 3)) * 4 + std::min(3, int(u * 4));
      const double cu = u * 4 - int(u * 4), cv = v * 3 - std::min(2, int(v * 3));
      const bool cabin_side = cell == 6 || cell == 7 || cell == 9 || cell == 10;
      const bool is_glass = cabin_side && cu > 0.12 && cu < 0.88 && cv > 0.12 && cv < 0.85;
      const double* base = is_glass ? glass : paint;
      const double shade = 0.9 + 0.2 * grain(i, j);
      for (int c = 0; c < 3; ++c) img(i, j, c) = std::clamp(base[c] * shade, 0.0, 1.0);
    }
  }
  return Texture(std::move(img));
}

}  // namespace stereocamo
