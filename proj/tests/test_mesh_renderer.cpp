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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stereocamo/eot.hpp"
#include "stereocamo/errors.hpp"
#include "stereocamo/mesh.hpp"
#include "stereocamo/renderer.hpp"
#include "test_util.hpp"

using namespace stereocamo;
using stereocamo::testing::central_difference;
using stereocamo::testing::random_image;
using stereocamo::testing::rel_error;

namespace {

constexpr double kPi = std::numbers::pi;

// Square of side s in the plane z = depth, centered at (x0, y0), facing the origin.
Mesh quad_at(double x0, double y0, double depth, double s) {
  return make_quad().transformed([&](const Vec3& p) -> Vec3 { return Vec3(x0 + s * p.x(), y0 + s * p.y(), depth); });
}

Lighting unit_light() { return Lighting::make(1.0, Vec3::Zero(), 0.0); }

// Clamp-to-edge bilinear lookup with texel centers at (k + 0.5) / size and v
// running bottom to top.
double bilinear(const Texture& t, double u, double v, int ch) {
  const double x = u * t.width() - 0.5;
  const double y = (1.0 - v) * t.height() - 0.5;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double ax = x - x0, ay = y - y0;
  auto at = [&](int r, int c) {
    return t(std::clamp(r, 0, t.height() - 1), std::clamp(c, 0, t.width() - 1), ch);
  };
  return (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
         ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
}

Texture random_texture(int h, int w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return Texture(random_image(h, w, rng, lo, hi));
}

}  // namespace

TEST(PlaceMesh, IdentityBoxLeavesVerticesUnchanged) {
  const Mesh cube = make_unit_cube();
  const Mesh placed = place_mesh(cube, BBox3D::make(Vec3::Zero(), 1, 1, 1, 0));
  ASSERT_EQ(placed.vertices().size(), cube.vertices().size());
  for (std::size_t k = 0; k < cube.vertices().size(); ++k) {
    EXPECT_LT((placed.vertices()[k] - cube.vertices()[k]).norm(), 1e-15);
  }
}

TEST(PlaceMesh, HalfTurnNegatesXAndZ) {
  const Mesh sedan = make_sedan_mesh();
  const Vec3 c(3, 1, 9);
  const Mesh a = place_mesh(sedan, BBox3D::make(c, 4, 1.8, 1.5, 0));
  const Mesh b = place_mesh(sedan, BBox3D::make(c, 4, 1.8, 1.5, kPi));
  for (std::size_t k = 0; k < a.vertices().size(); ++k) {
    const Vec3 ra = a.vertices()[k] - c, rb = b.vertices()[k] - c;
    EXPECT_NEAR(rb.x(), -ra.x(), 1e-12);
    EXPECT_NEAR(rb.y(), ra.y(), 1e-12);
    EXPECT_NEAR(rb.z(), -ra.z(), 1e-12);
  }
}

TEST(PlaceMesh, ExtentsMatchBoxDimensions) {
  const Mesh placed = place_mesh(make_unit_cube(), BBox3D::make(Vec3(1, 2, 3), 4, 1.5, 2, 0));
  const Vec3 ext = placed.extents();
  EXPECT_NEAR(ext.x(), 4.0, 1e-9);  // length
  EXPECT_NEAR(ext.y(), 2.0, 1e-9);  // height
  EXPECT_NEAR(ext.z(), 1.5, 1e-9);  // width
  const Vec3 mid = 0.5 * (placed.min_corner() + placed.max_corner());
  EXPECT_LT((mid - Vec3(1, 2, 3)).norm(), 1e-12);
  // A quarter turn swaps the horizontal extents.
  const Vec3 turned = place_mesh(make_unit_cube(), BBox3D::make(Vec3::Zero(), 4, 1.5, 2, kPi / 2)).extents();
  EXPECT_NEAR(turned.x(), 1.5, 1e-9);
  EXPECT_NEAR(turned.z(), 4.0, 1e-9);
}

TEST(Mesh, Validation) {
  std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  Face f{{0, 1, 3}, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {}};
  EXPECT_THROW(Mesh(v, {f}), ValidationError);
  f.vertex = {0, 1, 2};
  f.uv[2] = Vec2(0, 1.5);
  EXPECT_THROW(Mesh(v, {f}), ValidationError);
  f.uv[2] = Vec2(0, 1);
  const Mesh ok(v, {f});
  EXPECT_NEAR((ok.faces()[0].normal - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(Rasterize, AlignedQuadReproducesTexels) {
  // 0.1 m per pixel at depth 10: an 8x8-texel quad of side 0.8 covers exactly
  // pixels 12..19 in both directions, one texel center per pixel center.
  const auto intr = CameraIntrinsics::make(100, 100, 15.5, 15.5, 32, 32);
  std::mt19937_64 rng(1);
  const Texture tex = random_texture(8, 8, rng);
  const RenderOutput r = rasterize(quad_at(0, 0, 10, 0.8), tex, CameraPose::rectified(Vec3::Zero()), intr, unit_light());
  EXPECT_EQ(count(r.mask), 64u);
  for (int i = 12; i < 20; ++i) {
    for (int j = 12; j < 20; ++j) {
      ASSERT_TRUE(r.mask(i, j));
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.image(i, j, c), tex(i - 12, j - 12, c), 1e-12);
    }
  }
}

TEST(Rasterize, MatchesBilinearOracleOnOffsetQuad) {
  const auto intr = CameraIntrinsics::make(90, 90, 20.0, 14.0, 40, 30);
  std::mt19937_64 rng(2);
  const Texture tex = random_texture(7, 9, rng);
  const double x0 = 0.13, y0 = -0.21, depth = 6.0, side = 2.3;
  const RenderOutput r = rasterize(quad_at(x0, y0, depth, side), tex, CameraPose::rectified(Vec3::Zero()), intr, unit_light());
  std::size_t covered = 0;
  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) {
      const double X = (j - intr.cx) * depth / intr.fx;
      const double Y = -(i - intr.cy) * depth / intr.fy;
      const double u = (X - x0) / side + 0.5, v = (Y - y0) / side + 0.5;
      const bool inside = u > 1e-9 && u < 1 - 1e-9 && v > 1e-9 && v < 1 - 1e-9;
      if (!inside) continue;
      ++covered;
      ASSERT_TRUE(r.mask(i, j)) << i << "," << j;
      EXPECT_NEAR(r.depth(i, j), depth, 1e-12);
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.image(i, j, c), bilinear(tex, u, v, c), 1e-12);
    }
  }
  EXPECT_EQ(count(r.mask), covered);
}

TEST(Rasterize, BlackTextureIsBlackUnderAnyLighting) {
  const auto intr = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const Mesh car = place_mesh(make_sedan_mesh(), BBox3D::make(Vec3(0, 0, 5), 3, 1.4, 1.2, 0.7));
  std::mt19937_64 rng(3);
  for (int n = 0; n < 5; ++n) {
    const EoTSample env = sample_eot(rng, EoTConfig{}, Lighting::make(0.6, Vec3(2, 5, 2), 0.4));
    const RenderOutput r = rasterize(car, Texture(8, 8, 0.0), CameraPose::rectified(Vec3::Zero()), intr, env.lighting);
    ASSERT_GT(count(r.mask), 0u);
    for (double v : r.image.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Rasterize, LinearInTexture) {
  const auto intr = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const Mesh car = place_mesh(make_sedan_mesh(), BBox3D::make(Vec3(0.2, 0, 4), 3, 1.4, 1.2, 2.2));
  const Lighting light = Lighting::make(0.5, Vec3(3, 4, 1), 0.45);
  const auto pose = CameraPose::rectified(Vec3::Zero());
  std::mt19937_64 rng(4);
  const Texture t1 = random_texture(16, 16, rng), t2 = random_texture(16, 16, rng);
  Image mix(16, 16);
  for (std::size_t k = 0; k < mix.size(); ++k) mix.values()[k] = 0.3 * t1.values()[k] + 0.7 * t2.values()[k];
  const RenderOutput r1 = rasterize(car, t1, pose, intr, light);
  const RenderOutput r2 = rasterize(car, t2, pose, intr, light);
  const RenderOutput rm = rasterize(car, Texture(mix), pose, intr, light);
  ASSERT_GT(count(rm.mask), 100u);
  double worst = 0.0;
  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) {
      if (!rm.mask(i, j)) continue;
      // Reconstruct pre-clamp values from the recorded Jacobian as well.
      const TexelSample* s = rm.jacobian(i, j);
      for (int c = 0; c < 3; ++c) {
        double pre = 0.0;
        for (int k = 0; k < 4; ++k) pre += s->weight[k] * mix.values()[s->texel[k] * 3 + c];
        pre *= s->shading;
        worst = std::max(worst, std::abs(rm.image(i, j, c) - (0.3 * r1.image(i, j, c) + 0.7 * r2.image(i, j, c))));
        worst = std::max(worst, std::abs(rm.image(i, j, c) - pre));
      }
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Rasterize, MaskEqualsJacobianSupportAndIsDeterministic) {
  const auto intr = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const Mesh car = place_mesh(make_sedan_mesh(), BBox3D::make(Vec3(0, 0.1, 4.5), 3, 1.4, 1.2, 1.0));
  std::mt19937_64 rng(5);
  const Texture tex = random_texture(12, 12, rng);
  const Lighting light = Lighting::make(0.6, Vec3(1, 3, 0), 0.4);
  const RenderOutput a = rasterize(car, tex, CameraPose::rectified(Vec3::Zero()), intr, light);
  const RenderOutput b = rasterize(car, tex, CameraPose::rectified(Vec3::Zero()), intr, light);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.depth, b.depth);
  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) EXPECT_EQ(a.mask(i, j) != 0, a.jacobian(i, j) != nullptr);
  }
}

TEST(Rasterize, BackfacesCulledAndNearerSurfaceWins) {
  const auto intr = CameraIntrinsics::make(50, 50, 15.5, 15.5, 32, 32);
  const auto pose = CameraPose::rectified(Vec3::Zero());
  // Mirror the quad so it faces +z, away from the camera.
  const Mesh away = make_quad().transformed([](const Vec3& p) -> Vec3 { return Vec3(p.x(), -p.y(), 5.0); });
  EXPECT_EQ(count(rasterize(away, Texture(4, 4, 0.5), pose, intr, unit_light()).mask), 0u);
  RasterOptions no_cull;
  no_cull.cull_backfaces = false;
  EXPECT_GT(count(rasterize(away, Texture(4, 4, 0.5), pose, intr, unit_light(), no_cull).mask), 0u);

  const Mesh near = quad_at(0, 0, 4, 1), far = quad_at(0, 0, 8, 4);
  std::vector<Vec3> v = near.vertices();
  std::vector<Face> f = near.faces();
  for (auto face : far.faces()) {
    for (auto& idx : face.vertex) idx += static_cast<int>(near.vertices().size());
    f.push_back(face);
  }
  v.insert(v.end(), far.vertices().begin(), far.vertices().end());
  const RenderOutput r = rasterize(Mesh(v, f), Texture(4, 4, 0.5), pose, intr, unit_light());
  EXPECT_NEAR(r.depth(15, 15), 4.0, 1e-12);
  EXPECT_NEAR(r.depth(15, 5), 8.0, 1e-12);
}

TEST(Rasterize, ShadingFollowsLambert) {
  const auto intr = CameraIntrinsics::make(50, 50, 15.5, 15.5, 32, 32);
  // Light straight in front of the quad along its normal, then at 60 degrees.
  const Mesh q = quad_at(0, 0, 5, 0.2);
  for (const auto& [pos, cosine] : {std::pair{Vec3(0, 0, 0), 1.0}, std::pair{Vec3(std::sqrt(3.0) * 100, 0, 5 - 100), 0.5}}) {
    const RenderOutput r = rasterize(q, Texture(2, 2, 0.5), CameraPose::rectified(Vec3::Zero()), intr,
                                     Lighting::make(0.3, pos, 0.4));
    ASSERT_TRUE(r.mask(15, 15));
    EXPECT_NEAR(r.jacobian(15, 15)->shading, 0.3 + 0.4 * cosine, 2e-4);
  }
}

TEST(Composite, EmptyFullAndPartialMasks) {
  std::mt19937_64 rng(6);
  RenderOutput r;
  r.image = random_image(6, 7, rng);
  r.mask = Mask(6, 7, 0);
  const Image bg = random_image(6, 7, rng);
  EXPECT_EQ(composite(r, bg), bg);
  r.mask.fill(1);
  EXPECT_EQ(composite(r, bg), r.image);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 7; ++j) r.mask(i, j) = (i * 7 + j) % 2;
  const Image out = composite(r, bg);
  std::size_t from_render = 0, from_bg = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 7; ++j) {
      const bool eq_r = out(i, j, 0) == r.image(i, j, 0) && out(i, j, 1) == r.image(i, j, 1);
      const bool eq_b = out(i, j, 0) == bg(i, j, 0) && out(i, j, 1) == bg(i, j, 1);
      from_render += eq_r && !eq_b;
      from_bg += eq_b && !eq_r;
    }
  }
  EXPECT_EQ(from_render, count(r.mask));
  EXPECT_EQ(from_bg, 42u - count(r.mask));
}

TEST(BackwardTexture, ZeroPixelGradient) {
  const auto intr = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const Mesh car = place_mesh(make_sedan_mesh(), BBox3D::make(Vec3(0, 0, 4), 3, 1.4, 1.2, 0.4));
  const RenderOutput r = rasterize(car, Texture(8, 8, 0.4), CameraPose::rectified(Vec3::Zero()), intr, unit_light());
  const Image g = backward_texture(r, Image(48, 64, 3, 0.0));
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTexture, UnitJacobian) {
  RenderOutput r;
  r.image = Image(1, 1, 3, 0.2);
  r.mask = Mask(1, 1, 1);
  r.depth = ScalarMap(1, 1, 1.0);
  r.sample_index = Grid<std::int32_t>(1, 1, 0);
  TexelSample s;
  s.texel = {5, 0, 0, 0};
  s.weight = {1.0, 0.0, 0.0, 0.0};
  s.shading = 1.0;
  r.samples = {s};
  r.texture_width = 3;
  r.texture_height = 3;
  Image g(1, 1, 3);
  g(0, 0, 0) = 0.7;
  g(0, 0, 1) = -1.25;
  g(0, 0, 2) = 3.0;
  const Image tg = backward_texture(r, g);
  for (int k = 0; k < 9; ++k) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(tg.values()[k * 3 + c], k == 5 ? g(0, 0, c) : 0.0);
  }
}

TEST(BackwardTexture, SaturatedChannelsPassNoGradient) {
  RenderOutput r;
  r.image = Image(1, 1, 3, 1.0);
  r.mask = Mask(1, 1, 1);
  r.depth = ScalarMap(1, 1, 1.0);
  r.sample_index = Grid<std::int32_t>(1, 1, 0);
  TexelSample s;
  s.weight = {1.0, 0.0, 0.0, 0.0};
  s.saturated = 0b101;
  r.samples = {s};
  r.texture_width = r.texture_height = 1;
  const Image tg = backward_texture(r, Image(1, 1, 3, 1.0));
  EXPECT_EQ(tg(0, 0, 0), 0.0);
  EXPECT_EQ(tg(0, 0, 1), 1.0);
  EXPECT_EQ(tg(0, 0, 2), 0.0);
}

TEST(BackwardTexture, MatchesFiniteDifferencesUnderEoTDraws) {
  const auto intr = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const BBox3D box = BBox3D::make(Vec3(0.1, -0.1, 4), 3, 1.4, 1.3, 0.9);
  const Mesh car = place_mesh(make_sedan_mesh(), box);
  std::mt19937_64 rng(7);
  Texture tex = random_texture(10, 10, rng, 0.05, 0.95);
  const Lighting nominal = Lighting::make(0.6, box.center + Vec3(2, 6, -3), 0.4);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int draw = 0; draw < 3; ++draw) {
    const EoTSample env = sample_eot(rng, EoTConfig{}, nominal);
    for (const Vec3& eye : {Vec3(0, 0, 0), Vec3(0.4, 0, 0)}) {
      const auto pose = CameraPose::rectified(eye);
      const Image w = random_image(48, 64, rng, -1, 1);
      auto f = [&] {
        const RenderOutput r = rasterize(car, tex, pose, intr, env.lighting);
        double acc = 0.0;
        for (std::size_t k = 0; k < r.image.size(); ++k) acc += w.values()[k] * r.image.values()[k];
        return acc;
      };
      const Image g = backward_texture(rasterize(car, tex, pose, intr, env.lighting), w);
      for (std::size_t k = 0; k < tex.values().size(); ++k) {
        const double n = central_difference(tex.values(), k, 1e-3, f);
        if (std::max(std::abs(n), std::abs(g.values()[k])) <= 1e-6) continue;
        worst = std::max(worst, rel_error(g.values()[k], n));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 500u);
  EXPECT_LT(worst, 1e-4);
}

TEST(Texture, ClampAndConstruction) {
  Texture t(2, 3, 0.5);
  EXPECT_EQ(t.height(), 2);
  EXPECT_EQ(t.width(), 3);
  t(0, 0, 0) = 1.7;
  t(1, 2, 2) = -0.2;
  t.clamp();
  EXPECT_EQ(t(0, 0, 0), 1.0);
  EXPECT_EQ(t(1, 2, 2), 0.0);
  EXPECT_THROW(Texture(Image(2, 2, 1)), ValidationError);
}
