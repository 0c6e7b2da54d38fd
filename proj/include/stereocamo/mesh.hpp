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
#include <vector>

#include <Eigen/Core>

#include "stereocamo/geometry.hpp"
#include "stereocamo/image.hpp"

namespace stereocamo {

using Vec2 = Eigen::Vector2d;

struct Face {
  std::array<int, 3> vertex{};
  std::array<Vec2, 3> uv{};
  Vec3 normal = Vec3::UnitZ();  // outward, from counter-clockwise winding
};

class Mesh {
 public:
  Mesh() = default;

  // Validates indices and UV range and derives per-face normals.
  Mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }

  Vec3 min_corner() const;
  Vec3 max_corner() const;
  Vec3 extents() const { return max_corner() - min_corner(); }

  // Returns a copy with every vertex mapped by `fn`; normals are recomputed.
  template <typename Fn>
  Mesh transformed(Fn&& fn) const {
    std::vector<Vec3> v;
    v.reserve(vertices_.size());
    for (const auto& p : vertices_) v.push_back(fn(p));
    return Mesh(std::move(v), faces_);
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

// Scales the mesh's bounding box anisotropically to (length, height, width) along
// (x, y, z), rotates by the heading about +y and translates to the box center.
Mesh place_mesh(const Mesh& mesh, const BBox3D& bbox);

// The optimized parameter: an RGB texel grid with values in [0,1].
class Texture {
 public:
  Texture() = default;
  Texture(int height, int width, double fill = 0.5);
  explicit Texture(Image rgb);

  int height() const { return rgb_.height(); }
  int width() const { return rgb_.width(); }
  std::size_t texel_count() const { return static_cast<std::size_t>(height()) * width(); }

  const Image& image() const { return rgb_; }
  Image& image() { return rgb_; }
  std::span<double> values() { return rgb_.values(); }
  std::span<const double> values() const { return rgb_.values(); }

  double operator()(int row, int col, int ch) const { return rgb_(row, col, ch); }
  double& operator()(int row, int col, int ch) { return rgb_(row, col, ch); }

  void clamp() { rgb_.clamp01(); }
  bool operator==(const Texture&) const = default;

 private:
  Image rgb_;
};

struct Lighting {
  double ambient = 1.0;
  Vec3 point_light_position = Vec3::Zero();
  double point_light_intensity = 0.0;

  static Lighting make(double ambient, const Vec3& position, double intensity);
};

// Axis-aligned box [-0.5,0.5]^3 with each face mapped to the full [0,1]^2 UV square.
Mesh make_unit_cube();

// Two-box sedan body in the unit cube, UV-unwrapped into a 4x3 atlas.
Mesh make_sedan_mesh();

// Single quad in the z=0 plane facing -z (toward a camera at negative z),
// spanning [-0.5,0.5]^2 with u along +x and v along +y.
Mesh make_quad();

}  // namespace stereocamo
