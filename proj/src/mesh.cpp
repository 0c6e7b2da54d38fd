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

#include "stereocamo/mesh.hpp"

#include <cmath>
#include <limits>

#include "stereocamo/errors.hpp"

namespace stereocamo {

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int n = static_cast<int>(vertices_.size());
  for (const auto& v : vertices_) require(v.allFinite(), "mesh vertices must be finite");
  for (auto& f : faces_) {
    for (int k = 0; k < 3; ++k) {
      require(f.vertex[k] >= 0 && f.vertex[k] < n, "mesh face index out of range");
      const auto& uv = f.uv[k];
      require(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0,
              "mesh UV coordinates must lie in [0,1]");
    }
    const Vec3& a = vertices_[f.vertex[0]];
    const Vec3& b = vertices_[f.vertex[1]];
    const Vec3& c = vertices_[f.vertex[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double len = cross.norm();
    require(len > 0.0, "mesh contains a degenerate triangle");
    f.normal = cross / len;
  }
}

Vec3 Mesh::min_corner() const {
  Vec3 m = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& v : vertices_) m = m.cwiseMin(v);
  return m;
}

Vec3 Mesh::max_corner() const {
  Vec3 m = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& v : vertices_) m = m.cwiseMax(v);
  return m;
}

Mesh place_mesh(const Mesh& mesh, const BBox3D& bbox) {
  const Vec3 lo = mesh.min_corner();
  const Vec3 hi = mesh.max_corner();
  const Vec3 ext = hi - lo;
  require(ext.x() > 0 && ext.y() > 0 && ext.z() > 0, "mesh extents must be positive");
  const Vec3 mid = 0.5 * (lo + hi);
  const Vec3 scale(bbox.length / ext.x(), bbox.height / ext.y(), bbox.width / ext.z());
  const double c = std::cos(bbox.heading);
  const double s = std::sin(bbox.heading);
  return mesh.transformed([&](const Vec3& p) -> Vec3 {
    const Vec3 q = (p - mid).cwiseProduct(scale);
    return Vec3(c * q.x() + s * q.z(), q.y(), -s * q.x() + c * q.z()) + bbox.center;
  });
}

Texture::Texture(int height, int width, double fill) : rgb_(height, width, 3, fill) {
  require(height >= 1 && width >= 1, "texture must have at least one texel");
  clamp();
}

Texture::Texture(Image rgb) : rgb_(std::move(rgb)) {
  require(rgb_.channels() == 3, "texture must be RGB");
  require(rgb_.height() >= 1 && rgb_.width() >= 1, "texture must have at least one texel");
  clamp();
}

Lighting Lighting::make(double ambient, const Vec3& position, double intensity) {
  require(ambient >= 0.0 && ambient <= 1.0, "ambient must lie in [0,1]");
  require(intensity >= 0.0 && std::isfinite(intensity), "light intensity must be non-negative");
  require(position.allFinite(), "light position must be finite");
  return Lighting{ambient, position, intensity};
}

namespace {

struct UvRect {
  double u0, v0, u1, v1;
};

// Appends one box face as two triangles. tangent x bitangent is the outward normal.
void add_face(std::vector<Vec3>& verts, std::vector<Face>& faces, const Vec3& center,
              const Vec3& tangent, const Vec3& bitangent, const UvRect& uv) {
  const int base = static_cast<int>(verts.size());
  verts.push_back(center - tangent - bitangent);
  verts.push_back(center + tangent - bitangent);
  verts.push_back(center + tangent + bitangent);
  verts.push_back(center - tangent + bitangent);
  const std::array<Vec2, 4> uvs = {Vec2(uv.u0, uv.v0), Vec2(uv.u1, uv.v0), Vec2(uv.u1, uv.v1),
                                   Vec2(uv.u0, uv.v1)};
  faces.push_back(Face{{base, base + 1, base + 2}, {uvs[0], uvs[1], uvs[2]}, {}});
  faces.push_back(Face{{base, base + 2, base + 3}, {uvs[0], uvs[2], uvs[3]}, {}});
}

enum BoxSide { kPosX, kNegX, kPosY, kNegY, kPosZ, kNegZ };

void add_box(std::vector<Vec3>& verts, std::vector<Face>& faces, const Vec3& lo, const Vec3& hi,
             const std::array<const UvRect*, 6>& cells) {
  const Vec3 c = 0.5 * (lo + hi);
  const Vec3 h = 0.5 * (hi - lo);
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  if (cells[kPosX]) add_face(verts, faces, c + h.x() * X, -h.z() * Z, h.y() * Y, *cells[kPosX]);
  if (cells[kNegX]) add_face(verts, faces, c - h.x() * X, h.z() * Z, h.y() * Y, *cells[kNegX]);
  if (cells[kPosY]) add_face(verts, faces, c + h.y() * Y, h.x() * X, -h.z() * Z, *cells[kPosY]);
  if (cells[kNegY]) add_face(verts, faces, c - h.y() * Y, h.x() * X, h.z() * Z, *cells[kNegY]);
  if (cells[kPosZ]) add_face(verts, faces, c + h.z() * Z, h.x() * X, h.y() * Y, *cells[kPosZ]);
  if (cells[kNegZ]) add_face(verts, faces, c - h.z() * Z, -h.x() * X, h.y() * Y, *cells[kNegZ]);
}

}  // namespace

Mesh make_unit_cube() {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  const UvRect full{0, 0, 1, 1};
  add_box(verts, faces, Vec3::Constant(-0.5), Vec3::Constant(0.5),
          {&full, &full, &full, &full, &full, &full});
  return Mesh(std::move(verts), std::move(faces));
}

Mesh make_sedan_mesh() {
  constexpr int cols = 4;
  constexpr int rows = 3;
  std::array<UvRect, cols * rows> cell{};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      cell[r * cols + c] = UvRect{double(c) / cols, double(r) / rows, double(c + 1) / cols,
                                  double(r + 1) / rows};
    }
  }
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  // Lower body spans the full footprint, the cabin sits on top, set back slightly.
  add_box(verts, faces, Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.05, 0.5),
          {&cell[0], &cell[1], &cell[2], &cell[3], &cell[4], &cell[5]});
  add_box(verts, faces, Vec3(-0.28, 0.05, -0.42), Vec3(0.22, 0.5, 0.42),
          {&cell[6], &cell[7], &cell[8], nullptr, &cell[9], &cell[10]});
  return Mesh(std::move(verts), std::move(faces));
}

Mesh make_quad() {
  std::vector<Vec3> verts = {Vec3(-0.5, -0.5, 0), Vec3(0.5, -0.5, 0), Vec3(0.5, 0.5, 0),
                             Vec3(-0.5, 0.5, 0)};
  const std::array<Vec2, 4> uv = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  // Clockwise when seen from +z, so the face points toward -z.
  std::vector<Face> faces = {Face{{0, 2, 1}, {uv[0], uv[2], uv[1]}, {}},
                             Face{{0, 3, 2}, {uv[0], uv[3], uv[2]}, {}}};
  return Mesh(std::move(verts), std::move(faces));
}

}  // namespace stereocamo
