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

#include <filesystem>
#include <optional>
#include <string>

#include "stereocamo/geometry.hpp"
#include "stereocamo/image.hpp"
#include "stereocamo/losses.hpp"
#include "stereocamo/mesh.hpp"
#include "stereocamo/pipeline.hpp"

namespace stereocamo {

namespace fs = std::filesystem;

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// 8-bit PNG. Samples map linearly to [0,1]; no gamma transform.
Image read_png(const fs::path& path, int channels = 3);
void write_png(const fs::path& path, const Image& image);
void write_mask_png(const fs::path& path, const Mask& mask);
// Jet-like false color over [0, d_max].
Image colorize_disparity(const DisparityMap& disp, double d_max);

// Single-channel PFM. Written little-endian (scale -1), rows bottom-up.
std::string encode_pfm(const DisparityMap& map);
DisparityMap decode_pfm(const std::string& bytes);
DisparityMap read_pfm(const fs::path& path);
void write_pfm(const fs::path& path, const DisparityMap& map);

// Wavefront OBJ subset: v, vt and f with v/vt references. Polygons are fanned.
Mesh parse_obj(const std::string& text);
std::string format_obj(const Mesh& mesh);
Mesh read_obj(const fs::path& path);
void write_obj(const fs::path& path, const Mesh& mesh);

Palette read_palette(const fs::path& path);

// Scene manifest. Grammar: '#' comments, '[section]' headers and 'key = value'
// lines. Vectors are three whitespace-separated numbers. Relative paths resolve
// against the manifest's directory.
//
//   [scene]       id, left, right, ground_truth (optional)
//   [calibration] fx, fy, cx, cy, width, height, baseline_m, left_position
//   [bbox]        center, length, width, height, heading (radians) or
//                 heading_deg, category (optional)
//   [lighting]    ambient, light_position, light_intensity
struct SceneManifest {
  std::string id;
  fs::path left;
  fs::path right;
  std::optional<fs::path> ground_truth;
  CameraIntrinsics intrinsics;
  double baseline_m = 0.0;
  Vec3 left_position = Vec3::Zero();
  BBox3D bbox;
  Lighting lighting;

  StereoRig rig() const { return StereoRig(intrinsics, baseline_m, left_position); }
  bool operator==(const SceneManifest& other) const;
};

SceneManifest parse_manifest(const std::string& text, const fs::path& base_dir,
                             const std::string& origin = "manifest");
std::string format_manifest(const SceneManifest& manifest, const fs::path& base_dir);
SceneManifest load_manifest(const fs::path& path);
void save_manifest(const fs::path& path, const SceneManifest& manifest);

// Loads the manifest and the images it references.
Scene load_scene(const fs::path& path);
// Writes images next to the manifest and the manifest itself.
void save_scene(const fs::path& path, const Scene& scene);

}  // namespace stereocamo
