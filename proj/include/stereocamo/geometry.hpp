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

#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace stereocamo {

// World frame: y up, cameras look along +z, the stereo baseline runs along +x.
using Vec3 = Eigen::Vector3d;

struct BBox3D {
  Vec3 center = Vec3::Zero();
  double length = 1.0;  // along the object's local x axis
  double width = 1.0;   // along the object's local z axis
  double height = 1.0;  // along y
  double heading = 0.0; // rotation about +y, radians in [0, 2pi)
  std::string category = "car";

  // Validates dimensions and finiteness, normalizes the heading.
  static BBox3D make(const Vec3& center, double length, double width, double height,
                     double heading, std::string category = "car");
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  static CameraIntrinsics make(double fx, double fy, double cx, double cy, int width, int height);
  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid camera pose. world_to_camera maps world directions into the camera
// frame (x right, y down, z forward).
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Eigen::Matrix3d world_to_camera = Eigen::Matrix3d::Identity();

  // Rectified orientation shared by both eyes: optical axis +z, image rows grow
  // downward, i.e. opposite to world y.
  static CameraPose rectified(const Vec3& position);

  Vec3 to_camera(const Vec3& world) const { return world_to_camera * (world - position); }
  Vec3 to_world(const Vec3& camera) const { return world_to_camera.transpose() * camera + position; }
};

class StereoRig {
 public:
  StereoRig(CameraIntrinsics intrinsics, double baseline, Vec3 left_position);

  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  double baseline() const { return baseline_; }
  const Vec3& left_position() const { return left_position_; }
  Vec3 right_position() const { return left_position_ + baseline_ * lateral_axis(); }
  static Vec3 lateral_axis() { return Vec3::UnitX(); }

  CameraPose left_pose() const { return CameraPose::rectified(left_position_); }
  CameraPose right_pose() const { return CameraPose::rectified(right_position()); }

 private:
  CameraIntrinsics intrinsics_;
  double baseline_;
  Vec3 left_position_;
};

struct ViewpointSpherical {
  double dist = 0.0;
  double elev = 0.0;
  double azim = 0.0;
};

// Spherical parameterization of a camera position relative to the object
// center. azim uses the quadrant-aware atan2(dx, dz), so tan(azim) == dx/dz
// wherever the single-argument form is defined.
ViewpointSpherical viewpoint_from_camera(const Vec3& camera, const Vec3& center);
ViewpointSpherical viewpoint_from_camera(const Vec3& camera, const BBox3D& bbox);

Vec3 camera_from_viewpoint(const ViewpointSpherical& vp, const Vec3& center);

// (left, right) viewpoints computed independently from each physical eye.
std::pair<ViewpointSpherical, ViewpointSpherical> stereo_viewpoints(const StereoRig& rig,
                                                                    const BBox3D& bbox);

double disparity_to_depth(double disparity, const CameraIntrinsics& intrinsics, double baseline);
double depth_to_disparity(double depth, const CameraIntrinsics& intrinsics, double baseline);

struct PixelCoord {
  double u = 0.0;  // column
  double v = 0.0;  // row
};

// Pinhole projection; pixel centers sit at integer coordinates.
PixelCoord project(const Vec3& point, const CameraIntrinsics& intrinsics, const CameraPose& pose);
Vec3 unproject(const PixelCoord& pixel, double depth, const CameraIntrinsics& intrinsics,
               const CameraPose& pose);

}  // namespace stereocamo
