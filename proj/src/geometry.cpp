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

#include "stereocamo/geometry.hpp"

#include <cmath>
#include <numbers>

#include "stereocamo/errors.hpp"

namespace stereocamo {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

BBox3D BBox3D::make(const Vec3& center, double length, double width, double height,
                    double heading, std::string category) {
  require(finite(center), "bbox center must be finite");
  require(std::isfinite(length) && std::isfinite(width) && std::isfinite(height) &&
              std::isfinite(heading),
          "bbox dimensions and heading must be finite");
  require(length > 0 && width > 0 && height > 0, "bbox dimensions must be positive");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double h = std::fmod(heading, two_pi);
  if (h < 0) h += two_pi;
  if (h >= two_pi) h = 0.0;
  return BBox3D{center, length, width, height, h, std::move(category)};
}

CameraIntrinsics CameraIntrinsics::make(double fx, double fy, double cx, double cy, int width,
                                        int height) {
  require(width > 0 && height > 0, "image size must be positive");
  require(std::isfinite(fx) && std::isfinite(fy) && fx > 0 && fy > 0,
          "focal lengths must be positive");
  require(cx >= 0 && cx < width, "principal point cx must lie inside the image");
  require(cy >= 0 && cy < height, "principal point cy must lie inside the image");
  return CameraIntrinsics{fx, fy, cx, cy, width, height};
}

CameraPose CameraPose::rectified(const Vec3& position) {
  CameraPose pose;
  pose.position = position;
  pose.world_to_camera = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();
  return pose;
}

StereoRig::StereoRig(CameraIntrinsics intrinsics, double baseline, Vec3 left_position)
    : intrinsics_(intrinsics), baseline_(baseline), left_position_(std::move(left_position)) {
  require(std::isfinite(baseline) && baseline > 0, "baseline must be positive");
  require(finite(left_position_), "camera position must be finite");
}

ViewpointSpherical viewpoint_from_camera(const Vec3& camera, const Vec3& center) {
  const Vec3 delta = camera - center;
  const double dist = delta.norm();
  if (!(dist > 0.0)) throw ValidationError("degenerate viewpoint: camera coincides with center");
  const double horizontal = std::hypot(delta.x(), delta.z());
  ViewpointSpherical vp;
  vp.dist = dist;
  vp.elev = std::atan2(delta.y(), horizontal);
  vp.azim = (delta.x() == 0.0 && delta.z() == 0.0) ? 0.0 : std::atan2(delta.x(), delta.z());
  return vp;
}

ViewpointSpherical viewpoint_from_camera(const Vec3& camera, const BBox3D& bbox) {
  return viewpoint_from_camera(camera, bbox.center);
}

Vec3 camera_from_viewpoint(const ViewpointSpherical& vp, const Vec3& center) {
  const double ce = std::cos(vp.elev);
  return center + vp.dist * Vec3(ce * std::sin(vp.azim), std::sin(vp.elev), ce * std::cos(vp.azim));
}

std::pair<ViewpointSpherical, ViewpointSpherical> stereo_viewpoints(const StereoRig& rig,
                                                                    const BBox3D& bbox) {
  return {viewpoint_from_camera(rig.left_position(), bbox),
          viewpoint_from_camera(rig.right_position(), bbox)};
}

double disparity_to_depth(double disparity, const CameraIntrinsics& intrinsics, double baseline) {
  if (!(disparity > 0.0)) throw ValidationError("non-positive disparity");
  return intrinsics.fx * baseline / disparity;
}

double depth_to_disparity(double depth, const CameraIntrinsics& intrinsics, double baseline) {
  if (!(depth > 0.0)) throw ValidationError("non-positive depth");
  return intrinsics.fx * baseline / depth;
}

PixelCoord project(const Vec3& point, const CameraIntrinsics& intrinsics, const CameraPose& pose) {
  const Vec3 p = pose.to_camera(point);
  if (!(p.z() > 0.0)) throw ValidationError("point is not in front of the camera");
  return {intrinsics.fx * p.x() / p.z() + intrinsics.cx, intrinsics.fy * p.y() / p.z() + intrinsics.cy};
}

Vec3 unproject(const PixelCoord& pixel, double depth, const CameraIntrinsics& intrinsics,
               const CameraPose& pose) {
  const Vec3 p((pixel.u - intrinsics.cx) * depth / intrinsics.fx,
               (pixel.v - intrinsics.cy) * depth / intrinsics.fy, depth);
  return pose.to_world(p);
}

}  // namespace stereocamo
