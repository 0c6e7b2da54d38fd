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

#include <optional>
#include <string>

#include "stereocamo/eot.hpp"
#include "stereocamo/geometry.hpp"
#include "stereocamo/losses.hpp"
#include "stereocamo/mesh.hpp"
#include "stereocamo/regions.hpp"
#include "stereocamo/renderer.hpp"
#include "stereocamo/stereo.hpp"

namespace stereocamo {

// A background stereo pair with its calibration and the detected target.
struct Scene {
  std::string id;
  Image left;
  Image right;
  StereoRig rig;
  BBox3D bbox;
  Lighting lighting;
  std::optional<DisparityMap> ground_truth;  // disparity of the background pair
};

struct AttackSettings {
  MatcherConfig matcher;
  AttackMode mode = AttackMode::Merge;
  LossWeights weights;
  Palette palette = default_palette();
  // When false the right eye reuses the left eye's viewpoint (ablation).
  bool stereo_aligned = true;
  // Boundary kernel p_k; 0 selects the resolution-scaled default.
  int boundary_kernel = 0;
};

// Everything about a scene that does not depend on the texture: placed mesh,
// per-eye render poses, the object mask and the merge targets.
class AttackScene {
 public:
  AttackScene(Scene scene, const Mesh& canonical_mesh, const AttackSettings& settings);

  const Scene& scene() const { return scene_; }
  const Mesh& world_mesh() const { return mesh_; }
  const CameraPose& left_pose() const { return left_pose_; }
  const CameraPose& right_pose() const { return right_pose_; }
  const Mask& object_mask() const { return mask_; }
  const ScalarMap& reference_disparity() const { return reference_; }
  const BackgroundDepthContext& context() const { return ctx_; }
  const RegionSegmentation& segmentation() const { return seg_; }
  // Pixels whose disparity the training loss reads.
  const PixelRect& loss_region() const { return loss_region_; }
  // Object plus boundary ring, for evaluation.
  const PixelRect& eval_region() const { return eval_region_; }
  bool stereo_aligned() const { return stereo_aligned_; }

 private:
  Scene scene_;
  Mesh mesh_;
  CameraPose left_pose_;
  CameraPose right_pose_;
  Mask mask_;
  ScalarMap reference_;
  BackgroundDepthContext ctx_;
  RegionSegmentation seg_;
  PixelRect loss_region_;
  PixelRect eval_region_;
  bool stereo_aligned_ = true;
};

// Rendered, composited and matched stereo pair for one texture and environment.
struct StereoFrame {
  RenderOutput left_render;
  RenderOutput right_render;
  Image left;
  Image right;
  Image left_clamped;   // 1 where noise clamping cut the gradient
  Image right_clamped;
  DisparityMap disparity;
};

StereoFrame render_frame(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                         const MatcherConfig& matcher, const PixelRect& region);

// Image-dependent part of the objective for the scene's mode.
DisparityLoss main_loss(const AttackScene& scene, const DisparityMap& disparity,
                        const AttackSettings& settings);

// Full objective and its texture gradient through renderer, matcher and losses.
TotalLoss attack_loss(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                      const AttackSettings& settings);

// Objective value only.
double attack_loss_value(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                         const AttackSettings& settings);

// Pulls a disparity gradient back to the texture for a rendered frame.
Image texture_gradient(const StereoFrame& frame, const DisparityMap& disp_grad,
                       const MatcherConfig& matcher, const PixelRect& region);

// Disparity of the object rendered in both eyes, from the left z-buffer.
DisparityMap render_ground_truth(const RenderOutput& left_render, const StereoRig& rig);

}  // namespace stereocamo
