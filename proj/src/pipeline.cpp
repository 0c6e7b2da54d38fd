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

#include "stereocamo/pipeline.hpp"

#include <cmath>

#include "stereocamo/errors.hpp"

namespace stereocamo {

AttackScene::AttackScene(Scene scene, const Mesh& canonical_mesh, const AttackSettings& settings)
    : scene_(std::move(scene)), stereo_aligned_(settings.stereo_aligned) {
  const auto& intr = scene_.rig.intrinsics();
  require(scene_.left.height() == intr.height && scene_.left.width() == intr.width &&
              scene_.left.same_shape(scene_.right),
          "scene images do not match the calibration size");
  mesh_ = place_mesh(canonical_mesh, scene_.bbox);
  left_pose_ = scene_.rig.left_pose();
  right_pose_ = stereo_aligned_ ? scene_.rig.right_pose() : left_pose_;

  const Texture flat(2, 2, 0.5);
  const RenderOutput probe = rasterize(mesh_, flat, left_pose_, intr, scene_.lighting);
  mask_ = probe.mask;
  require(count(mask_) > 0, "scene " + scene_.id + ": object is not visible in the left view");

  if (scene_.ground_truth) {
    require(scene_.ground_truth->height() == intr.height && scene_.ground_truth->width() == intr.width,
            "scene " + scene_.id + ": ground-truth disparity size differs from the images");
    reference_ = *scene_.ground_truth;
  } else {
    reference_ = predict_disparity(scene_.left, scene_.right, settings.matcher);
  }

  const int kernel = settings.boundary_kernel > 0 ? settings.boundary_kernel : scaled_kernel(intr.width);
  ctx_ = boundary_depth(mask_, reference_, kernel);
  seg_ = segment_regions(mask_, reference_, ctx_);
  loss_region_ = PixelRect::around(mask_, 0);
  eval_region_ = PixelRect::around(dilate(mask_, kernel), 0);
}

StereoFrame render_frame(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                         const MatcherConfig& matcher, const PixelRect& region) {
  const auto& intr = scene.scene().rig.intrinsics();
  StereoFrame f;
  f.left_render = rasterize(scene.world_mesh(), texture, scene.left_pose(), intr, env.lighting);
  f.right_render = rasterize(scene.world_mesh(), texture, scene.right_pose(), intr, env.lighting);
  f.left = composite(f.left_render, scene.scene().left);
  f.right = composite(f.right_render, scene.scene().right);
  apply_noise(f.left, env.noise_sigma, env.noise_seed, 0, &f.left_clamped);
  apply_noise(f.right, env.noise_sigma, env.noise_seed, 1, &f.right_clamped);
  f.disparity = predict_disparity(f.left, f.right, matcher, region);
  return f;
}

DisparityLoss main_loss(const AttackScene& scene, const DisparityMap& disparity,
                        const AttackSettings& settings) {
  switch (settings.mode) {
    case AttackMode::Merge:
      return merging_loss(disparity, scene.segmentation(), scene.context());
    case AttackMode::Appear:
      return appearing_loss(disparity, scene.object_mask(), settings.matcher.d_max);
    case AttackMode::Hide:
      return hiding_loss(disparity, scene.object_mask());
  }
  throw ValidationError("unknown attack mode");
}

Image texture_gradient(const StereoFrame& frame, const DisparityMap& disp_grad,
                       const MatcherConfig& matcher, const PixelRect& region) {
  StereoGradient g = backward_disparity(frame.left, frame.right, matcher, disp_grad, region);
  auto gl = g.left.values();
  auto gr = g.right.values();
  const auto cl = frame.left_clamped.values();
  const auto cr = frame.right_clamped.values();
  for (std::size_t k = 0; k < gl.size(); ++k) {
    if (cl[k] != 0.0) gl[k] = 0.0;
    if (cr[k] != 0.0) gr[k] = 0.0;
  }
  Image grad(frame.left_render.texture_height, frame.left_render.texture_width, 3, 0.0);
  accumulate_texture_grad(frame.left_render, g.left, grad);
  accumulate_texture_grad(frame.right_render, g.right, grad);
  return grad;
}

TotalLoss attack_loss(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                      const AttackSettings& settings) {
  const StereoFrame frame = render_frame(scene, texture, env, settings.matcher, scene.loss_region());
  const DisparityLoss main = main_loss(scene, frame.disparity, settings);
  const Image grad = texture_gradient(frame, main.grad, settings.matcher, scene.loss_region());
  return total_loss(main.value, grad, texture, settings.palette, settings.weights);
}

double attack_loss_value(const AttackScene& scene, const Texture& texture, const EoTSample& env,
                         const AttackSettings& settings) {
  const StereoFrame frame = render_frame(scene, texture, env, settings.matcher, scene.loss_region());
  const DisparityLoss main = main_loss(scene, frame.disparity, settings);
  double value = main.value;
  if (settings.weights.alpha != 0.0) value += settings.weights.alpha * nps_loss(texture.image(), settings.palette).value;
  if (settings.weights.beta != 0.0) value += settings.weights.beta * tv_loss(texture.image()).value;
  return value;
}

DisparityMap render_ground_truth(const RenderOutput& left_render, const StereoRig& rig) {
  DisparityMap gt(left_render.mask.height(), left_render.mask.width(), 0.0);
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (left_render.mask[k]) gt[k] = depth_to_disparity(left_render.depth[k], rig.intrinsics(), rig.baseline());
  }
  return gt;
}

}  // namespace stereocamo
