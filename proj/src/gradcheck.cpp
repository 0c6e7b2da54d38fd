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

#include "stereocamo/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "stereocamo/errors.hpp"
#include "stereocamo/losses.hpp"
#include "stereocamo/pipeline.hpp"
#include "stereocamo/synth.hpp"

namespace stereocamo {

void GradcheckConfig::validate() const {
  require(texture_size >= 2, "gradcheck: texture must be at least 2x2");
  require(image_height >= 8 && image_width >= 8, "gradcheck: image too small");
  require(d_max >= 1 && d_max < image_width, "gradcheck: d_max out of range");
  require(step > 0.0 && segment_tolerance > 0.0 && chain_tolerance > 0.0, "gradcheck: bad tolerances");
  require(matcher_coords >= 1 && lighting_draws >= 1, "gradcheck: sample counts must be positive");
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

bool GradcheckReport::passed() const {
  if (segments.empty()) return false;
  for (const auto& s : segments) {
    if (!s.passed()) return false;
  }
  return true;
}

std::string GradcheckReport::format() const {
  std::ostringstream out;
  char line[256];
  for (const auto& s : segments) {
    std::snprintf(line, sizeof line, "%-20s worst_rel_err=%.3e tol=%.0e checked=%zu skipped=%zu below_floor=%zu %s\n",
                  s.name.c_str(), s.worst_rel_error, s.tolerance, s.checked, s.skipped, s.below_floor,
                  s.passed() ? "PASS" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof line, "gradcheck %s in %.2fs\n", passed() ? "PASS" : "FAIL", seconds);
  out << line;
  return out.str();
}

namespace {

using Signature = std::vector<signed char>;

// Compares analytic[k] with the central difference of f along coordinate k of
// `params`. `signature` identifies the linear piece of piecewise-smooth terms;
// coordinates whose +h and -h signatures differ are skipped.
struct Checker {
  const GradcheckConfig& cfg;
  SegmentResult result;

  void compare(std::span<double> params, std::size_t k, double analytic,
               const std::function<double()>& f, const std::function<Signature()>& signature = {}) {
    const double saved = params[k];
    params[k] = saved + cfg.step;
    const double up = f();
    Signature s_up = signature ? signature() : Signature{};
    params[k] = saved - cfg.step;
    const double down = f();
    Signature s_down = signature ? signature() : Signature{};
    params[k] = saved;
    if (s_up != s_down) {
      ++result.skipped;
      return;
    }
    record(analytic, (up - down) / (2.0 * cfg.step));
  }

  void record(double analytic, double numeric) {
    if (std::max(std::abs(analytic), std::abs(numeric)) <= cfg.magnitude_floor) {
      ++result.below_floor;
      return;
    }
    result.worst_rel_error = std::max(result.worst_rel_error,
                                      relative_error(analytic, numeric, cfg.magnitude_floor));
    ++result.checked;
  }
};

SegmentResult make_segment(const std::string& name, double tol) {
  SegmentResult s;
  s.name = name;
  s.tolerance = tol;
  return s;
}

Image random_image(int h, int w, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(h, w, 3);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

void append(Signature& dst, const Signature& src) { dst.insert(dst.end(), src.begin(), src.end()); }

Signature render_signature(const RenderOutput& r) {
  Signature s;
  s.reserve(r.samples.size());
  for (const auto& t : r.samples) s.push_back(static_cast<signed char>(t.saturated));
  return s;
}

Signature clamp_signature(const Image& clamped) {
  Signature s;
  s.reserve(clamped.size());
  for (double v : clamped.values()) s.push_back(v != 0.0);
  return s;
}

Signature nps_signature(const Image& t, const Palette& palette) {
  Signature s;
  for (int i = 0; i < t.height(); ++i) {
    for (int j = 0; j < t.width(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      int idx = 0;
      for (std::size_t p = 0; p < palette.size(); ++p) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) d += (t(i, j, c) - palette[p][c]) * (t(i, j, c) - palette[p][c]);
        if (d < best) {
          best = d;
          idx = static_cast<int>(p);
        }
      }
      s.push_back(static_cast<signed char>(idx));
    }
  }
  return s;
}

struct Fixture {
  Scene scene;
  Mesh mesh;
  AttackSettings settings;
  std::vector<EoTSample> envs;
};

Fixture make_fixture(const GradcheckConfig& cfg, Rng& rng) {
  const int H = cfg.image_height, W = cfg.image_width;
  const double f = 0.95 * W;
  const auto intr = CameraIntrinsics::make(f, f, (W - 1) / 2.0, (H - 1) / 2.0, W, H);
  const double baseline = 0.4;
  const double bg_disp = 2.0;
  // Object at roughly half the matcher's range.
  const double depth = f * baseline / (0.5 * cfg.d_max);
  const StereoRig rig(intr, baseline, Vec3::Zero());
  auto [left, right] = shifted_pair(H, W, static_cast<int>(bg_disp), rng());
  const double span = 0.45 * W * depth / f;
  const BBox3D bbox = BBox3D::make(Vec3(0.0, -0.05 * span, depth), span, 0.6 * span, 0.55 * span,
                                   std::numbers::pi / 7.0);
  Fixture fx{Scene{"gradcheck", std::move(left), std::move(right), rig, bbox,
                   Lighting::make(0.6, bbox.center + Vec3(1.0, 2.0, -2.0), 0.4),
                   DisparityMap(H, W, bg_disp)},
             make_sedan_mesh(), AttackSettings{}, {}};
  fx.settings.matcher.d_max = cfg.d_max;
  EoTConfig eot;
  for (int k = 0; k < cfg.lighting_draws; ++k) fx.envs.push_back(sample_eot(rng, eot, fx.scene.lighting));
  return fx;
}

SegmentResult check_renderer(const GradcheckConfig& cfg, const AttackScene& as, const Fixture& fx,
                             Texture& texture, Rng& rng) {
  Checker ck{cfg, make_segment("renderer", cfg.segment_tolerance)};
  const auto& intr = fx.scene.rig.intrinsics();
  for (const auto& env : fx.envs) {
    for (const CameraPose* pose : {&as.left_pose(), &as.right_pose()}) {
      const Image weights = random_image(intr.height, intr.width, rng, -1.0, 1.0);
      auto objective = [&] {
        const RenderOutput r = rasterize(as.world_mesh(), texture, *pose, intr, env.lighting);
        double acc = 0.0;
        for (std::size_t k = 0; k < r.image.size(); ++k) acc += weights.values()[k] * r.image.values()[k];
        return acc;
      };
      auto signature = [&] {
        return render_signature(rasterize(as.world_mesh(), texture, *pose, intr, env.lighting));
      };
      const RenderOutput base = rasterize(as.world_mesh(), texture, *pose, intr, env.lighting);
      Image grad = backward_texture(base, weights);
      if (cfg.inject_bug) {
        for (auto& v : grad.values()) v *= 1.01;
      }
      auto params = texture.values();
      for (std::size_t k = 0; k < params.size(); ++k) ck.compare(params, k, grad.values()[k], objective, signature);
    }
  }
  return ck.result;
}

SegmentResult check_matcher(const GradcheckConfig& cfg, const std::string& name, MatcherConfig matcher,
                            Image left, Image right, Rng& rng) {
  Checker ck{cfg, make_segment(name, cfg.segment_tolerance)};
  const int H = left.height(), W = left.width();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DisparityMap g(H, W);
  for (auto& v : g.values()) v = u(rng);
  // The objective is differenced per pixel before weighting so that pixels
  // outside the perturbed patch contribute exact zeros.
  std::function<Signature()> signature;
  if (matcher.cost == MatchCost::SAD) signature = [&] { return sad_sign_pattern(left, right, matcher); };
  const StereoGradient sg = backward_disparity(left, right, matcher, g);
  std::uniform_int_distribution<std::size_t> pick(0, left.size() - 1);
  for (int n = 0; n < cfg.matcher_coords; ++n) {
    const bool use_left = n % 2 == 0;
    const std::size_t k = pick(rng);
    Image& img = use_left ? left : right;
    const double analytic = (use_left ? sg.left : sg.right).values()[k];
    const double saved = img.values()[k];
    auto eval = [&](double delta, Signature& sig) {
      img.values()[k] = saved + delta;
      DisparityMap d = predict_disparity(left, right, matcher);
      if (signature) sig = signature();
      return d;
    };
    Signature s[4];
    const DisparityMap up = eval(cfg.step, s[0]);
    const DisparityMap down = eval(-cfg.step, s[1]);
    const DisparityMap up2 = eval(cfg.step / 2, s[2]);
    const DisparityMap down2 = eval(-cfg.step / 2, s[3]);
    img.values()[k] = saved;
    if (s[0] != s[1] || s[0] != s[2] || s[0] != s[3]) {
      ++ck.result.skipped;
      continue;
    }
    // The soft-argmin is strongly curved, so the h^2 term of the plain central
    // difference is cancelled with a half-step evaluation.
    double wide = 0.0, narrow = 0.0;
    for (std::size_t p = 0; p < up.size(); ++p) {
      wide += g[p] * (up[p] - down[p]);
      narrow += g[p] * (up2[p] - down2[p]);
    }
    wide /= 2.0 * cfg.step;
    narrow /= cfg.step;
    ck.record(analytic, (4.0 * narrow - wide) / 3.0);
  }
  return ck.result;
}

SegmentResult check_disparity_loss(const GradcheckConfig& cfg, const std::string& name,
                                   DisparityMap disp,
                                   const std::function<DisparityLoss(const DisparityMap&)>& loss) {
  Checker ck{cfg, make_segment(name, cfg.segment_tolerance)};
  const DisparityLoss base = loss(disp);
  auto objective = [&] { return loss(disp).value; };
  for (std::size_t k = 0; k < disp.size(); ++k) ck.compare(disp.values(), k, base.grad[k], objective);
  return ck.result;
}

SegmentResult check_texture_loss(const GradcheckConfig& cfg, const std::string& name, Image tex,
                                 const std::function<TextureLoss(const Image&)>& loss,
                                 const std::function<Signature(const Image&)>& sig = {}) {
  Checker ck{cfg, make_segment(name, cfg.segment_tolerance)};
  const TextureLoss base = loss(tex);
  auto objective = [&] { return loss(tex).value; };
  std::function<Signature()> signature;
  if (sig) signature = [&] { return sig(tex); };
  for (std::size_t k = 0; k < tex.size(); ++k) ck.compare(tex.values(), k, base.grad.values()[k], objective, signature);
  return ck.result;
}

SegmentResult check_chain(const GradcheckConfig& cfg, const std::string& name, const AttackScene& as,
                          const AttackSettings& settings, const EoTSample& env, Texture& texture) {
  Checker ck{cfg, make_segment(name, cfg.chain_tolerance)};
  const TotalLoss base = attack_loss(as, texture, env, settings);
  Image grad = base.grad;
  if (cfg.inject_bug) {
    for (auto& v : grad.values()) v *= 1.01;
  }
  auto objective = [&] { return attack_loss_value(as, texture, env, settings); };
  auto signature = [&] {
    const StereoFrame f = render_frame(as, texture, env, settings.matcher, as.loss_region());
    Signature s = sad_sign_pattern(f.left, f.right, settings.matcher, as.loss_region());
    append(s, render_signature(f.left_render));
    append(s, render_signature(f.right_render));
    append(s, clamp_signature(f.left_clamped));
    append(s, clamp_signature(f.right_clamped));
    append(s, nps_signature(texture.image(), settings.palette));
    return s;
  };
  auto params = texture.values();
  for (std::size_t k = 0; k < params.size(); ++k) ck.compare(params, k, grad.values()[k], objective, signature);
  return ck.result;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  Fixture fx = make_fixture(cfg, rng);
  const AttackScene as(fx.scene, fx.mesh, fx.settings);
  Texture texture(random_image(cfg.texture_size, cfg.texture_size, rng, 0.1, 0.9));

  GradcheckReport report;
  report.segments.push_back(check_renderer(cfg, as, fx, texture, rng));

  const StereoFrame frame = render_frame(as, texture, fx.envs[0], fx.settings.matcher,
                                         PixelRect::full(cfg.image_height, cfg.image_width));
  report.segments.push_back(check_matcher(cfg, "matcher_sad", fx.settings.matcher, frame.left, frame.right, rng));
  for (const MatchCost cost : {MatchCost::SAD, MatchCost::ZNCC}) {
    MatcherConfig small = fx.settings.matcher;
    small.cost = cost;
    small.d_max = 3;
    const Image l = random_image(8, 8, rng, 0.0, 1.0);
    const Image r = random_image(8, 8, rng, 0.0, 1.0);
    report.segments.push_back(check_matcher(
        cfg, cost == MatchCost::SAD ? "matcher_sad_8x8" : "matcher_zncc_8x8", small, l, r, rng));
  }

  const DisparityMap& disp = frame.disparity;
  report.segments.push_back(check_disparity_loss(cfg, "loss_merge", disp, [&](const DisparityMap& d) {
    return merging_loss(d, as.segmentation(), as.context());
  }));
  report.segments.push_back(check_disparity_loss(cfg, "loss_appear", disp, [&](const DisparityMap& d) {
    return appearing_loss(d, as.object_mask(), cfg.d_max);
  }));
  report.segments.push_back(check_disparity_loss(cfg, "loss_hide", disp, [&](const DisparityMap& d) {
    return hiding_loss(d, as.object_mask());
  }));
  report.segments.push_back(check_texture_loss(cfg, "loss_tv", texture.image(),
                                               [](const Image& t) { return tv_loss(t); }));
  const Palette palette = fx.settings.palette;
  report.segments.push_back(check_texture_loss(
      cfg, "loss_nps", texture.image(), [&](const Image& t) { return nps_loss(t, palette); },
      [&](const Image& t) { return nps_signature(t, palette); }));

  for (const AttackMode mode : {AttackMode::Merge, AttackMode::Appear}) {
    AttackSettings s = fx.settings;
    s.mode = mode;
    report.segments.push_back(check_chain(cfg, "full_chain_" + to_string(mode), as, s, fx.envs.back(), texture));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace stereocamo
