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

#include "stereocamo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <cstdio>
#include <numbers>

#include "stereocamo/errors.hpp"

namespace stereocamo {

EvalFrames evaluate_textures(const AttackScene& scene, const Texture& adversarial,
                             const Texture& benign, const EoTSample& env,
                             const MatcherConfig& matcher, const MetricConfig& metrics) {
  EvalFrames out;
  out.adversarial = render_frame(scene, adversarial, env, matcher, scene.eval_region());
  out.benign = render_frame(scene, benign, env, matcher, scene.eval_region());
  const Mask& m = scene.object_mask();
  const Scene& s = scene.scene();
  EvalRecord& r = out.record;
  r.scene_id = s.id;
  r.distance_m = (s.bbox.center - s.rig.left_position()).norm();
  r.heading_deg = s.bbox.heading * 180.0 / std::numbers::pi;
  r.e_blend = hiding_error(out.adversarial.disparity, m, scene.context().boundary, metrics);
  r.e_cover = coverage_ratio(out.adversarial.disparity, out.benign.disparity, m, metrics);
  r.e_shift = depth_shift(out.adversarial.disparity, out.benign.disparity, m);
  return out;
}

EvalRecord evaluate_scene(const AttackScene& scene, const Texture& adversarial,
                          const Texture& benign, const EoTSample& env,
                          const MatcherConfig& matcher, const MetricConfig& metrics) {
  return evaluate_textures(scene, adversarial, benign, env, matcher, metrics).record;
}

std::vector<WeatherPreset> weather_presets() {
  auto preset = [](std::string name, double amb_lo, double amb_hi, double sigma, double intensity) {
    WeatherPreset p;
    p.name = std::move(name);
    p.randomized = true;
    p.eot.ambient_min = amb_lo;
    p.eot.ambient_max = amb_hi;
    p.eot.noise_sigma_max = sigma;
    p.light_intensity_scale = intensity;
    return p;
  };
  return {
      WeatherPreset{"nominal", false, {}, 1.0},
      preset("morning", 0.45, 0.60, 0.01, 0.8),
      preset("midday", 0.70, 0.90, 0.005, 1.2),
      preset("sunset", 0.35, 0.50, 0.01, 0.6),
      preset("night", 0.15, 0.30, 0.02, 0.3),
      preset("foggy", 0.40, 0.60, 0.04, 0.5),
      preset("rainy", 0.30, 0.50, 0.03, 0.7),
  };
}

WeatherPreset find_weather(const std::string& name) {
  for (auto& p : weather_presets()) {
    if (p.name == name) return p;
  }
  throw ValidationError("unknown weather preset '" + name + "'");
}

EoTSample draw_weather(const WeatherPreset& preset, const Lighting& nominal, Rng& rng) {
  if (!preset.randomized) return nominal_sample(nominal);
  Lighting base = nominal;
  base.point_light_intensity *= preset.light_intensity_scale;
  return sample_eot(rng, preset.eot, base);
}

void SweepSpec::validate() const {
  require(!distance_bins.empty() && !headings_deg.empty() && !weather.empty(),
          "sweep grid must not be empty");
  require(samples_per_cell >= 1, "samples per cell must be at least 1");
  require(threads >= 0, "thread count must be non-negative");
  for (std::size_t k = 0; k < distance_bins.size(); ++k) {
    const auto& b = distance_bins[k];
    require(b.lo > 0.0 && b.lo <= b.hi, "distance bins must be positive and ordered");
    if (k > 0) require(distance_bins[k - 1].hi <= b.lo, "distance bins must not overlap");
  }
  for (const auto& w : weather) find_weather(w);
}

BBox3D place_at_viewpoint(const Scene& scene, double distance_m, double heading_rad) {
  const Vec3& cam = scene.rig.left_position();
  const double drop = cam.y() - scene.bbox.center.y();
  require(distance_m > std::abs(drop), "distance too small to keep the object on the ground");
  ViewpointSpherical vp = viewpoint_from_camera(cam, scene.bbox);
  vp.dist = distance_m;
  vp.elev = std::asin(drop / distance_m);
  const Vec3 center = cam - camera_from_viewpoint(vp, Vec3::Zero());
  return BBox3D::make(center, scene.bbox.length, scene.bbox.width, scene.bbox.height, heading_rad,
                      scene.bbox.category);
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell) {
  // splitmix64 step, so neighbouring cells get unrelated streams.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (cell + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string fmt_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<EvalRecord> run_sweep(const Scene& scene, const Mesh& canonical_mesh,
                                  const Texture& adversarial, const Texture& benign,
                                  const AttackSettings& settings, const SweepSpec& spec,
                                  const MetricConfig& metrics) {
  spec.validate();
  std::vector<WeatherPreset> presets;
  for (const auto& w : spec.weather) presets.push_back(find_weather(w));

  struct Cell {
    DistanceBin bin;
    double heading = 0.0;
    const WeatherPreset* preset = nullptr;
  };
  std::vector<Cell> cells;
  cells.reserve(spec.cell_count());
  for (const auto& bin : spec.distance_bins) {
    for (const double heading : spec.headings_deg) {
      for (const auto& preset : presets) cells.push_back({bin, heading, &preset});
    }
  }

  const std::size_t per_cell = static_cast<std::size_t>(spec.samples_per_cell);
  std::vector<EvalRecord> records(cells.size() * per_cell);
  std::vector<std::exception_ptr> errors(cells.size());

  auto run_cell = [&](std::size_t c) {
    const Cell& cell = cells[c];
    Rng rng(cell_seed(spec.seed, c));
    for (std::size_t s = 0; s < per_cell; ++s) {
      const double dist = cell.bin.lo == cell.bin.hi
                              ? cell.bin.lo
                              : std::uniform_real_distribution<double>(cell.bin.lo, cell.bin.hi)(rng);
      Scene placed = scene;
      placed.bbox = place_at_viewpoint(scene, dist, cell.heading * std::numbers::pi / 180.0);
      placed.lighting.point_light_position += placed.bbox.center - scene.bbox.center;
      placed.id = scene.id + "_d" + fmt_label(cell.bin.lo) + "-" + fmt_label(cell.bin.hi) + "_h" +
                  fmt_label(cell.heading) + "_" + cell.preset->name + "_s" + std::to_string(s);
      try {
        const AttackScene as(std::move(placed), canonical_mesh, settings);
        const EoTSample env = draw_weather(*cell.preset, as.scene().lighting, rng);
        EvalRecord r = evaluate_scene(as, adversarial, benign, env, settings.matcher, metrics);
        r.heading_deg = cell.heading;
        r.weather = cell.preset->name;
        records[c * per_cell + s] = std::move(r);
      } catch (const ValidationError& e) {
        throw ValidationError("sweep cell " + scene.id + " d=" + fmt_label(dist) + " h=" +
                              fmt_label(cell.heading) + ": " + e.what());
      }
    }
  };

  int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        run_cell(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  // Report the failure of the first cell in grid order, whatever finished first.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

}  // namespace stereocamo
