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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stereocamo/errors.hpp"
#include "stereocamo/gradcheck.hpp"
#include "stereocamo/io.hpp"
#include "stereocamo/metrics.hpp"
#include "stereocamo/optimizer.hpp"
#include "stereocamo/sweep.hpp"
#include "stereocamo/synth.hpp"

using namespace stereocamo;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string mesh;
  std::string palette;
  std::string mode = "merge";
  int d_max = MatcherConfig{}.d_max;
  double temperature = MatcherConfig{}.temperature;
};

fs::path out_dir(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv("STEREOCAMO_OUT");
    dir = env && *env ? env : "out";
  }
  fs::create_directories(dir);
  return dir;
}

Mesh load_mesh(const Common& c) { return c.mesh.empty() ? make_sedan_mesh() : read_obj(c.mesh); }

AttackSettings settings_from(const Common& c) {
  AttackSettings s;
  s.mode = parse_mode(c.mode);
  s.matcher.d_max = c.d_max;
  s.matcher.temperature = c.temperature;
  if (!c.palette.empty()) s.palette = read_palette(c.palette);
  return s;
}

Texture load_texture(const std::string& path) { return Texture(read_png(path)); }

void check_finite(const DisparityMap& d, const std::string& what) {
  for (double v : d.values()) {
    if (!std::isfinite(v)) throw NumericalError(what + " contains non-finite disparities");
  }
}

void append_records(const fs::path& path, const std::vector<EvalRecord>& records) {
  std::string text;
  if (fs::exists(path)) {
    text = read_file(path);
    parse_records_csv(text);  // refuse to extend a file we cannot read back
  } else {
    text = records_csv_header();
  }
  for (const auto& r : records) text += format_record_csv(r);
  write_file_atomic(path, text);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require(used == item.size(), "");
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in list '" + text + "'");
    }
    pos = comma + 1;
  }
  return out;
}

// "3-9,9-15" or "12" (pinned distance).
std::vector<DistanceBin> parse_bins(const std::string& text) {
  std::vector<DistanceBin> bins;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t dash = item.find('-', 1);
    if (dash == std::string::npos) {
      const double d = parse_list(item).front();
      bins.push_back({d, d});
    } else {
      bins.push_back({parse_list(item.substr(0, dash)).front(), parse_list(item.substr(dash + 1)).front()});
    }
    pos = comma + 1;
  }
  return bins;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

int cmd_synth(const Common& c, bool seed_given) {
  const fs::path dir = out_dir(c);
  BenchmarkConfig cfg;
  if (seed_given) cfg.seed = c.seed;
  for (const Scene& s : make_benchmark(cfg)) {
    save_scene(dir / (s.id + ".scene"), s);
    std::printf("%s\n", (dir / (s.id + ".scene")).c_str());
  }
  write_obj(dir / "sedan.obj", make_sedan_mesh());
  std::string palette;
  for (const Rgb& p : default_palette()) {
    char line[64];
    std::snprintf(line, sizeof line, "%.4f %.4f %.4f\n", p[0], p[1], p[2]);
    palette += line;
  }
  write_file_atomic(dir / "palette.txt", palette);
  write_png(dir / "benign.png", benign_texture(80, 80, 3).image());
  return 0;
}

int cmd_render(const Common& c, const std::string& scene_path, const std::string& texture_path,
               const std::string& weather) {
  const fs::path dir = out_dir(c);
  const AttackSettings settings = settings_from(c);
  const AttackScene as(load_scene(scene_path), load_mesh(c), settings);
  require(count(as.object_mask()) > 0, "object is not visible in the left view");
  Rng rng(c.seed);
  const EoTSample env = draw_weather(find_weather(weather), as.scene().lighting, rng);
  const Texture texture = load_texture(texture_path);
  const int H = as.scene().left.height(), W = as.scene().left.width();
  const StereoFrame f = render_frame(as, texture, env, settings.matcher, PixelRect::full(H, W));
  check_finite(f.disparity, "predicted disparity");
  const std::string id = as.scene().id;
  write_png(dir / (id + "_left.png"), f.left);
  write_png(dir / (id + "_right.png"), f.right);
  write_mask_png(dir / (id + "_mask.png"), as.object_mask());
  write_pfm(dir / (id + "_disp.pfm"), f.disparity);
  write_pfm(dir / (id + "_disp_gt.pfm"), render_ground_truth(f.left_render, as.scene().rig));
  write_png(dir / (id + "_disp.png"), colorize_disparity(f.disparity, settings.matcher.d_max));
  std::printf("%s: mask %zu px, outputs in %s\n", id.c_str(), count(as.object_mask()), dir.c_str());
  return 0;
}

int cmd_optimize(const Common& c, const std::vector<std::string>& scene_paths, const std::string& init_path,
                 const std::string& init_kind, int texture_size, OptimConfig optim, int samples,
                 int checkpoint_every) {
  const fs::path dir = out_dir(c);
  const AttackSettings settings = settings_from(c);
  const Mesh mesh = load_mesh(c);
  std::vector<AttackScene> scenes;
  for (const auto& p : scene_paths) scenes.emplace_back(load_scene(p), mesh, settings);
  Texture init;
  if (!init_path.empty()) {
    init = load_texture(init_path);
  } else if (init_kind == "benign") {
    init = benign_texture(texture_size, texture_size, 3);
  } else {
    init = Texture(texture_size, texture_size, 0.5);
  }
  optim.seed = c.seed;
  EoTConfig eot;
  eot.samples_per_step = samples;
  std::string csv = "epoch,mean_loss,lr\n";
  const OptimizeResult res = optimize_texture(scenes, init, settings, eot, optim,
                                              [&](const EpochRecord& r, const Texture& t) {
    char line[96];
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", r.epoch, r.mean_loss, r.lr);
    csv += line;
    if (checkpoint_every > 0 && (r.epoch + 1) % checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof name, "checkpoint_%04d.png", r.epoch + 1);
      write_png(dir / name, t.image());
      write_file_atomic(dir / "loss.csv", csv);
    }
  });
  write_png(dir / "texture.png", res.texture.image());
  write_file_atomic(dir / "loss.csv", csv);
  if (!res.history.empty()) {
    std::printf("epochs %zu final loss %.6g -> %s\n", res.history.size(), res.history.back().mean_loss,
                (dir / "texture.png").c_str());
  }
  return 0;
}

int cmd_evaluate(const Common& c, const std::vector<std::string>& scene_paths, const std::string& adv_path,
                 const std::string& benign_path, const std::string& weather) {
  const fs::path dir = out_dir(c);
  const AttackSettings settings = settings_from(c);
  const Mesh mesh = load_mesh(c);
  const Texture adv = load_texture(adv_path);
  const Texture benign = benign_path.empty() ? benign_texture(adv.height(), adv.width(), 3) : load_texture(benign_path);
  const WeatherPreset preset = find_weather(weather);
  Rng rng(c.seed);
  std::vector<EvalRecord> records;
  for (const auto& p : scene_paths) {
    const AttackScene as(load_scene(p), mesh, settings);
    const MetricConfig mc = MetricConfig::scaled_to_width(as.scene().left.width());
    const EoTSample env = draw_weather(preset, as.scene().lighting, rng);
    const EvalFrames ev = evaluate_textures(as, adv, benign, env, settings.matcher, mc);
    check_finite(ev.adversarial.disparity, "adversarial disparity");
    EvalRecord r = ev.record;
    r.weather = preset.name;
    std::printf("%s e_blend %.4f e_cover %.4f e_shift %.4f\n", r.scene_id.c_str(), r.e_blend, r.e_cover, r.e_shift);
    records.push_back(r);
  }
  append_records(dir / "records.csv", records);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& scene_path, const std::string& adv_path,
              const std::string& benign_path, SweepSpec spec) {
  const fs::path dir = out_dir(c);
  const AttackSettings settings = settings_from(c);
  const Scene scene = load_scene(scene_path);
  const Texture adv = load_texture(adv_path);
  const Texture benign = benign_path.empty() ? benign_texture(adv.height(), adv.width(), 3) : load_texture(benign_path);
  spec.seed = c.seed;
  const MetricConfig mc = MetricConfig::scaled_to_width(scene.left.width());
  const std::vector<EvalRecord> records = run_sweep(scene, load_mesh(c), adv, benign, settings, spec, mc);
  for (const auto& r : records) {
    if (!std::isfinite(r.e_blend) || !std::isfinite(r.e_shift)) throw NumericalError("non-finite metric in sweep");
  }
  std::string text = records_csv_header();
  for (const auto& r : records) text += format_record_csv(r);
  write_file_atomic(dir / "sweep_records.csv", text);
  std::vector<double> edges;
  for (const auto& b : spec.distance_bins) {
    if (edges.empty() || edges.back() != b.lo) edges.push_back(b.lo);
    edges.push_back(b.hi);
  }
  std::vector<Grouping> groupings = {group_overall(), group_by_heading(), group_by_weather()};
  if (edges.size() >= 2 && edges.front() < edges.back()) groupings.push_back(group_by_distance(edges));
  const auto rows = aggregate_report(records, groupings);
  const std::string report = format_report_text(rows);
  write_file_atomic(dir / "sweep_report.txt", report);
  write_file_atomic(dir / "sweep_report.csv", format_report_csv(rows));
  std::cout << report;
  return 0;
}

int cmd_gradcheck(const Common& c, GradcheckConfig cfg) {
  cfg.seed = c.seed;
  const GradcheckReport report = run_gradcheck(cfg);
  std::cout << report.format();
  return report.passed() ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial camouflage textures against stereo matching"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Common c;
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--out", c.out, "Output directory (default: $STEREOCAMO_OUT or ./out)");

  auto add_scene_opts = [&](CLI::App* sub) {
    sub->add_option("--mesh", c.mesh, "OBJ mesh in canonical unit-box coordinates (default: built-in sedan)");
    sub->add_option("--mode", c.mode, "Attack mode")->check(CLI::IsMember({"merge", "appear", "hide"}))
        ->capture_default_str();
    sub->add_option("--d-max", c.d_max, "Largest disparity candidate")->capture_default_str();
    sub->add_option("--temperature", c.temperature, "Soft-argmin temperature")->capture_default_str();
    sub->add_option("--palette", c.palette, "Printable palette, one 'r g b' per line");
  };

  auto* synth = app.add_subcommand("synth", "Write the synthetic benchmark scenes, sedan mesh and palette");

  std::vector<std::string> scenes;
  std::string texture, benign, weather = "nominal";

  auto* render = app.add_subcommand("render", "Render a textured object into a scene and match it");
  add_scene_opts(render);
  render->add_option("--scene", scenes, "Scene manifest")->required()->expected(1);
  render->add_option("--texture", texture, "Texture PNG")->required()->check(CLI::ExistingFile);
  render->add_option("--weather", weather, "Weather preset")->capture_default_str();

  OptimConfig optim;
  int texture_size = 80, samples = 1, checkpoint_every = 0;
  std::string init_kind = "gray";
  auto* optimize = app.add_subcommand("optimize", "Optimize an adversarial texture over one or more scenes");
  add_scene_opts(optimize);
  optimize->add_option("--scene", scenes, "Scene manifests")->required();
  optimize->add_option("--texture", texture, "Initial texture PNG")->check(CLI::ExistingFile);
  optimize->add_option("--init", init_kind, "Initial texture when --texture is absent")
      ->check(CLI::IsMember({"gray", "benign"}))->capture_default_str();
  optimize->add_option("--texture-size", texture_size, "Texture side length")->capture_default_str();
  optimize->add_option("--epochs", optim.epochs)->capture_default_str();
  optimize->add_option("--lr", optim.initial_lr, "Initial learning rate")->capture_default_str();
  optimize->add_option("--min-lr", optim.min_lr)->capture_default_str();
  optimize->add_option("--samples", samples, "Environment draws per step")->capture_default_str();
  optimize->add_option("--checkpoint-every", checkpoint_every, "Epochs between checkpoints (0: none)");

  auto* evaluate = app.add_subcommand("evaluate", "Score an adversarial texture against a benign one");
  add_scene_opts(evaluate);
  evaluate->add_option("--scene", scenes, "Scene manifests")->required();
  evaluate->add_option("--texture", texture, "Adversarial texture PNG")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--benign", benign, "Benign texture PNG (default: built-in paint)")->check(CLI::ExistingFile);
  evaluate->add_option("--weather", weather, "Weather preset")->capture_default_str();

  SweepSpec spec;
  std::string bins = "3-9,9-15,15-20", headings = "0,30,60,90,120,150,180,210,240,270,300,330";
  std::string weathers = "morning,midday,sunset,night,foggy,rainy";
  auto* sweep = app.add_subcommand("sweep", "Evaluate over a grid of distances, headings and weather");
  add_scene_opts(sweep);
  sweep->add_option("--scene", scenes, "Template scene manifest")->required()->expected(1);
  sweep->add_option("--texture", texture, "Adversarial texture PNG")->required()->check(CLI::ExistingFile);
  sweep->add_option("--benign", benign, "Benign texture PNG (default: built-in paint)")->check(CLI::ExistingFile);
  sweep->add_option("--distances", bins, "Distance bins in meters, e.g. 3-9,9-15 or 12")->capture_default_str();
  sweep->add_option("--headings", headings, "Headings in degrees")->capture_default_str();
  sweep->add_option("--weathers", weathers, "Weather presets")->capture_default_str();
  sweep->add_option("--samples", spec.samples_per_cell, "Samples per cell")->capture_default_str();
  sweep->add_option("--threads", spec.threads, "Worker threads (0: all cores)")->capture_default_str();

  GradcheckConfig gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gradcheck->add_option("--texture-size", gc.texture_size)->capture_default_str();
  gradcheck->add_option("--height", gc.image_height)->capture_default_str();
  gradcheck->add_option("--width", gc.image_width)->capture_default_str();
  gradcheck->add_option("--d-max", gc.d_max)->capture_default_str();
  gradcheck->add_flag("--inject-bug", gc.inject_bug, "Corrupt texture gradients by 1% (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) return cmd_synth(c, app.count("--seed") > 0);
    if (*render) return cmd_render(c, scenes.front(), texture, weather);
    if (*optimize) return cmd_optimize(c, scenes, texture, init_kind, texture_size, optim, samples, checkpoint_every);
    if (*evaluate) return cmd_evaluate(c, scenes, texture, benign, weather);
    if (*sweep) {
      spec.distance_bins = parse_bins(bins);
      spec.headings_deg = parse_list(headings);
      spec.weather = split_names(weathers);
      return cmd_sweep(c, scenes.front(), texture, benign, spec);
    }
    if (*gradcheck) return cmd_gradcheck(c, gc);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
