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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <optional>

#include "stereocamo/gradcheck.hpp"
#include "stereocamo/io.hpp"
#include "stereocamo/optimizer.hpp"
#include "stereocamo/sweep.hpp"
#include "stereocamo/synth.hpp"

namespace py = pybind11;
using namespace stereocamo;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) arrays become single-channel images.
Image image_from_array(const DoubleArray& a) {
  require(a.ndim() == 2 || a.ndim() == 3, "image array must have shape (H, W) or (H, W, C)");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  Image img(h, w, c);
  std::copy(a.data(), a.data() + a.size(), img.values().begin());
  return img;
}

DoubleArray image_to_array(const Image& img) {
  DoubleArray out({img.height(), img.width(), img.channels()});
  std::copy(img.values().begin(), img.values().end(), out.mutable_data());
  return out;
}

ScalarMap map_from_array(const DoubleArray& a) {
  require(a.ndim() == 2, "map array must have shape (H, W)");
  ScalarMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

DoubleArray map_to_array(const ScalarMap& m) {
  DoubleArray out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Mask mask_from_array(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  require(a.ndim() == 2, "mask array must have shape (H, W)");
  Mask m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  for (py::ssize_t k = 0; k < a.size(); ++k) m[k] = a.data()[k] ? 1 : 0;
  return m;
}

py::array_t<bool> mask_to_array(const Mask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  for (std::size_t k = 0; k < m.size(); ++k) out.mutable_data()[k] = m[k] != 0;
  return out;
}

Vec3 vec3(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }
std::array<double, 3> arr3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

AttackSettings settings_for(const std::string& mode, bool stereo_aligned, const MatcherConfig& matcher) {
  AttackSettings s;
  s.mode = parse_mode(mode);
  s.stereo_aligned = stereo_aligned;
  s.matcher = matcher;
  return s;
}

}  // namespace

PYBIND11_MODULE(_stereocamo, m) {
  m.doc() = "Adversarial camouflage textures against stereo matching";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ViewpointSpherical>(m, "Viewpoint")
      .def(py::init([](double dist, double elev, double azim) { return ViewpointSpherical{dist, elev, azim}; }),
           py::arg("dist"), py::arg("elev"), py::arg("azim"))
      .def_readwrite("dist", &ViewpointSpherical::dist)
      .def_readwrite("elev", &ViewpointSpherical::elev)
      .def_readwrite("azim", &ViewpointSpherical::azim)
      .def("__repr__", [](const ViewpointSpherical& v) {
        return "Viewpoint(dist=" + std::to_string(v.dist) + ", elev=" + std::to_string(v.elev) +
               ", azim=" + std::to_string(v.azim) + ")";
      });

  m.def("viewpoint_from_camera",
        [](const std::array<double, 3>& camera, const std::array<double, 3>& center) {
          return viewpoint_from_camera(vec3(camera), vec3(center));
        },
        py::arg("camera"), py::arg("center"));
  m.def("camera_from_viewpoint",
        [](const ViewpointSpherical& vp, const std::array<double, 3>& center) {
          return arr3(camera_from_viewpoint(vp, vec3(center)));
        },
        py::arg("viewpoint"), py::arg("center"));

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init(&CameraIntrinsics::make), py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height);

  m.def("disparity_to_depth", &disparity_to_depth, py::arg("disparity"), py::arg("intrinsics"), py::arg("baseline"));
  m.def("depth_to_disparity", &depth_to_disparity, py::arg("depth"), py::arg("intrinsics"), py::arg("baseline"));

  py::class_<BBox3D>(m, "BBox3D")
      .def(py::init([](const std::array<double, 3>& center, double length, double width, double height,
                       double heading, std::string category) {
             return BBox3D::make(vec3(center), length, width, height, heading, std::move(category));
           }),
           py::arg("center"), py::arg("length"), py::arg("width"), py::arg("height"), py::arg("heading"),
           py::arg("category") = "car")
      .def_property_readonly("center", [](const BBox3D& b) { return arr3(b.center); })
      .def_readonly("length", &BBox3D::length)
      .def_readonly("width", &BBox3D::width)
      .def_readonly("height", &BBox3D::height)
      .def_readonly("heading", &BBox3D::heading)
      .def_readonly("category", &BBox3D::category);

  py::enum_<MatchCost>(m, "MatchCost").value("SAD", MatchCost::SAD).value("ZNCC", MatchCost::ZNCC);

  py::class_<MatcherConfig>(m, "MatcherConfig")
      .def(py::init([](int d_max, int patch_radius, double temperature, MatchCost cost) {
             MatcherConfig c{d_max, patch_radius, temperature, cost};
             c.validate();
             return c;
           }),
           py::arg("d_max") = MatcherConfig{}.d_max, py::arg("patch_radius") = MatcherConfig{}.patch_radius,
           py::arg("temperature") = MatcherConfig{}.temperature, py::arg("cost") = MatchCost::SAD)
      .def_readwrite("d_max", &MatcherConfig::d_max)
      .def_readwrite("patch_radius", &MatcherConfig::patch_radius)
      .def_readwrite("temperature", &MatcherConfig::temperature)
      .def_readwrite("cost", &MatcherConfig::cost);

  m.def("predict_disparity",
        [](const DoubleArray& left, const DoubleArray& right, const MatcherConfig& cfg) {
          return map_to_array(predict_disparity(image_from_array(left), image_from_array(right), cfg));
        },
        py::arg("left"), py::arg("right"), py::arg("config") = MatcherConfig{});
  m.def("wta_baseline",
        [](const DoubleArray& left, const DoubleArray& right, const MatcherConfig& cfg) {
          return map_to_array(wta_baseline(image_from_array(left), image_from_array(right), cfg));
        },
        py::arg("left"), py::arg("right"), py::arg("config") = MatcherConfig{});
  m.def("shifted_pair",
        [](int height, int width, int disparity, std::uint64_t seed) {
          auto [l, r] = shifted_pair(height, width, disparity, seed);
          return py::make_tuple(image_to_array(l), image_to_array(r));
        },
        py::arg("height"), py::arg("width"), py::arg("disparity"), py::arg("seed") = 0);

  py::class_<MetricConfig>(m, "MetricConfig")
      .def(py::init([](double tau, double cover_epsilon) {
             MetricConfig c{tau, cover_epsilon};
             c.validate();
             return c;
           }),
           py::arg("tau") = MetricConfig{}.tau, py::arg("cover_epsilon") = MetricConfig{}.cover_epsilon)
      .def_static("scaled_to_width", &MetricConfig::scaled_to_width, py::arg("image_width"),
                  py::arg("full_width") = 1242)
      .def_readwrite("tau", &MetricConfig::tau)
      .def_readwrite("cover_epsilon", &MetricConfig::cover_epsilon);

  m.def("hiding_error",
        [](const DoubleArray& disp, const py::array& object, const py::array& boundary, const MetricConfig& cfg) {
          return hiding_error(map_from_array(disp), mask_from_array(object), mask_from_array(boundary), cfg);
        },
        py::arg("disparity"), py::arg("object"), py::arg("boundary"), py::arg("config") = MetricConfig{});
  m.def("coverage_ratio",
        [](const DoubleArray& adv, const DoubleArray& benign, const py::array& object, const MetricConfig& cfg) {
          return coverage_ratio(map_from_array(adv), map_from_array(benign), mask_from_array(object), cfg);
        },
        py::arg("adversarial"), py::arg("benign"), py::arg("object"), py::arg("config") = MetricConfig{});
  m.def("depth_shift",
        [](const DoubleArray& adv, const DoubleArray& benign, const py::array& object) {
          return depth_shift(map_from_array(adv), map_from_array(benign), mask_from_array(object));
        },
        py::arg("adversarial"), py::arg("benign"), py::arg("object"));

  py::class_<EvalRecord>(m, "EvalRecord")
      .def_readonly("scene_id", &EvalRecord::scene_id)
      .def_readonly("distance_m", &EvalRecord::distance_m)
      .def_readonly("heading_deg", &EvalRecord::heading_deg)
      .def_readonly("weather", &EvalRecord::weather)
      .def_readonly("e_blend", &EvalRecord::e_blend)
      .def_readonly("e_cover", &EvalRecord::e_cover)
      .def_readonly("e_shift", &EvalRecord::e_shift)
      .def("to_csv", &format_record_csv);

  py::class_<Scene>(m, "Scene")
      .def_readonly("id", &Scene::id)
      .def_property_readonly("left", [](const Scene& s) { return image_to_array(s.left); })
      .def_property_readonly("right", [](const Scene& s) { return image_to_array(s.right); })
      .def_readonly("bbox", &Scene::bbox)
      .def_property_readonly("intrinsics", [](const Scene& s) { return s.rig.intrinsics(); })
      .def_property_readonly("baseline", [](const Scene& s) { return s.rig.baseline(); })
      .def_property_readonly("ground_truth", [](const Scene& s) -> std::optional<DoubleArray> {
        if (!s.ground_truth) return std::nullopt;
        return map_to_array(*s.ground_truth);
      });

  m.def("load_scene", &load_scene, py::arg("path"));
  m.def("save_scene", &save_scene, py::arg("path"), py::arg("scene"));
  m.def("make_benchmark", [](std::uint64_t seed) {
    BenchmarkConfig cfg;
    cfg.seed = seed;
    return make_benchmark(cfg);
  }, py::arg("seed") = BenchmarkConfig{}.seed);
  m.def("benign_texture",
        [](int height, int width, std::uint64_t seed) { return image_to_array(benign_texture(height, width, seed).image()); },
        py::arg("height"), py::arg("width"), py::arg("seed") = 3);

  m.def("read_pfm", [](const fs::path& p) { return map_to_array(read_pfm(p)); }, py::arg("path"));
  m.def("write_pfm", [](const fs::path& p, const DoubleArray& a) { write_pfm(p, map_from_array(a)); },
        py::arg("path"), py::arg("disparity"));

  m.def("render",
        [](const Scene& scene, const DoubleArray& texture, const MatcherConfig& matcher) {
          const AttackSettings st = settings_for("merge", true, matcher);
          const AttackScene as(scene, make_sedan_mesh(), st);
          const StereoFrame f = render_frame(as, Texture(image_from_array(texture)), nominal_sample(scene.lighting),
                                             matcher, as.eval_region());
          py::dict out;
          out["left"] = image_to_array(f.left);
          out["right"] = image_to_array(f.right);
          out["mask"] = mask_to_array(as.object_mask());
          out["boundary"] = mask_to_array(as.context().boundary);
          out["disparity"] = map_to_array(f.disparity);
          out["ground_truth"] = map_to_array(render_ground_truth(f.left_render, scene.rig));
          return out;
        },
        py::arg("scene"), py::arg("texture"), py::arg("matcher") = MatcherConfig{},
        "Renders the built-in sedan with `texture` into both eyes under nominal lighting.");

  m.def("optimize",
        [](const std::vector<Scene>& scenes, const std::string& mode, std::optional<DoubleArray> init,
           int texture_size, int epochs, double lr, std::uint64_t seed, bool stereo_aligned) {
          const AttackSettings st = settings_for(mode, stereo_aligned, MatcherConfig{});
          std::vector<AttackScene> attack;
          for (const auto& s : scenes) attack.emplace_back(s, make_sedan_mesh(), st);
          OptimConfig oc;
          oc.epochs = epochs;
          oc.initial_lr = lr;
          oc.min_lr = std::min(oc.min_lr, lr);
          oc.seed = seed;
          const Texture start = init ? Texture(image_from_array(*init)) : Texture(texture_size, texture_size, 0.5);
          OptimizeResult res;
          {
            py::gil_scoped_release release;
            res = optimize_texture(attack, start, st, EoTConfig{}, oc);
          }
          std::vector<double> losses;
          for (const auto& e : res.history) losses.push_back(e.mean_loss);
          return py::make_tuple(image_to_array(res.texture.image()), losses);
        },
        py::arg("scenes"), py::arg("mode") = "merge", py::arg("init") = py::none(), py::arg("texture_size") = 80,
        py::arg("epochs") = 100, py::arg("lr") = OptimConfig{}.initial_lr, py::arg("seed") = 0,
        py::arg("stereo_aligned") = true,
        "Optimizes a texture for the built-in sedan. Returns (texture, per-epoch mean loss).");

  m.def("evaluate",
        [](const Scene& scene, const DoubleArray& adversarial, const DoubleArray& benign) {
          const AttackSettings st;
          const AttackScene as(scene, make_sedan_mesh(), st);
          return evaluate_scene(as, Texture(image_from_array(adversarial)), Texture(image_from_array(benign)),
                                nominal_sample(scene.lighting), st.matcher,
                                MetricConfig::scaled_to_width(scene.left.width()));
        },
        py::arg("scene"), py::arg("adversarial"), py::arg("benign"));

  py::class_<SegmentResult>(m, "SegmentResult")
      .def_readonly("name", &SegmentResult::name)
      .def_readonly("worst_rel_error", &SegmentResult::worst_rel_error)
      .def_readonly("checked", &SegmentResult::checked)
      .def_readonly("tolerance", &SegmentResult::tolerance)
      .def_property_readonly("passed", &SegmentResult::passed);

  py::class_<GradcheckReport>(m, "GradcheckReport")
      .def_readonly("segments", &GradcheckReport::segments)
      .def_readonly("seconds", &GradcheckReport::seconds)
      .def_property_readonly("passed", &GradcheckReport::passed)
      .def("format", &GradcheckReport::format);

  m.def("gradcheck",
        [](int texture_size, int image_height, int image_width, int d_max, std::uint64_t seed, bool inject_bug) {
          GradcheckConfig cfg;
          cfg.texture_size = texture_size;
          cfg.image_height = image_height;
          cfg.image_width = image_width;
          cfg.d_max = d_max;
          cfg.seed = seed;
          cfg.inject_bug = inject_bug;
          py::gil_scoped_release release;
          return run_gradcheck(cfg);
        },
        py::arg("texture_size") = 16, py::arg("image_height") = 48, py::arg("image_width") = 64,
        py::arg("d_max") = 16, py::arg("seed") = 0, py::arg("inject_bug") = false);
}
