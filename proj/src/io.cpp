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

#include "stereocamo/io.hpp"

#include <png.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "stereocamo/errors.hpp"

namespace stereocamo {

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ValidationError("failed writing " + path.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// PNG

Image read_png(const fs::path& path, int channels) {
  require(channels == 1 || channels == 3, "read_png: channels must be 1 or 3");
  const std::string bytes = read_file(path);
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw ValidationError(path.string() + ": " + img.message);
  }
  img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    throw ValidationError(path.string() + ": " + img.message);
  }
  Image out(static_cast<int>(img.height), static_cast<int>(img.width), channels);
  auto v = out.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = buf[k] / 255.0;
  return out;
}

namespace {

png_byte quantize(double v) {
  return static_cast<png_byte>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png_bytes(const fs::path& path, int height, int width, int channels,
                     const std::vector<png_byte>& pixels) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw ValidationError(path.string() + ": " + img.message);
  }
  std::string bytes(size, '\0');
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw ValidationError(path.string() + ": " + img.message);
  }
  bytes.resize(size);
  write_file_atomic(path, bytes);
}

}  // namespace

void write_png(const fs::path& path, const Image& image) {
  require(image.channels() == 1 || image.channels() == 3, "write_png: channels must be 1 or 3");
  require(!image.empty(), "write_png: empty image");
  std::vector<png_byte> px(image.size());
  auto v = image.values();
  for (std::size_t k = 0; k < v.size(); ++k) px[k] = quantize(v[k]);
  write_png_bytes(path, image.height(), image.width(), image.channels(), px);
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  require(!mask.empty(), "write_mask_png: empty mask");
  std::vector<png_byte> px(mask.size());
  for (std::size_t k = 0; k < mask.size(); ++k) px[k] = mask[k] ? 255 : 0;
  write_png_bytes(path, mask.height(), mask.width(), 1, px);
}

Image colorize_disparity(const DisparityMap& disp, double d_max) {
  require(d_max > 0.0, "colorize_disparity: d_max must be positive");
  Image out(disp.height(), disp.width(), 3);
  for (int i = 0; i < disp.height(); ++i) {
    for (int j = 0; j < disp.width(); ++j) {
      const double t = std::clamp(disp(i, j) / d_max, 0.0, 1.0);
      out(i, j, 0) = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
      out(i, j, 1) = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
      out(i, j, 2) = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PFM

namespace {

std::uint32_t byteswap32(std::uint32_t x) {
  return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
}

bool host_little() { return std::endian::native == std::endian::little; }

}  // namespace

std::string encode_pfm(const DisparityMap& map) {
  require(!map.empty(), "encode_pfm: empty map");
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + map.size() * 4);
  char* p = out.data() + header;
  for (int i = map.height() - 1; i >= 0; --i) {
    for (int j = 0; j < map.width(); ++j) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(map(i, j)));
      if (!host_little()) bits = byteswap32(bits);
      std::memcpy(p, &bits, 4);
      p += 4;
    }
  }
  return out;
}

DisparityMap decode_pfm(const std::string& bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw ValidationError("pfm: truncated header");
    return bytes.substr(start, pos - start);
  };
  const std::string magic = token();
  if (magic == "PF") throw ValidationError("pfm: 3-channel PF files are not supported");
  if (magic != "Pf") throw ValidationError("pfm: bad magic '" + magic + "'");
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(token());
    height = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::logic_error&) {
    throw ValidationError("pfm: malformed header");
  }
  if (width <= 0 || height <= 0) throw ValidationError("pfm: bad dimensions");
  if (scale == 0.0 || !std::isfinite(scale)) throw ValidationError("pfm: bad scale");
  ++pos;  // single whitespace after the scale
  const std::size_t need = static_cast<std::size_t>(width) * height * 4;
  const std::size_t have = bytes.size() > pos ? bytes.size() - pos : 0;
  if (have == need * 3) throw ValidationError("pfm: header 'Pf' but payload holds 3 channels");
  if (have < need) throw ValidationError("pfm: truncated payload");
  if (have > need) throw ValidationError("pfm: trailing bytes after payload");
  const bool file_little = scale < 0.0;
  const bool swap = file_little != host_little();
  DisparityMap out(height, width);
  const char* p = bytes.data() + pos;
  for (int i = height - 1; i >= 0; --i) {
    for (int j = 0; j < width; ++j) {
      std::uint32_t bits;
      std::memcpy(&bits, p, 4);
      p += 4;
      if (swap) bits = byteswap32(bits);
      out(i, j) = std::bit_cast<float>(bits);
    }
  }
  return out;
}

DisparityMap read_pfm(const fs::path& path) {
  try {
    return decode_pfm(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_pfm(const fs::path& path, const DisparityMap& map) { write_file_atomic(path, encode_pfm(map)); }

// ---------------------------------------------------------------------------
// OBJ

Mesh parse_obj(const std::string& text) {
  std::vector<Vec3> v;
  std::vector<Vec2> vt;
  std::vector<Face> faces;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError("obj line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) fail("vertex needs three coordinates");
      v.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ls >> t.x() >> t.y())) fail("texture coordinate needs two values");
      vt.push_back(t);
    } else if (tag == "f") {
      std::vector<std::pair<int, int>> refs;
      std::string ref;
      while (ls >> ref) {
        const auto slash = ref.find('/');
        if (slash == std::string::npos) fail("face vertex needs a v/vt reference");
        const auto slash2 = ref.find('/', slash + 1);
        int vi = 0, ti = 0;
        try {
          vi = std::stoi(ref.substr(0, slash));
          ti = std::stoi(ref.substr(slash + 1, slash2 == std::string::npos ? std::string::npos
                                                                             : slash2 - slash - 1));
        } catch (const std::logic_error&) {
          fail("malformed face reference '" + ref + "'");
        }
        vi = vi < 0 ? static_cast<int>(v.size()) + vi : vi - 1;
        ti = ti < 0 ? static_cast<int>(vt.size()) + ti : ti - 1;
        if (vi < 0 || vi >= static_cast<int>(v.size())) fail("vertex index out of range");
        if (ti < 0 || ti >= static_cast<int>(vt.size())) fail("texture index out of range");
        refs.emplace_back(vi, ti);
      }
      if (refs.size() < 3) fail("face needs at least three vertices");
      for (std::size_t k = 1; k + 1 < refs.size(); ++k) {
        Face f;
        const std::pair<int, int> tri[3] = {refs[0], refs[k], refs[k + 1]};
        for (int c = 0; c < 3; ++c) {
          f.vertex[c] = tri[c].first;
          f.uv[c] = vt[tri[c].second];
        }
        faces.push_back(f);
      }
    }
  }
  return Mesh(std::move(v), std::move(faces));
}

std::string format_obj(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& f : mesh.faces()) {
    for (const auto& t : f.uv) out << "vt " << t.x() << ' ' << t.y() << '\n';
  }
  int t = 1;
  for (const auto& f : mesh.faces()) {
    out << 'f';
    for (int c = 0; c < 3; ++c) out << ' ' << f.vertex[c] + 1 << '/' << t++;
    out << '\n';
  }
  return out.str();
}

Mesh read_obj(const fs::path& path) {
  try {
    return parse_obj(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_obj(const fs::path& path, const Mesh& mesh) { write_file_atomic(path, format_obj(mesh)); }

Palette read_palette(const fs::path& path) {
  try {
    Palette p = parse_palette(read_file(path));
    require(!p.empty(), "palette is empty");
    return p;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ManifestReader {
 public:
  ManifestReader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        static const char* known[] = {"scene", "calibration", "bbox", "lighting"};
        if (std::find(std::begin(known), std::end(known), section) == std::end(known))
          fail(line_no, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
      if (section.empty()) fail(line_no, "key outside of any section");
      const std::string key = trim(line.substr(0, eq));
      if (sections_[section].count(key)) fail(line_no, "duplicate key '" + key + "'");
      sections_[section][key] = Entry{trim(line.substr(eq + 1)), line_no};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ValidationError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  const Entry& get(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) {
      throw ValidationError(origin_ + ": [" + section + "] missing key '" + key + "'");
    }
    return *e;
  }

  std::string text(const std::string& section, const std::string& key) const {
    return get(section, key).value;
  }

  double number(const std::string& section, const std::string& key) const {
    const Entry& e = get(section, key);
    std::istringstream in(e.value);
    double v;
    std::string rest;
    if (!(in >> v) || (in >> rest) || !std::isfinite(v))
      fail(e.line, "[" + section + "] key '" + key + "': expected a finite number");
    return v;
  }

  int integer(const std::string& section, const std::string& key) const {
    const double v = number(section, key);
    if (v != std::floor(v)) fail(get(section, key).line, "key '" + key + "': expected an integer");
    return static_cast<int>(v);
  }

  Vec3 vec3(const std::string& section, const std::string& key) const {
    const Entry& e = get(section, key);
    std::istringstream in(e.value);
    Vec3 v;
    std::string rest;
    if (!(in >> v.x() >> v.y() >> v.z()) || (in >> rest) || !v.allFinite())
      fail(e.line, "[" + section + "] key '" + key + "': expected three numbers");
    return v;
  }

  // Re-throws a validation failure with the section's first line as context.
  template <typename Fn>
  auto in_section(const std::string& section, Fn&& fn) const {
    try {
      return fn();
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.rfind(origin_, 0) == 0) throw;
      int line = 0;
      if (const auto s = sections_.find(section); s != sections_.end()) {
        line = std::numeric_limits<int>::max();
        for (const auto& [k, entry] : s->second) line = std::min(line, entry.line);
      }
      fail(line, "[" + section + "] " + msg);
    }
  }

 private:
  std::string origin_;
  Sections sections_;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string fmt(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  std::error_code ec;
  const fs::path rel = fs::relative(p, base, ec);
  return (ec || rel.empty()) ? p.generic_string() : rel.generic_string();
}

}  // namespace

bool SceneManifest::operator==(const SceneManifest& o) const {
  return id == o.id && left == o.left && right == o.right && ground_truth == o.ground_truth &&
         intrinsics == o.intrinsics && baseline_m == o.baseline_m &&
         left_position == o.left_position && bbox.center == o.bbox.center &&
         bbox.length == o.bbox.length && bbox.width == o.bbox.width &&
         bbox.height == o.bbox.height && bbox.heading == o.bbox.heading &&
         bbox.category == o.bbox.category && lighting.ambient == o.lighting.ambient &&
         lighting.point_light_position == o.lighting.point_light_position &&
         lighting.point_light_intensity == o.lighting.point_light_intensity;
}

SceneManifest parse_manifest(const std::string& text, const fs::path& base_dir,
                             const std::string& origin) {
  const ManifestReader r(text, origin);
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() || base_dir.empty()) ? path : (base_dir / path).lexically_normal();
  };
  SceneManifest m;
  m.id = r.text("scene", "id");
  if (m.id.empty() || m.id.find(',') != std::string::npos)
    r.fail(r.get("scene", "id").line, "[scene] key 'id': must be non-empty without commas");
  m.left = resolve(r.text("scene", "left"));
  m.right = resolve(r.text("scene", "right"));
  if (r.find("scene", "ground_truth")) m.ground_truth = resolve(r.text("scene", "ground_truth"));

  m.intrinsics = r.in_section("calibration", [&] {
    return CameraIntrinsics::make(r.number("calibration", "fx"), r.number("calibration", "fy"),
                                  r.number("calibration", "cx"), r.number("calibration", "cy"),
                                  r.integer("calibration", "width"),
                                  r.integer("calibration", "height"));
  });
  m.baseline_m = r.number("calibration", "baseline_m");
  m.left_position = r.vec3("calibration", "left_position");
  r.in_section("calibration", [&] { return m.rig(); });

  m.bbox = r.in_section("bbox", [&] {
    const std::string category = r.find("bbox", "category") ? r.text("bbox", "category") : "car";
    const bool has_rad = r.find("bbox", "heading") != nullptr;
    const bool has_deg = r.find("bbox", "heading_deg") != nullptr;
    if (has_rad == has_deg) {
      throw ValidationError("exactly one of 'heading' (radians) or 'heading_deg' is required");
    }
    const double heading = has_rad ? r.number("bbox", "heading")
                                   : r.number("bbox", "heading_deg") * std::numbers::pi / 180.0;
    return BBox3D::make(r.vec3("bbox", "center"), r.number("bbox", "length"),
                        r.number("bbox", "width"), r.number("bbox", "height"), heading, category);
  });
  m.lighting = r.in_section("lighting", [&] {
    return Lighting::make(r.number("lighting", "ambient"), r.vec3("lighting", "light_position"),
                          r.number("lighting", "light_intensity"));
  });
  return m;
}

std::string format_manifest(const SceneManifest& m, const fs::path& base_dir) {
  std::ostringstream out;
  out << "[scene]\n";
  out << "id = " << m.id << '\n';
  out << "left = " << relative_to(m.left, base_dir) << '\n';
  out << "right = " << relative_to(m.right, base_dir) << '\n';
  if (m.ground_truth) out << "ground_truth = " << relative_to(*m.ground_truth, base_dir) << '\n';
  out << "\n[calibration]\n";
  out << "fx = " << fmt(m.intrinsics.fx) << '\n';
  out << "fy = " << fmt(m.intrinsics.fy) << '\n';
  out << "cx = " << fmt(m.intrinsics.cx) << '\n';
  out << "cy = " << fmt(m.intrinsics.cy) << '\n';
  out << "width = " << m.intrinsics.width << '\n';
  out << "height = " << m.intrinsics.height << '\n';
  out << "baseline_m = " << fmt(m.baseline_m) << '\n';
  out << "left_position = " << fmt(m.left_position) << '\n';
  out << "\n[bbox]\n";
  out << "center = " << fmt(m.bbox.center) << '\n';
  out << "length = " << fmt(m.bbox.length) << '\n';
  out << "width = " << fmt(m.bbox.width) << '\n';
  out << "height = " << fmt(m.bbox.height) << '\n';
  out << "heading = " << fmt(m.bbox.heading) << '\n';
  out << "category = " << m.bbox.category << '\n';
  out << "\n[lighting]\n";
  out << "ambient = " << fmt(m.lighting.ambient) << '\n';
  out << "light_position = " << fmt(m.lighting.point_light_position) << '\n';
  out << "light_intensity = " << fmt(m.lighting.point_light_intensity) << '\n';
  return out.str();
}

SceneManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.parent_path(), path.string());
}

void save_manifest(const fs::path& path, const SceneManifest& manifest) {
  write_file_atomic(path, format_manifest(manifest, path.parent_path()));
}

Scene load_scene(const fs::path& path) {
  const SceneManifest m = load_manifest(path);
  Image left = read_png(m.left);
  Image right = read_png(m.right);
  const auto& k = m.intrinsics;
  auto check = [&](int h, int w, const fs::path& p) {
    if (h != k.height || w != k.width) {
      throw ValidationError(p.string() + ": size " + std::to_string(w) + "x" + std::to_string(h) +
                            " does not match calibration " + std::to_string(k.width) + "x" +
                            std::to_string(k.height));
    }
  };
  check(left.height(), left.width(), m.left);
  check(right.height(), right.width(), m.right);
  std::optional<DisparityMap> gt;
  if (m.ground_truth) {
    gt = read_pfm(*m.ground_truth);
    check(gt->height(), gt->width(), *m.ground_truth);
  }
  return Scene{m.id, std::move(left), std::move(right), m.rig(), m.bbox, m.lighting, std::move(gt)};
}

void save_scene(const fs::path& path, const Scene& scene) {
  const fs::path dir = path.parent_path();
  SceneManifest m;
  m.id = scene.id;
  m.left = dir / (scene.id + "_left.png");
  m.right = dir / (scene.id + "_right.png");
  write_png(m.left, scene.left);
  write_png(m.right, scene.right);
  if (scene.ground_truth) {
    m.ground_truth = dir / (scene.id + "_gt.pfm");
    write_pfm(*m.ground_truth, *scene.ground_truth);
  }
  m.intrinsics = scene.rig.intrinsics();
  m.baseline_m = scene.rig.baseline();
  m.left_position = scene.rig.left_position();
  m.bbox = scene.bbox;
  m.lighting = scene.lighting;
  save_manifest(path, m);
}

}  // namespace stereocamo
