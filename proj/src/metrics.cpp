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

#include "stereocamo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "stereocamo/errors.hpp"

namespace stereocamo {

void MetricConfig::validate() const {
  require(tau > 0.0, "tau must be positive");
  require(cover_epsilon >= 0.0, "cover_epsilon must be non-negative");
}

MetricConfig MetricConfig::scaled_to_width(int image_width, int full_width) {
  MetricConfig cfg;
  cfg.tau = cfg.tau * image_width / full_width;
  return cfg;
}

namespace {

std::size_t checked_object(const DisparityMap& a, const Mask& object) {
  require(a.same_shape(object), "metric: map and mask sizes differ");
  const std::size_t n = count(object);
  require(n > 0, "metric: object mask is empty");
  return n;
}

}  // namespace

double hiding_error(const DisparityMap& disp, const Mask& object, const Mask& boundary,
                    const MetricConfig& cfg) {
  cfg.validate();
  const std::size_t n = checked_object(disp, object);
  require(boundary.same_shape(object), "hiding_error: boundary mask size differs");
  double ring_sum = 0.0;
  std::size_t ring_n = 0;
  for (std::size_t k = 0; k < disp.size(); ++k) {
    if (boundary[k]) { ring_sum += disp[k]; ++ring_n; }
  }
  require(ring_n > 0, "hiding_error: boundary ring is empty");
  const double global_mean = ring_sum / static_cast<double>(ring_n);

  std::size_t deviating = 0;
  for (int i = 0; i < disp.height(); ++i) {
    double row_sum = 0.0;
    std::size_t row_n = 0;
    bool has_object = false;
    for (int j = 0; j < disp.width(); ++j) {
      if (boundary(i, j)) { row_sum += disp(i, j); ++row_n; }
      has_object = has_object || object(i, j);
    }
    if (!has_object) continue;
    const double row_mean = row_n > 0 ? row_sum / static_cast<double>(row_n) : global_mean;
    for (int j = 0; j < disp.width(); ++j) {
      if (object(i, j) && std::abs(disp(i, j) - row_mean) > cfg.tau) ++deviating;
    }
  }
  return static_cast<double>(deviating) / static_cast<double>(n);
}

double coverage_ratio(const DisparityMap& adv, const DisparityMap& benign, const Mask& object,
                      const MetricConfig& cfg) {
  cfg.validate();
  require(adv.same_shape(benign), "coverage_ratio: map sizes differ");
  const std::size_t n = checked_object(adv, object);
  std::size_t changed = 0;
  for (std::size_t k = 0; k < adv.size(); ++k) {
    if (object[k] && std::abs(adv[k] - benign[k]) > cfg.cover_epsilon) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(n);
}

double depth_shift(const DisparityMap& adv, const DisparityMap& benign, const Mask& object) {
  require(adv.same_shape(benign), "depth_shift: map sizes differ");
  const std::size_t n = checked_object(adv, object);
  double sum = 0.0;
  for (std::size_t k = 0; k < adv.size(); ++k) {
    if (object[k]) sum += adv[k] - benign[k];
  }
  return sum / static_cast<double>(n);
}

Grouping group_overall() {
  return {"overall", [](const EvalRecord&) { return GroupKey{0.0, "all"}; }};
}

Grouping group_by_scene() {
  return {"scene", [](const EvalRecord& r) { return GroupKey{0.0, r.scene_id}; }};
}

Grouping group_by_heading() {
  return {"heading_deg", [](const EvalRecord& r) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", r.heading_deg);
            return GroupKey{r.heading_deg, buf};
          }};
}

Grouping group_by_weather() {
  return {"weather", [](const EvalRecord& r) { return GroupKey{0.0, r.weather}; }};
}

Grouping group_by_distance(std::vector<double> edges) {
  require(edges.size() >= 2 && std::is_sorted(edges.begin(), edges.end()),
          "distance bins must be ordered");
  return {"distance_m", [edges = std::move(edges)](const EvalRecord& r) {
            std::size_t bin = 0;
            while (bin + 2 < edges.size() && r.distance_m >= edges[bin + 1]) ++bin;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%g-%g", edges[bin], edges[bin + 1]);
            return GroupKey{edges[bin], buf};
          }};
}

std::vector<ReportRow> aggregate_report(const std::vector<EvalRecord>& records,
                                        const std::vector<Grouping>& groupings) {
  require(!records.empty(), "aggregate_report: no records");
  std::vector<ReportRow> rows;
  for (const Grouping& g : groupings) {
    std::map<std::pair<double, std::string>, ReportRow> groups;
    for (const EvalRecord& r : records) {
      const GroupKey key = g.key(r);
      ReportRow& row = groups[{key.order, key.label}];
      row.grouping = g.name;
      row.label = key.label;
      ++row.count;
      row.e_blend += r.e_blend;
      row.e_cover += r.e_cover;
      row.e_shift += r.e_shift;
    }
    for (auto& [key, row] : groups) {
      const double n = static_cast<double>(row.count);
      row.e_blend /= n;
      row.e_cover /= n;
      row.e_shift /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_report_text(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-12s %6s %9s %9s %9s\n", "grouping", "group", "n",
                "e_blend", "e_cover", "e_shift");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %-12s %6zu %9.4f %9.4f %9.4f\n", r.grouping.c_str(),
                  r.label.c_str(), r.count, r.e_blend, r.e_cover, r.e_shift);
    out << line;
  }
  return out.str();
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "grouping,group,count,e_blend,e_cover,e_shift\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%s,%zu,%.6f,%.6f,%.6f\n", r.grouping.c_str(),
                  r.label.c_str(), r.count, r.e_blend, r.e_cover, r.e_shift);
    out << line;
  }
  return out.str();
}

std::string records_csv_header() {
  return "scene_id,distance_m,heading_deg,weather,e_blend,e_cover,e_shift\n";
}

std::string format_record_csv(const EvalRecord& r) {
  char line[512];
  std::snprintf(line, sizeof line, "%s,%.4f,%.2f,%s,%.6f,%.6f,%.6f\n", r.scene_id.c_str(),
                r.distance_m, r.heading_deg, r.weather.c_str(), r.e_blend, r.e_cover, r.e_shift);
  return line;
}

std::vector<EvalRecord> parse_records_csv(const std::string& text) {
  std::vector<EvalRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("scene_id,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw ValidationError("records line " + std::to_string(line_no) + ": expected 7 columns");
    }
    try {
      out.push_back(EvalRecord{cells[0], std::stod(cells[1]), std::stod(cells[2]), cells[3],
                               std::stod(cells[4]), std::stod(cells[5]), std::stod(cells[6])});
    } catch (const std::logic_error&) {
      throw ValidationError("records line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

}  // namespace stereocamo
