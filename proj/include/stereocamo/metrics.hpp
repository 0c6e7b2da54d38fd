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

#include <functional>
#include <string>
#include <vector>

#include "stereocamo/image.hpp"

namespace stereocamo {

struct MetricConfig {
  double tau = 20.0;            // deviation threshold, disparity pixels
  double cover_epsilon = 1e-3;  // smallest change counted as altered

  void validate() const;
  // tau expressed at a reduced image width (tau * width / full_width).
  static MetricConfig scaled_to_width(int image_width, int full_width = 1242);
};

// Fraction of object pixels whose disparity differs from the mean disparity of
// the boundary ring in the same row by more than tau. Rows without ring pixels
// use the mean over the whole ring.
double hiding_error(const DisparityMap& disp, const Mask& object, const Mask& boundary,
                    const MetricConfig& cfg);

// Fraction of object pixels with |adv - benign| > cover_epsilon.
double coverage_ratio(const DisparityMap& adv, const DisparityMap& benign, const Mask& object,
                      const MetricConfig& cfg);

// Signed mean of (adv - benign) over the object.
double depth_shift(const DisparityMap& adv, const DisparityMap& benign, const Mask& object);

struct EvalRecord {
  std::string scene_id;
  double distance_m = 0.0;
  double heading_deg = 0.0;
  std::string weather = "nominal";
  double e_blend = 0.0;
  double e_cover = 0.0;
  double e_shift = 0.0;
};

struct GroupKey {
  double order = 0.0;
  std::string label;
};

struct Grouping {
  std::string name;
  std::function<GroupKey(const EvalRecord&)> key;
};

Grouping group_overall();
Grouping group_by_scene();
Grouping group_by_heading();
Grouping group_by_weather();
// Bins are [edge_k, edge_{k+1}); the last bin is closed.
Grouping group_by_distance(std::vector<double> edges);

struct ReportRow {
  std::string grouping;
  std::string label;
  std::size_t count = 0;
  double e_blend = 0.0;
  double e_cover = 0.0;
  double e_shift = 0.0;
};

// Per-group means, groups ordered by key.
std::vector<ReportRow> aggregate_report(const std::vector<EvalRecord>& records,
                                        const std::vector<Grouping>& groupings);

std::string format_report_text(const std::vector<ReportRow>& rows);
std::string format_report_csv(const std::vector<ReportRow>& rows);

// CSV schema: scene_id,distance_m,heading_deg,weather,e_blend,e_cover,e_shift
std::string records_csv_header();
std::string format_record_csv(const EvalRecord& record);
std::vector<EvalRecord> parse_records_csv(const std::string& text);

}  // namespace stereocamo
