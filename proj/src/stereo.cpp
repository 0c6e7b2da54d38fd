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

#include "stereocamo/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stereocamo/errors.hpp"

namespace stereocamo {

namespace {

constexpr double kZnccEps = 1e-6;

PixelRect resolve(const std::optional<PixelRect>& region, int height, int width) {
  PixelRect r = region.value_or(PixelRect::full(height, width));
  r.row0 = std::clamp(r.row0, 0, height);
  r.row1 = std::clamp(r.row1, r.row0, height);
  r.col0 = std::clamp(r.col0, 0, width);
  r.col1 = std::clamp(r.col1, r.col0, width);
  return r;
}

void check_pair(const Image& left, const Image& right, const MatcherConfig& cfg) {
  cfg.validate();
  require(left.same_shape(right), "stereo pair resolutions differ");
  require(cfg.d_max < left.width(), "d_max must be smaller than the image width");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Dense views over the extended sampling domain of one candidate d: rows
// [row0-r, row1+r) and columns [col0-r, col1+r), both clamped into the image.
struct Window {
  int r;
  PixelRect roi;
  int rows() const { return roi.row1 - roi.row0 + 2 * r; }
  int cols() const { return roi.col1 - roi.col0 + 2 * r; }
  int image_row(int er, int height) const { return std::clamp(roi.row0 - r + er, 0, height - 1); }
  int column(int ec) const { return roi.col0 - r + ec; }  // unclamped
};

// Sum over the (2r+1)^2 window of a dense rows x cols buffer; output is roi-sized.
void box_sum(const std::vector<double>& src, int rows, int cols, int r, std::vector<double>& tmp,
             std::vector<double>& dst) {
  const int out_rows = rows - 2 * r;
  const int out_cols = cols - 2 * r;
  tmp.assign(static_cast<std::size_t>(rows) * out_cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const double* s = &src[static_cast<std::size_t>(i) * cols];
    double acc = 0.0;
    for (int k = 0; k < 2 * r + 1; ++k) acc += s[k];
    double* t = &tmp[static_cast<std::size_t>(i) * out_cols];
    t[0] = acc;
    for (int j = 1; j < out_cols; ++j) {
      acc += s[j + 2 * r] - s[j - 1];
      t[j] = acc;
    }
  }
  dst.assign(static_cast<std::size_t>(out_rows) * out_cols, 0.0);
  for (int j = 0; j < out_cols; ++j) {
    double acc = 0.0;
    for (int k = 0; k < 2 * r + 1; ++k) acc += tmp[static_cast<std::size_t>(k) * out_cols + j];
    dst[j] = acc;
    for (int i = 1; i < out_rows; ++i) {
      acc += tmp[static_cast<std::size_t>(i + 2 * r) * out_cols + j] -
             tmp[static_cast<std::size_t>(i - 1) * out_cols + j];
      dst[static_cast<std::size_t>(i) * out_cols + j] = acc;
    }
  }
}

// Adjoint of box_sum: spreads an roi-sized buffer back over the extended domain.
void box_spread(const std::vector<double>& src, int rows, int cols, int r, std::vector<double>& tmp,
                std::vector<double>& dst) {
  const int in_rows = rows - 2 * r;
  const int in_cols = cols - 2 * r;
  tmp.assign(static_cast<std::size_t>(rows) * in_cols, 0.0);
  for (int i = 0; i < in_rows; ++i) {
    for (int j = 0; j < in_cols; ++j) {
      const double v = src[static_cast<std::size_t>(i) * in_cols + j];
      if (v == 0.0) continue;
      for (int k = 0; k <= 2 * r; ++k) tmp[static_cast<std::size_t>(i + k) * in_cols + j] += v;
    }
  }
  dst.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < in_cols; ++j) {
      const double v = tmp[static_cast<std::size_t>(i) * in_cols + j];
      if (v == 0.0) continue;
      double* d = &dst[static_cast<std::size_t>(i) * cols + j];
      for (int k = 0; k <= 2 * r; ++k) d[k] += v;
    }
  }
}

struct Patch {
  std::vector<double> a, b;
  std::vector<int> ai, aj, bj;
};

// Gathers the left patch at (i,j) and right patch at (i,j-d) with edge clamping.
void gather(const ScalarMap& L, const ScalarMap& R, int i, int j, int d, int r, Patch& p) {
  const int H = L.height(), W = L.width();
  p.a.clear(); p.b.clear(); p.ai.clear(); p.aj.clear(); p.bj.clear();
  for (int di = -r; di <= r; ++di) {
    const int ii = std::clamp(i + di, 0, H - 1);
    for (int dj = -r; dj <= r; ++dj) {
      const int ja = std::clamp(j + dj, 0, W - 1);
      const int jb = std::clamp(j + dj - d, 0, W - 1);
      p.a.push_back(L(ii, ja));
      p.b.push_back(R(ii, jb));
      p.ai.push_back(ii);
      p.aj.push_back(ja);
      p.bj.push_back(jb);
    }
  }
}

struct NccTerms {
  double mean_a, mean_b, A, B, C, D;
};

NccTerms ncc_terms(const Patch& p) {
  const double n = static_cast<double>(p.a.size());
  NccTerms t{};
  for (std::size_t k = 0; k < p.a.size(); ++k) {
    t.mean_a += p.a[k];
    t.mean_b += p.b[k];
  }
  t.mean_a /= n;
  t.mean_b /= n;
  for (std::size_t k = 0; k < p.a.size(); ++k) {
    const double da = p.a[k] - t.mean_a;
    const double db = p.b[k] - t.mean_b;
    t.A += da * da;
    t.B += db * db;
    t.C += da * db;
  }
  t.D = std::sqrt((t.A + kZnccEps) * (t.B + kZnccEps));
  return t;
}

}  // namespace

void MatcherConfig::validate() const {
  require(d_max >= 1, "d_max must be at least 1");
  require(patch_radius >= 0, "patch_radius must be non-negative");
  require(std::isfinite(temperature) && temperature > 0.0, "temperature must be positive");
}

PixelRect PixelRect::around(const Mask& mask, int margin) {
  int r0 = mask.height(), r1 = -1, c0 = mask.width(), c1 = -1;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (!mask(i, j)) continue;
      r0 = std::min(r0, i); r1 = std::max(r1, i);
      c0 = std::min(c0, j); c1 = std::max(c1, j);
    }
  }
  if (r1 < 0) return {0, 0, 0, 0};
  return {std::max(0, r0 - margin), std::min(mask.height(), r1 + 1 + margin),
          std::max(0, c0 - margin), std::min(mask.width(), c1 + 1 + margin)};
}

CostVolume cost_volume(const Image& left, const Image& right, const MatcherConfig& cfg,
                       std::optional<PixelRect> region) {
  check_pair(left, right, cfg);
  const int H = left.height(), W = left.width();
  const int D = cfg.d_max + 1;
  const int r = cfg.patch_radius;
  const ScalarMap L = to_luma(left);
  const ScalarMap R = to_luma(right);
  const PixelRect roi = resolve(region, H, W);
  CostVolume cv(H, W, D);
  if (roi.row1 == roi.row0 || roi.col1 == roi.col0) return cv;

  if (cfg.cost == MatchCost::SAD) {
    const Window win{r, roi};
    const int er = win.rows(), ec = win.cols();
    std::vector<double> absdiff(static_cast<std::size_t>(er) * ec), tmp, sums;
    const int out_cols = roi.col1 - roi.col0;
    for (int d = 0; d < D; ++d) {
      for (int a = 0; a < er; ++a) {
        const int ii = win.image_row(a, H);
        for (int b = 0; b < ec; ++b) {
          const int x = win.column(b);
          absdiff[static_cast<std::size_t>(a) * ec + b] =
              std::abs(L(ii, std::clamp(x, 0, W - 1)) - R(ii, std::clamp(x - d, 0, W - 1)));
        }
      }
      box_sum(absdiff, er, ec, r, tmp, sums);
      for (int i = roi.row0; i < roi.row1; ++i) {
        for (int j = roi.col0; j < roi.col1; ++j) {
          cv(i, j, d) = sums[static_cast<std::size_t>(i - roi.row0) * out_cols + (j - roi.col0)];
        }
      }
    }
  } else {
    Patch p;
    for (int i = roi.row0; i < roi.row1; ++i) {
      for (int j = roi.col0; j < roi.col1; ++j) {
        for (int d = 0; d < D; ++d) {
          gather(L, R, i, j, d, r, p);
          const NccTerms t = ncc_terms(p);
          cv(i, j, d) = 1.0 - t.C / t.D;
        }
      }
    }
  }
  return cv;
}

DisparityMap soft_argmin(const CostVolume& cv, double temperature, std::optional<PixelRect> region) {
  require(temperature > 0.0, "temperature must be positive");
  const PixelRect roi = resolve(region, cv.height(), cv.width());
  DisparityMap disp(cv.height(), cv.width(), 0.0);
  std::vector<double> w(static_cast<std::size_t>(cv.candidates()));
  for (int i = roi.row0; i < roi.row1; ++i) {
    for (int j = roi.col0; j < roi.col1; ++j) {
      const auto c = cv.at(i, j);
      const double lo = *std::min_element(c.begin(), c.end());
      double z = 0.0, acc = 0.0;
      for (int d = 0; d < cv.candidates(); ++d) {
        w[d] = std::exp(-(c[d] - lo) / temperature);
        z += w[d];
        acc += d * w[d];
      }
      disp(i, j) = acc / z;
    }
  }
  return disp;
}

CostVolume soft_argmin_backward(const CostVolume& cv, double temperature,
                                const DisparityMap& disp_grad, std::optional<PixelRect> region) {
  require(disp_grad.height() == cv.height() && disp_grad.width() == cv.width(),
          "disparity gradient size differs from cost volume");
  const PixelRect roi = resolve(region, cv.height(), cv.width());
  CostVolume grad(cv.height(), cv.width(), cv.candidates());
  std::vector<double> p(static_cast<std::size_t>(cv.candidates()));
  for (int i = roi.row0; i < roi.row1; ++i) {
    for (int j = roi.col0; j < roi.col1; ++j) {
      const double g = disp_grad(i, j);
      if (g == 0.0) continue;
      const auto c = cv.at(i, j);
      const double lo = *std::min_element(c.begin(), c.end());
      double z = 0.0, disp = 0.0;
      for (int d = 0; d < cv.candidates(); ++d) {
        p[d] = std::exp(-(c[d] - lo) / temperature);
        z += p[d];
      }
      for (int d = 0; d < cv.candidates(); ++d) {
        p[d] /= z;
        disp += d * p[d];
      }
      for (int d = 0; d < cv.candidates(); ++d) grad(i, j, d) = -g * p[d] * (d - disp) / temperature;
    }
  }
  return grad;
}

DisparityMap predict_disparity(const Image& left, const Image& right, const MatcherConfig& cfg,
                               std::optional<PixelRect> region) {
  return soft_argmin(cost_volume(left, right, cfg, region), cfg.temperature, region);
}

DisparityMap wta_baseline(const Image& left, const Image& right, const MatcherConfig& cfg,
                          std::optional<PixelRect> region) {
  const CostVolume cv = cost_volume(left, right, cfg, region);
  const PixelRect roi = resolve(region, cv.height(), cv.width());
  DisparityMap disp(cv.height(), cv.width(), 0.0);
  for (int i = roi.row0; i < roi.row1; ++i) {
    for (int j = roi.col0; j < roi.col1; ++j) {
      const auto c = cv.at(i, j);
      disp(i, j) = static_cast<double>(std::min_element(c.begin(), c.end()) - c.begin());
    }
  }
  return disp;
}

StereoGradient backward_disparity(const Image& left, const Image& right, const MatcherConfig& cfg,
                                  const DisparityMap& disp_grad, std::optional<PixelRect> region) {
  check_pair(left, right, cfg);
  const int H = left.height(), W = left.width();
  require(disp_grad.height() == H && disp_grad.width() == W,
          "disparity gradient size differs from the stereo pair");
  const int D = cfg.d_max + 1;
  const int r = cfg.patch_radius;
  const PixelRect roi = resolve(region, H, W);
  const ScalarMap L = to_luma(left);
  const ScalarMap R = to_luma(right);
  ScalarMap gL(H, W, 0.0), gR(H, W, 0.0);

  if (roi.row1 > roi.row0 && roi.col1 > roi.col0) {
    const CostVolume cv = cost_volume(left, right, cfg, roi);
    const CostVolume gc = soft_argmin_backward(cv, cfg.temperature, disp_grad, roi);
    if (cfg.cost == MatchCost::SAD) {
      const Window win{r, roi};
      const int er = win.rows(), ec = win.cols();
      const int rows = roi.row1 - roi.row0, cols = roi.col1 - roi.col0;
      std::vector<double> g(static_cast<std::size_t>(rows) * cols), tmp, spread;
      for (int d = 0; d < D; ++d) {
        bool any = false;
        for (int i = 0; i < rows; ++i) {
          for (int j = 0; j < cols; ++j) {
            const double v = gc(roi.row0 + i, roi.col0 + j, d);
            g[static_cast<std::size_t>(i) * cols + j] = v;
            any = any || v != 0.0;
          }
        }
        if (!any) continue;
        box_spread(g, er, ec, r, tmp, spread);
        for (int a = 0; a < er; ++a) {
          const int ii = win.image_row(a, H);
          for (int b = 0; b < ec; ++b) {
            const double v = spread[static_cast<std::size_t>(a) * ec + b];
            if (v == 0.0) continue;
            const int x = win.column(b);
            const int xl = std::clamp(x, 0, W - 1);
            const int xr = std::clamp(x - d, 0, W - 1);
            const double s = sign(L(ii, xl) - R(ii, xr));
            gL(ii, xl) += v * s;
            gR(ii, xr) -= v * s;
          }
        }
      }
    } else {
      Patch p;
      for (int i = roi.row0; i < roi.row1; ++i) {
        for (int j = roi.col0; j < roi.col1; ++j) {
          for (int d = 0; d < D; ++d) {
            const double g = gc(i, j, d);
            if (g == 0.0) continue;
            gather(L, R, i, j, d, r, p);
            const NccTerms t = ncc_terms(p);
            for (std::size_t k = 0; k < p.a.size(); ++k) {
              const double da = p.a[k] - t.mean_a;
              const double db = p.b[k] - t.mean_b;
              // cost = 1 - C/D
              const double dncc_da = db / t.D - t.C * da / (t.D * (t.A + kZnccEps));
              const double dncc_db = da / t.D - t.C * db / (t.D * (t.B + kZnccEps));
              gL(p.ai[k], p.aj[k]) -= g * dncc_da;
              gR(p.ai[k], p.bj[k]) -= g * dncc_db;
            }
          }
        }
      }
    }
  }
  return StereoGradient{luma_backward(gL), luma_backward(gR)};
}

std::vector<signed char> sad_sign_pattern(const Image& left, const Image& right,
                                          const MatcherConfig& cfg, std::optional<PixelRect> region) {
  check_pair(left, right, cfg);
  const int H = left.height(), W = left.width();
  const ScalarMap L = to_luma(left);
  const ScalarMap R = to_luma(right);
  const PixelRect roi = resolve(region, H, W);
  const Window win{cfg.patch_radius, roi};
  std::vector<signed char> out;
  if (roi.row1 == roi.row0 || roi.col1 == roi.col0) return out;
  out.reserve(static_cast<std::size_t>(win.rows()) * win.cols() * (cfg.d_max + 1));
  for (int d = 0; d <= cfg.d_max; ++d) {
    for (int a = 0; a < win.rows(); ++a) {
      const int ii = win.image_row(a, H);
      for (int b = 0; b < win.cols(); ++b) {
        const int x = win.column(b);
        out.push_back(static_cast<signed char>(
            sign(L(ii, std::clamp(x, 0, W - 1)) - R(ii, std::clamp(x - d, 0, W - 1)))));
      }
    }
  }
  return out;
}

}  // namespace stereocamo
