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

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stereocamo/errors.hpp"

namespace stereocamo {

// Dense row-major grid with a top-left origin.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{}) : height_(height), width_(width) {
    require(height >= 0 && width >= 0, "grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(height) * width, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;
using ScalarMap = Grid<double>;
using DisparityMap = Grid<double>;

std::size_t count(const Mask& mask);

// Interleaved multi-channel image with real-valued samples, nominally in [0,1].
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels = 3, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double operator()(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  template <typename T>
  bool same_extent(const Grid<T>& grid) const {
    return height_ == grid.height() && width_ == grid.width();
  }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }
  void clamp01();

  bool operator==(const Image& other) const = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Fixed luma weights used everywhere an RGB image is reduced to intensity.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

ScalarMap to_luma(const Image& rgb);

// Adjoint of to_luma: spreads a per-pixel luma gradient onto RGB channels.
Image luma_backward(const ScalarMap& grad_luma);

}  // namespace stereocamo
