/* Copyright 2026 The Reblur Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "reblur/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace reblur {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw InvalidDimensionError("raster dimensions must be positive, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (channels <= 0) {
    throw InvalidDimensionError("channel count must be positive");
  }
}

std::string shape_string(const Raster& r) {
  return std::to_string(r.width()) + "x" + std::to_string(r.height()) + "x" +
         std::to_string(r.channels());
}

}  // namespace

Raster::Raster(int width, int height, int channels, double fill_value)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill_value);
}

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw ShapeError("raster data length " + std::to_string(data_.size()) +
                     " does not match " + shape_string(*this));
  }
}

bool Raster::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Raster::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Image::Image(int width, int height, int channels, double fill_value)
    : Raster(width, height, channels, fill_value) {
  if (channels != 1 && channels != 3) {
    throw InvalidDimensionError("images have 1 or 3 channels, got " +
                                std::to_string(channels));
  }
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : Raster(width, height, channels, std::move(data)) {
  if (channels != 1 && channels != 3) {
    throw InvalidDimensionError("images have 1 or 3 channels, got " +
                                std::to_string(channels));
  }
}

FlowField::FlowField(int width, int height, Vec2 fill_value)
    : Raster(width, height, 2, 0.0) {
  for (std::size_t i = 0; i < data_.size(); i += 2) {
    data_[i] = fill_value.x;
    data_[i + 1] = fill_value.y;
  }
}

FlowField::FlowField(int width, int height, std::vector<double> data)
    : Raster(width, height, 2, std::move(data)) {}

FlowField FlowField::scaled(double factor) const {
  FlowField out = *this;
  for (double& v : out.data_) v *= factor;
  return out;
}

Mask::Mask(int width, int height, double fill_value)
    : Raster(width, height, 1, fill_value) {}

Mask::Mask(int width, int height, std::vector<double> data)
    : Raster(width, height, 1, std::move(data)) {}

double Mask::sum() const {
  double total = 0.0;
  for (double v : data_) total += v;
  return total;
}

Mask Mask::operator*(const Mask& other) const {
  require_same_grid(*this, other, "mask product");
  Mask out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] *= other.data_[i];
  return out;
}

void ReblurConfig::validate() const {
  if (half_window < 0) {
    throw InvalidArgumentError("half window N must be >= 0");
  }
  if (!(exposure_tau > 0.0) || !(frame_interval_dt > 0.0)) {
    throw InvalidArgumentError("exposure and frame interval must be positive");
  }
  if (exposure_tau > frame_interval_dt) {
    throw InvalidArgumentError(
        "exposure time cannot exceed the inter-frame interval");
  }
}

TriangleLattice build_lattice(int width, int height) {
  if (width < 2 || height < 2) {
    throw InvalidDimensionError("lattice needs at least 2x2 pixels, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  TriangleLattice lattice;
  lattice.width = width;
  lattice.height = height;
  lattice.vertices.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      lattice.vertices.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  lattice.triangles.reserve(2 * static_cast<std::size_t>(width - 1) * (height - 1));
  for (int y = 0; y + 1 < height; ++y) {
    for (int x = 0; x + 1 < width; ++x) {
      const int v00 = y * width + x;
      const int v10 = v00 + 1;
      const int v01 = v00 + width;
      const int v11 = v01 + 1;
      lattice.triangles.push_back({v00, v10, v01});
      lattice.triangles.push_back({v10, v11, v01});
    }
  }
  return lattice;
}

double signed_area(Vec2 v0, Vec2 v1, Vec2 v2) {
  return 0.5 * cross(v1 - v0, v2 - v0);
}

std::optional<std::array<double, 3>> point_in_triangle(Vec2 p, Vec2 v0,
                                                       Vec2 v1, Vec2 v2) {
  const double twice_area = cross(v1 - v0, v2 - v0);
  if (std::abs(0.5 * twice_area) < kDegenerateArea) return std::nullopt;
  const double w1 = cross(p - v0, v2 - v0) / twice_area;
  const double w2 = cross(v1 - v0, p - v0) / twice_area;
  const double w0 = 1.0 - w1 - w2;
  if (w0 < -kBarycentricTolerance || w1 < -kBarycentricTolerance ||
      w2 < -kBarycentricTolerance) {
    return std::nullopt;
  }
  return std::array<double, 3>{w0, w1, w2};
}

std::optional<int> owning_triangle(const TriangleLattice& lattice, Vec2 p) {
  for (std::size_t t = 0; t < lattice.triangles.size(); ++t) {
    const auto& tri = lattice.triangles[t];
    if (point_in_triangle(p, lattice.vertices[tri[0]], lattice.vertices[tri[1]],
                          lattice.vertices[tri[2]])) {
      return static_cast<int>(t);
    }
  }
  return std::nullopt;
}

void require_same_grid(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_grid(b)) {
    throw ShapeError(std::string(what) + ": grid mismatch " + shape_string(a) +
                     " vs " + shape_string(b));
  }
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a) +
                     " vs " + shape_string(b));
  }
}

}  // namespace reblur
