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
#ifndef REBLUR_CORE_HPP_
#define REBLUR_CORE_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace reblur {

// Error hierarchy. Every error raised by the library derives from Error so
// callers can catch broadly and still dispatch on the concrete kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

// z-component of the 2D cross product.
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Dense row-major raster of doubles with a fixed number of interleaved
// channels per pixel. Image, FlowField and Mask are strong types over it.
class Raster {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  bool same_grid(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool all_finite() const;

  void fill(double value);

 protected:
  Raster() = default;
  Raster(int width, int height, int channels, double fill_value);
  Raster(int width, int height, int channels, std::vector<double> data);

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// H x W x C intensities, nominally in [0, 1]. C is 1 or 3.
class Image : public Raster {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill_value = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  bool same_shape(const Image& other) const {
    return same_grid(other) && channels_ == other.channels_;
  }
};

// Per-pixel displacement (dx, dy) in pixels.
class FlowField : public Raster {
 public:
  FlowField() = default;
  FlowField(int width, int height, Vec2 fill_value = {});
  FlowField(int width, int height, std::vector<double> data);

  Vec2 vec(int x, int y) const {
    const std::size_t i = index(x, y);
    return {data_[i], data_[i + 1]};
  }
  void set(int x, int y, Vec2 v) {
    const std::size_t i = index(x, y);
    data_[i] = v.x;
    data_[i + 1] = v.y;
  }

  FlowField scaled(double factor) const;
};

// Per-pixel weights in [0, 1].
class Mask : public Raster {
 public:
  Mask() = default;
  Mask(int width, int height, double fill_value = 1.0);
  Mask(int width, int height, std::vector<double> data);

  double sum() const;
  // Elementwise product; grids must match.
  Mask operator*(const Mask& other) const;
};

struct Fragment {
  int x = 0;
  int y = 0;
  int triangle_id = -1;  // -1 marks an uncovered pixel.
  std::array<double, 3> barycentric{0.0, 0.0, 0.0};
  double motion_magnitude = 0.0;

  bool covered() const { return triangle_id >= 0; }
};

// Regular triangulation of a W x H pixel grid. Vertex y * W + x sits at the
// pixel center (x, y). Cell (x, y) with corners v00=(x,y), v10=(x+1,y),
// v01=(x,y+1), v11=(x+1,y+1) is split along the v01-v10 diagonal into
// triangles 2k = (v00, v10, v01) and 2k+1 = (v10, v11, v01), k = y*(W-1)+x.
struct TriangleLattice {
  int width = 0;
  int height = 0;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;

  std::size_t triangle_count() const { return triangles.size(); }
};

struct ReblurConfig {
  int half_window = 8;          // N; 2N + 1 virtual frames.
  double exposure_tau = 1.0;    // seconds
  double frame_interval_dt = 1.0;  // seconds

  // Throws InvalidArgumentError when the invariants do not hold.
  void validate() const;
};

inline constexpr double kDegenerateArea = 1e-12;
inline constexpr double kBarycentricTolerance = 1e-9;

TriangleLattice build_lattice(int width, int height);

double signed_area(Vec2 v0, Vec2 v1, Vec2 v2);

// Barycentric weights of p with respect to (v0, v1, v2) when p lies inside
// or on the boundary of the triangle. Degenerate triangles cover nothing.
std::optional<std::array<double, 3>> point_in_triangle(Vec2 p, Vec2 v0,
                                                       Vec2 v1, Vec2 v2);

// Lowest-index triangle of the unwarped lattice covering p.
std::optional<int> owning_triangle(const TriangleLattice& lattice, Vec2 p);

// 8-bit sample to normalized intensity.
inline double from_byte(unsigned value) { return static_cast<double>(value) / 255.0; }

void require_same_grid(const Raster& a, const Raster& b, const char* what);
void require_same_shape(const Image& a, const Image& b, const char* what);

}  // namespace reblur

#endif  // REBLUR_CORE_HPP_
