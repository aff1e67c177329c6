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
#include "reblur/mesh_warp.hpp"

#include <algorithm>
#include <cmath>

#include "reblur/parallel.hpp"

namespace reblur {

namespace {

// Warped geometry of one triangle plus its screen-space bounding box, where
// the box limits are inclusive pixel indices clamped to the image.
struct WarpedTriangle {
  std::array<Vec2, 3> positions;
  double magnitude = 0.0;
  int left = 0, right = -1, top = 0, bottom = -1;
  bool drawable = false;
};

std::vector<WarpedTriangle> warp_triangles(const TriangleLattice& lattice,
                                           const FlowField& flow) {
  std::vector<WarpedTriangle> out(lattice.triangles.size());
  const int width = lattice.width;
  const double max_x = lattice.width - 1;
  const double max_y = lattice.height - 1;
  for (std::size_t t = 0; t < lattice.triangles.size(); ++t) {
    const auto& tri = lattice.triangles[t];
    WarpedTriangle& wt = out[t];
    double magnitude = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int v = tri[k];
      const Vec2 d = flow.vec(v % width, v / width);
      wt.positions[k] = lattice.vertices[v] + d;
      magnitude += std::sqrt(d.x * d.x + d.y * d.y);
    }
    wt.magnitude = magnitude / 3.0;
    const auto& p = wt.positions;
    if (std::abs(signed_area(p[0], p[1], p[2])) < kDegenerateArea) continue;
    const double lo_x = std::min({p[0].x, p[1].x, p[2].x});
    const double hi_x = std::max({p[0].x, p[1].x, p[2].x});
    const double lo_y = std::min({p[0].y, p[1].y, p[2].y});
    const double hi_y = std::max({p[0].y, p[1].y, p[2].y});
    // Slack matches the inclusive barycentric tolerance at the edges.
    constexpr double kSlack = 1e-7;
    if (hi_x < -kSlack || hi_y < -kSlack || lo_x > max_x + kSlack ||
        lo_y > max_y + kSlack) {
      continue;
    }
    wt.left = static_cast<int>(std::max(0.0, std::ceil(lo_x - kSlack)));
    wt.right = static_cast<int>(std::min(max_x, std::floor(hi_x + kSlack)));
    wt.top = static_cast<int>(std::max(0.0, std::ceil(lo_y - kSlack)));
    wt.bottom = static_cast<int>(std::min(max_y, std::floor(hi_y + kSlack)));
    wt.drawable = wt.left <= wt.right && wt.top <= wt.bottom;
  }
  return out;
}

// Strict total order on candidate fragments: larger motion first, then the
// lower triangle index.
bool wins_over(double magnitude, int triangle, const Fragment& current) {
  if (!current.covered()) return true;
  if (magnitude != current.motion_magnitude) {
    return magnitude > current.motion_magnitude;
  }
  return triangle < current.triangle_id;
}

void check_inputs(const Image& src, const FlowField& flow,
                  const TriangleLattice& lattice) {
  require_same_grid(src, flow, "forward_warp");
  if (lattice.width != src.width() || lattice.height != src.height()) {
    throw ShapeError("forward_warp: lattice does not match the image grid");
  }
}

}  // namespace

double motion_magnitude(const FlowField& flow, int triangle,
                        const TriangleLattice& lattice) {
  const auto& tri = lattice.triangles.at(static_cast<std::size_t>(triangle));
  double total = 0.0;
  for (int v : tri) {
    const Vec2 d = flow.vec(v % lattice.width, v / lattice.width);
    total += std::sqrt(d.x * d.x + d.y * d.y);
  }
  return total / 3.0;
}

ForwardWarpResult forward_warp(const Image& src, const FlowField& flow) {
  require_same_grid(src, flow, "forward_warp");
  return forward_warp(build_lattice(src.width(), src.height()), src, flow);
}

ForwardWarpResult forward_warp(const TriangleLattice& lattice, const Image& src,
                               const FlowField& flow) {
  check_inputs(src, flow, lattice);
  const int width = src.width();
  const int height = src.height();
  const int channels = src.channels();

  const std::vector<WarpedTriangle> warped = warp_triangles(lattice, flow);

  ForwardWarpResult result{Image(width, height, channels, 0.0),
                           Mask(width, height, 0.0),
                           std::vector<Fragment>(src.pixel_count())};

  parallel_for_rows(height, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < width; ++x) {
        Fragment& f = result.fragments[static_cast<std::size_t>(y) * width + x];
        f.x = x;
        f.y = y;
      }
    }
    for (std::size_t t = 0; t < warped.size(); ++t) {
      const WarpedTriangle& wt = warped[t];
      if (!wt.drawable || wt.bottom < row_begin || wt.top >= row_end) continue;
      const int y0 = std::max(wt.top, row_begin);
      const int y1 = std::min(wt.bottom, row_end - 1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = wt.left; x <= wt.right; ++x) {
          const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
          auto weights = point_in_triangle(p, wt.positions[0], wt.positions[1],
                                           wt.positions[2]);
          if (!weights) continue;
          Fragment& f = result.fragments[static_cast<std::size_t>(y) * width + x];
          if (!wins_over(wt.magnitude, static_cast<int>(t), f)) continue;
          f.triangle_id = static_cast<int>(t);
          f.barycentric = *weights;
          f.motion_magnitude = wt.magnitude;
        }
      }
    }
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const Fragment& f =
            result.fragments[static_cast<std::size_t>(y) * width + x];
        if (!f.covered()) continue;
        const auto& tri = lattice.triangles[static_cast<std::size_t>(f.triangle_id)];
        result.coverage.at(x, y) = 1.0;
        for (int c = 0; c < channels; ++c) {
          double value = 0.0;
          for (int k = 0; k < 3; ++k) {
            value += f.barycentric[k] *
                     src.data()[static_cast<std::size_t>(tri[k]) * channels + c];
          }
          result.image.at(x, y, c) = value;
        }
      }
    }
  });
  return result;
}

ForwardWarpGradients forward_warp_vjp(const Image& src, const FlowField& flow,
                                      const Image& upstream) {
  require_same_grid(src, flow, "forward_warp_vjp");
  const TriangleLattice lattice = build_lattice(src.width(), src.height());
  const ForwardWarpResult forward = forward_warp(lattice, src, flow);
  return forward_warp_vjp(lattice, src, flow, forward, upstream);
}

ForwardWarpGradients forward_warp_vjp(const TriangleLattice& lattice,
                                      const Image& src, const FlowField& flow,
                                      const ForwardWarpResult& forward,
                                      const Image& upstream) {
  check_inputs(src, flow, lattice);
  require_same_shape(src, upstream, "forward_warp_vjp upstream");
  if (forward.fragments.size() != src.pixel_count()) {
    throw ShapeError("forward_warp_vjp: fragment buffer does not match the image");
  }
  const int width = src.width();
  const int channels = src.channels();
  ForwardWarpGradients grads{Image(width, src.height(), channels, 0.0),
                             FlowField(width, src.height())};
  auto src_px = [&](int vertex, int c) {
    return src.data()[static_cast<std::size_t>(vertex) * channels + c];
  };

  // Scatter into shared vertices; sequential raster order keeps the sums
  // bit-reproducible.
  for (const Fragment& f : forward.fragments) {
    if (!f.covered()) continue;
    const auto& tri = lattice.triangles[static_cast<std::size_t>(f.triangle_id)];
    const std::array<double, 3>& w = f.barycentric;

    double e1 = 0.0;  // <upstream, s1 - s0>
    double e2 = 0.0;  // <upstream, s2 - s0>
    for (int c = 0; c < channels; ++c) {
      const double g = upstream.at(f.x, f.y, c);
      if (g == 0.0) continue;
      for (int k = 0; k < 3; ++k) {
        grads.grad_src.data()[static_cast<std::size_t>(tri[k]) * channels + c] +=
            w[k] * g;
      }
      const double s0 = src_px(tri[0], c);
      e1 += g * (src_px(tri[1], c) - s0);
      e2 += g * (src_px(tri[2], c) - s0);
    }
    if (e1 == 0.0 && e2 == 0.0) continue;

    // value = s0 + w1 (s1 - s0) + w2 (s2 - s0) with
    //   w1 = cross(p - a, c - a) / d,  w2 = cross(b - a, p - a) / d,
    //   d = cross(b - a, c - a),
    // and dw/dP = (dn/dP - w dd/dP) / d for each numerator n.
    std::array<Vec2, 3> pos;
    for (int k = 0; k < 3; ++k) {
      pos[k] = lattice.vertices[tri[k]] +
               flow.vec(tri[k] % width, tri[k] / width);
    }
    const Vec2 p{static_cast<double>(f.x), static_cast<double>(f.y)};
    const Vec2 a = pos[0], b = pos[1], c = pos[2];
    const double d = cross(b - a, c - a);

    const Vec2 u1 = p - a, v1 = c - a;  // n1 = cross(u1, v1)
    const Vec2 u2 = b - a, v2 = p - a;  // n2 = cross(u2, v2)
    const Vec2 u3 = b - a, v3 = c - a;  // d  = cross(u3, v3)

    const std::array<Vec2, 3> dn1{Vec2{u1.y - v1.y, v1.x - u1.x}, Vec2{0.0, 0.0},
                                  Vec2{-u1.y, u1.x}};
    const std::array<Vec2, 3> dn2{Vec2{u2.y - v2.y, v2.x - u2.x},
                                  Vec2{v2.y, -v2.x}, Vec2{0.0, 0.0}};
    const std::array<Vec2, 3> dd{Vec2{u3.y - v3.y, v3.x - u3.x},
                                 Vec2{v3.y, -v3.x}, Vec2{-u3.y, u3.x}};
    for (int k = 0; k < 3; ++k) {
      const Vec2 dw1 = (1.0 / d) * (dn1[k] - w[1] * dd[k]);
      const Vec2 dw2 = (1.0 / d) * (dn2[k] - w[2] * dd[k]);
      const std::size_t gi = static_cast<std::size_t>(tri[k]) * 2;
      grads.grad_flow.data()[gi] += e1 * dw1.x + e2 * dw2.x;
      grads.grad_flow.data()[gi + 1] += e1 * dw1.y + e2 * dw2.y;
    }
  }
  return grads;
}

}  // namespace reblur
