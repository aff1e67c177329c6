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
#include "reblur/backward_warp.hpp"

#include <algorithm>
#include <cmath>

#include "reblur/parallel.hpp"

namespace reblur {

SampleCell sample_cell(Vec2 position, int width, int height) {
  SampleCell cell;
  const double max_x = width - 1;
  const double max_y = height - 1;
  if (!(position.x >= 0.0 && position.x <= max_x && position.y >= 0.0 &&
        position.y <= max_y)) {
    return cell;
  }
  cell.x0 = std::min(static_cast<int>(std::floor(position.x)), width - 2);
  cell.y0 = std::min(static_cast<int>(std::floor(position.y)), height - 2);
  cell.fx = position.x - cell.x0;
  cell.fy = position.y - cell.y0;
  cell.valid = true;
  return cell;
}

BackwardWarpResult backward_warp(const Image& src, const FlowField& flow) {
  require_same_grid(src, flow, "backward_warp");
  if (src.width() < 2 || src.height() < 2) {
    throw InvalidDimensionError("backward_warp needs at least 2x2 pixels");
  }
  const int width = src.width();
  const int height = src.height();
  const int channels = src.channels();
  BackwardWarpResult out{Image(width, height, channels, 0.0),
                         Mask(width, height, 0.0)};
  parallel_for_rows(height, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < width; ++x) {
        const Vec2 pos = Vec2{static_cast<double>(x), static_cast<double>(y)} +
                         flow.vec(x, y);
        const SampleCell s = sample_cell(pos, width, height);
        if (!s.valid) continue;
        out.valid.at(x, y) = 1.0;
        const double w00 = (1.0 - s.fx) * (1.0 - s.fy);
        const double w10 = s.fx * (1.0 - s.fy);
        const double w01 = (1.0 - s.fx) * s.fy;
        const double w11 = s.fx * s.fy;
        for (int c = 0; c < channels; ++c) {
          out.warped.at(x, y, c) = w00 * src.at(s.x0, s.y0, c) +
                                   w10 * src.at(s.x0 + 1, s.y0, c) +
                                   w01 * src.at(s.x0, s.y0 + 1, c) +
                                   w11 * src.at(s.x0 + 1, s.y0 + 1, c);
        }
      }
    }
  });
  return out;
}

BackwardWarpGradients backward_warp_vjp(const Image& src, const FlowField& flow,
                                        const Image& upstream) {
  require_same_grid(src, flow, "backward_warp_vjp");
  require_same_shape(src, upstream, "backward_warp_vjp upstream");
  if (src.width() < 2 || src.height() < 2) {
    throw InvalidDimensionError("backward_warp needs at least 2x2 pixels");
  }
  const int width = src.width();
  const int height = src.height();
  const int channels = src.channels();
  BackwardWarpGradients grads{Image(width, height, channels, 0.0),
                              FlowField(width, height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 pos = Vec2{static_cast<double>(x), static_cast<double>(y)} +
                       flow.vec(x, y);
      const SampleCell s = sample_cell(pos, width, height);
      if (!s.valid) continue;
      double gx = 0.0;
      double gy = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double g = upstream.at(x, y, c);
        if (g == 0.0) continue;
        const double s00 = src.at(s.x0, s.y0, c);
        const double s10 = src.at(s.x0 + 1, s.y0, c);
        const double s01 = src.at(s.x0, s.y0 + 1, c);
        const double s11 = src.at(s.x0 + 1, s.y0 + 1, c);
        grads.grad_src.at(s.x0, s.y0, c) += (1.0 - s.fx) * (1.0 - s.fy) * g;
        grads.grad_src.at(s.x0 + 1, s.y0, c) += s.fx * (1.0 - s.fy) * g;
        grads.grad_src.at(s.x0, s.y0 + 1, c) += (1.0 - s.fx) * s.fy * g;
        grads.grad_src.at(s.x0 + 1, s.y0 + 1, c) += s.fx * s.fy * g;
        gx += g * ((1.0 - s.fy) * (s10 - s00) + s.fy * (s11 - s01));
        gy += g * ((1.0 - s.fx) * (s01 - s00) + s.fx * (s11 - s10));
      }
      grads.grad_flow.at(x, y, 0) += gx;
      grads.grad_flow.at(x, y, 1) += gy;
    }
  }
  return grads;
}

}  // namespace reblur
