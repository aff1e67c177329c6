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
#include "reblur/occlusion.hpp"

#include <cmath>
#include <string>

namespace reblur {

Mask splat_density(const FlowField& flow_from_other) {
  const int width = flow_from_other.width();
  const int height = flow_from_other.height();
  Mask density(width, height, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 d = flow_from_other.vec(x, y);
      const double tx = x + d.x;
      const double ty = y + d.y;
      if (!std::isfinite(tx) || !std::isfinite(ty)) continue;
      const double fx0 = std::floor(tx);
      const double fy0 = std::floor(ty);
      // Entirely off-grid targets deposit nothing.
      if (fx0 < -1.0 || fy0 < -1.0 || fx0 > width - 1 || fy0 > height - 1) continue;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = tx - fx0;
      const double ay = ty - fy0;
      const double weights[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay),
                                 (1.0 - ax) * ay, ax * ay};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int k = 0; k < 4; ++k) {
        if (weights[k] > 0.0 && density.contains(xs[k], ys[k])) {
          density.at(xs[k], ys[k]) += weights[k];
        }
      }
    }
  }
  return density;
}

Mask reachability_mask(const FlowField& flow_from_other) {
  Mask mask = splat_density(flow_from_other);
  for (double& v : mask.data()) v = v >= kReachabilityThreshold ? 1.0 : 0.0;
  return mask;
}

Mask self_consistency_mask(const FlowField& step_flow, int half_window) {
  if (half_window < 0) {
    throw InvalidArgumentError("half window N must be >= 0, got " +
                               std::to_string(half_window));
  }
  Mask mask(step_flow.width(), step_flow.height(), 1.0);
  for (int i = -half_window; i <= half_window; ++i) {
    if (i == 0) continue;  // identity frame reaches every pixel
    mask = mask * reachability_mask(step_flow.scaled(static_cast<double>(i)));
  }
  return mask;
}

}  // namespace reblur
