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
#ifndef REBLUR_BACKWARD_WARP_HPP_
#define REBLUR_BACKWARD_WARP_HPP_

#include "reblur/core.hpp"

namespace reblur {

struct BackwardWarpResult {
  Image warped;
  Mask valid;
};

struct BackwardWarpGradients {
  Image grad_src;
  FlowField grad_flow;
};

// Bilinear sampling cell for a continuous coordinate: the integer corner and
// the fractional offset inside [corner, corner + 1]. Right-continuous at
// integers, except on the last row/column where the cell to the left is used.
struct SampleCell {
  int x0 = 0;
  int y0 = 0;
  double fx = 0.0;
  double fy = 0.0;
  bool valid = false;
};

SampleCell sample_cell(Vec2 position, int width, int height);

// warped(x) = src(x + flow(x)) sampled bilinearly. Samples whose 2x2
// neighborhood leaves the image are invalid and produce 0.
BackwardWarpResult backward_warp(const Image& src, const FlowField& flow);

BackwardWarpGradients backward_warp_vjp(const Image& src, const FlowField& flow,
                                        const Image& upstream);

}  // namespace reblur

#endif  // REBLUR_BACKWARD_WARP_HPP_
