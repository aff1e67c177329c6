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
#ifndef REBLUR_REBLUR_HPP_
#define REBLUR_REBLUR_HPP_

#include <span>
#include <vector>

#include "reblur/core.hpp"
#include "reblur/mesh_warp.hpp"

namespace reblur {

// Linear-motion blur synthesis: a blurry frame is the mean of 2N+1 virtual
// frames, the i-th being the sharp central frame forward-warped by i * u.

struct ReblurResult {
  Image blurred;
  // Product of the coverage masks of all virtual frames.
  Mask mask;
  // Per-virtual-frame coverage, i = -N..N, filled only on request.
  std::vector<Mask> virtual_coverages;
  // Per-virtual-frame warps, i = -N..N, filled only on request; lets the VJP
  // skip re-rasterizing.
  std::vector<ForwardWarpResult> frames;
};

struct ReblurGradients {
  Image grad_sharp;
  FlowField grad_step_flow;
};

// Per-virtual-step flow from the inter-frame flow:
//   u = tau / (2 N dt) * u_ab.
// N == 0 yields zero flow.
FlowField scale_flow_to_exposure(const FlowField& inter_frame_flow,
                                 const ReblurConfig& config);
double exposure_flow_scale(const ReblurConfig& config);

ReblurResult reblur(const Image& sharp, const FlowField& step_flow,
                    int half_window, bool keep_virtual_coverages = false,
                    bool keep_frames = false);

ReblurGradients reblur_vjp(const Image& sharp, const FlowField& step_flow,
                           int half_window, const Image& upstream);
// Same, reusing forward.frames (from reblur(..., keep_frames = true)).
ReblurGradients reblur_vjp(const Image& sharp, const FlowField& step_flow,
                           int half_window, const ReblurResult& forward,
                           const Image& upstream);

// Convolution blur model: B_i is the box average of I_{i-h..i+h}. Used as a
// contrast to the warp model. Positions whose window leaves the signal
// average only the samples that exist.
Image convolution_reblur_1d(const Image& signal, int halfwidth);
// Spatially varying variant: each output position gathers over its own
// half-width.
Image convolution_reblur_1d(const Image& signal, std::span<const int> halfwidths);

}  // namespace reblur

#endif  // REBLUR_REBLUR_HPP_
