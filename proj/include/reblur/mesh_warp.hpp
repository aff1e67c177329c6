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
#ifndef REBLUR_MESH_WARP_HPP_
#define REBLUR_MESH_WARP_HPP_

#include <vector>

#include "reblur/core.hpp"

namespace reblur {

// Differentiable forward warping through a flow-displaced triangle lattice.
//
// Every lattice vertex (x, y) moves to (x, y) + flow(x, y). Each target pixel
// center is shaded by the covering warped triangle with the largest mean
// vertex displacement (ties: lower triangle index), interpolating the three
// source intensities with barycentric weights. Pixels no triangle reaches get
// intensity 0 and coverage 0.

struct ForwardWarpResult {
  Image image;
  Mask coverage;
  // One record per target pixel, row-major; triangle_id < 0 where uncovered.
  std::vector<Fragment> fragments;
};

struct ForwardWarpGradients {
  Image grad_src;
  FlowField grad_flow;
};

ForwardWarpResult forward_warp(const Image& src, const FlowField& flow);
ForwardWarpResult forward_warp(const TriangleLattice& lattice, const Image& src,
                               const FlowField& flow);

// Vector-Jacobian product of forward_warp(src, flow).image. Fragment
// assignments are held fixed, so this is the gradient of the piecewise
// smooth map on the piece containing (src, flow).
ForwardWarpGradients forward_warp_vjp(const Image& src, const FlowField& flow,
                                      const Image& upstream);
// Replays a previous forward pass instead of rasterizing again.
ForwardWarpGradients forward_warp_vjp(const TriangleLattice& lattice,
                                      const Image& src, const FlowField& flow,
                                      const ForwardWarpResult& forward,
                                      const Image& upstream);

// Mean Euclidean displacement of the triangle's three vertices.
double motion_magnitude(const FlowField& flow, int triangle,
                        const TriangleLattice& lattice);

}  // namespace reblur

#endif  // REBLUR_MESH_WARP_HPP_
