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
#ifndef REBLUR_OCCLUSION_HPP_
#define REBLUR_OCCLUSION_HPP_

#include "reblur/core.hpp"

namespace reblur {

// Accumulated splat mass a target pixel needs to count as reached.
inline constexpr double kReachabilityThreshold = 0.25;

// Splat density of unit mass pushed along the flow with bilinear weights.
Mask splat_density(const FlowField& flow_from_other);

// 1 where the splat density reaches kReachabilityThreshold, else 0.
Mask reachability_mask(const FlowField& flow_from_other);

// Product of reachability_mask(i * step_flow) for i = -N..N.
Mask self_consistency_mask(const FlowField& step_flow, int half_window);

}  // namespace reblur

#endif  // REBLUR_OCCLUSION_HPP_
