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
#ifndef REBLUR_LOSSES_HPP_
#define REBLUR_LOSSES_HPP_

#include "reblur/core.hpp"
#include "reblur/reblur.hpp"

namespace reblur {

struct LossConfig {
  double lambda = 2.0;  // weight of the forward/backward term

  void validate() const;
};

struct MaskedCounts {
  double self_a = 0.0;
  double self_b = 0.0;
  double fwbw_a = 0.0;
  double fwbw_b = 0.0;
};

struct LossReport {
  double l_self = 0.0;
  double l_fwbw = 0.0;
  double total = 0.0;  // l_self + lambda * l_fwbw
  MaskedCounts masked_pixel_counts;
};

// The optimization variables: two latent sharp frames and the bidirectional
// inter-frame flow between them.
struct LatentPair {
  Image sharp_a;
  Image sharp_b;
  FlowField flow_ab;
  FlowField flow_ba;
};

struct LatentGradients {
  Image grad_a;
  Image grad_b;
  FlowField grad_flow_ab;
  FlowField grad_flow_ba;
};

// Masks gating each of the four l1 terms. They depend on the flows only and
// are treated as constants when differentiating.
struct LossMasks {
  Mask self_a;  // reblur coverage product x virtual-frame reachability
  Mask self_b;
  Mask fwbw_a;  // reachability from b x sampling validity
  Mask fwbw_b;
};

// sum(mask * |a - b|) / (sum(mask) * channels); 0 when the mask is empty.
double masked_l1(const Image& a, const Image& b, const Mask& mask);
// d masked_l1 / d a. The subgradient at a zero residual is 0.
Image masked_l1_grad(const Image& a, const Image& b, const Mask& mask);

// Uses the masks carried by the reblur results.
double loss_self(const ReblurResult& reblur_a, const Image& blur_a,
                 const ReblurResult& reblur_b, const Image& blur_b);

double loss_fwbw(const Image& sharp_a, const Image& sharp_b,
                 const FlowField& flow_ab, const FlowField& flow_ba,
                 const Mask& occlusion_a, const Mask& occlusion_b);

LossMasks compute_loss_masks(const LatentPair& latent, const ReblurConfig& reblur);

LossReport total_loss(const Image& blur_a, const Image& blur_b,
                      const LatentPair& latent, const ReblurConfig& reblur,
                      const LossConfig& loss);

struct LossEvaluation {
  LossReport report;
  LatentGradients gradients;
};

// Gradients of LossReport::total with respect to the latent variables.
LossEvaluation total_loss_vjp(const Image& blur_a, const Image& blur_b,
                              const LatentPair& latent, const ReblurConfig& reblur,
                              const LossConfig& loss);

}  // namespace reblur

#endif  // REBLUR_LOSSES_HPP_
