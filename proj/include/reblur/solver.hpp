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
#ifndef REBLUR_SOLVER_HPP_
#define REBLUR_SOLVER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reblur/core.hpp"
#include "reblur/losses.hpp"

namespace reblur {

// Variational deblurring of a pair of consecutive blurry frames: gradient
// descent on the self-consistency + lambda * forward/backward objective over
// two latent sharp frames and the bidirectional flow, coarse to fine.
//
// Step sizes are per-pixel: the image update is
//   -step_size_image * (W * H * C) * dL/dI
// and the flow update -step_size_flow * (W * H) * dL/du, which undoes the
// mask-sum normalization of the losses and keeps them resolution independent.
//
// Two fixed linear preconditioners shape the descent direction. Image
// gradients are averaged with the other frame's gradient pulled through the
// current flow, so updates stay consistent with the forward/backward term
// instead of stalling on its l1 kink. Flow gradients are box filtered, which
// carries the signal from textured pixels into flat ones.
struct SolverConfig {
  int iterations = 250;  // per pyramid level
  double step_size_image = 0.02;
  double step_size_flow = 0.25;
  double lambda = 2.0;
  int half_window = 8;
  // Exposure time over frame interval, tau / dt; sets the flow scaling.
  double exposure_ratio = 1.0;
  double tv_weight_image = 0.0;
  double tv_weight_flow = 0.01;
  int pyramid_levels = 3;
  std::uint64_t seed = 0;
  bool update_images = true;
  bool update_flows = true;
  // Images are updated only on this many of the finest pyramid levels; the
  // coarser ones refine the flow alone.
  int image_levels = 1;
  bool couple_images = true;
  int flow_smoothing_radius = 4;  // 0 disables flow gradient smoothing
  int flow_smoothing_passes = 2;

  void validate() const;
  ReblurConfig reblur_config() const;
  LossConfig loss_config() const { return LossConfig{lambda}; }
};

struct SolverState {
  Image blur_a;
  Image blur_b;
  LatentPair latent;
  // One entry per accepted or rejected iteration at the current level,
  // starting with the level's initial state. Non-increasing in `total`.
  std::vector<LossReport> loss_history;
  // total + regularizers, aligned with loss_history.
  std::vector<double> objective_history;
  // Histories of the coarser pyramid levels, coarsest first.
  std::vector<std::vector<LossReport>> level_histories;
  // Multiplier on the configured step sizes carried between iterations.
  double step_scale = 1.0;
  int rejected_steps = 0;
  std::vector<std::string> warnings;
};

// I_a := blur_a, I_b := blur_b, both flows zero.
SolverState initialize(const Image& blur_a, const Image& blur_b);

// One safeguarded gradient step: the step is halved up to 10 times until
// neither the total loss nor the regularized objective increases; if no trial
// succeeds the state is kept. Appends to the loss history.
// Throws NumericError on non-finite gradients.
SolverState step(const SolverState& state, const SolverConfig& config);

using ProgressFn = std::function<void(int level, int iteration, const LossReport&)>;

SolverState solve(const Image& blur_a, const Image& blur_b,
                  const SolverConfig& config, const ProgressFn& progress = {});

// Flow smoothness (and optional image smoothness) penalty added to the
// descended objective.
double regularizer(const LatentPair& latent, const SolverConfig& config);

// 2x2 box downsampling (odd trailing rows/columns are dropped).
Image downsample(const Image& image);
// Bilinear upsampling to the given grid, pixel centers aligned.
Image upsample(const Image& image, int width, int height);
// Upsamples and multiplies the displacements by the resolution ratio.
FlowField upsample_flow(const FlowField& flow, int width, int height);

}  // namespace reblur

#endif  // REBLUR_SOLVER_HPP_
