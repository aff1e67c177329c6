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
#include "reblur/reblur.hpp"

#include <algorithm>
#include <string>

namespace reblur {

namespace {

void check_half_window(int half_window) {
  if (half_window < 0) {
    throw InvalidArgumentError("half window N must be >= 0, got " +
                               std::to_string(half_window));
  }
}

}  // namespace

// Pure arithmetic: the exposure-within-interval bound is left to the
// callers that render with the config.
double exposure_flow_scale(const ReblurConfig& config) {
  check_half_window(config.half_window);
  if (!(config.exposure_tau > 0.0) || !(config.frame_interval_dt > 0.0)) {
    throw InvalidArgumentError("exposure and frame interval must be positive");
  }
  if (config.half_window == 0) return 0.0;
  return config.exposure_tau /
         (2.0 * config.half_window * config.frame_interval_dt);
}

FlowField scale_flow_to_exposure(const FlowField& inter_frame_flow,
                                 const ReblurConfig& config) {
  return inter_frame_flow.scaled(exposure_flow_scale(config));
}

ReblurResult reblur(const Image& sharp, const FlowField& step_flow,
                    int half_window, bool keep_virtual_coverages, bool keep_frames) {
  check_half_window(half_window);
  require_same_grid(sharp, step_flow, "reblur");
  const TriangleLattice lattice = build_lattice(sharp.width(), sharp.height());

  ReblurResult result{Image(sharp.width(), sharp.height(), sharp.channels(), 0.0),
                      Mask(sharp.width(), sharp.height(), 1.0),
                      {},
                      {}};
  // Frames are accumulated as offsets from the central frame, so frames
  // identical to it (zero flow) reproduce it exactly.
  ForwardWarpResult center = forward_warp(lattice, sharp, step_flow.scaled(0.0));
  const auto base = center.image.data();
  auto acc = result.blurred.data();
  for (int i = -half_window; i <= half_window; ++i) {
    ForwardWarpResult frame =
        i == 0 ? center : forward_warp(lattice, sharp, step_flow.scaled(static_cast<double>(i)));
    if (i != 0) {
      const auto values = frame.image.data();
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += values[k] - base[k];
    }
    result.mask = result.mask * frame.coverage;
    if (keep_virtual_coverages) result.virtual_coverages.push_back(frame.coverage);
    if (keep_frames) result.frames.push_back(std::move(frame));
  }
  const double count = 2.0 * half_window + 1.0;
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = base[k] + acc[k] / count;
  return result;
}

namespace {

ReblurGradients reblur_vjp_impl(const Image& sharp, const FlowField& step_flow,
                                int half_window, const ReblurResult* forward,
                                const Image& upstream) {
  check_half_window(half_window);
  require_same_grid(sharp, step_flow, "reblur_vjp");
  require_same_shape(sharp, upstream, "reblur_vjp upstream");
  const std::size_t frame_count = static_cast<std::size_t>(2 * half_window + 1);
  if (forward != nullptr && forward->frames.size() != frame_count) {
    throw ShapeError("reblur_vjp: forward result does not hold every virtual frame");
  }
  const TriangleLattice lattice = build_lattice(sharp.width(), sharp.height());

  Image scaled_upstream = upstream;
  const double count = 2.0 * half_window + 1.0;
  for (double& v : scaled_upstream.data()) v /= count;

  ReblurGradients grads{Image(sharp.width(), sharp.height(), sharp.channels(), 0.0),
                        FlowField(sharp.width(), sharp.height())};
  for (int i = -half_window; i <= half_window; ++i) {
    const FlowField flow_i = step_flow.scaled(static_cast<double>(i));
    ForwardWarpResult recomputed;
    if (forward == nullptr) recomputed = forward_warp(lattice, sharp, flow_i);
    const ForwardWarpResult& frame =
        forward != nullptr ? forward->frames[static_cast<std::size_t>(i + half_window)]
                           : recomputed;
    const ForwardWarpGradients g =
        forward_warp_vjp(lattice, sharp, flow_i, frame, scaled_upstream);
    auto gs = grads.grad_sharp.data();
    const auto gsi = g.grad_src.data();
    for (std::size_t k = 0; k < gs.size(); ++k) gs[k] += gsi[k];
    if (i == 0) continue;
    auto gf = grads.grad_step_flow.data();
    const auto gfi = g.grad_flow.data();
    for (std::size_t k = 0; k < gf.size(); ++k) gf[k] += i * gfi[k];
  }
  return grads;
}

}  // namespace

ReblurGradients reblur_vjp(const Image& sharp, const FlowField& step_flow,
                           int half_window, const Image& upstream) {
  return reblur_vjp_impl(sharp, step_flow, half_window, nullptr, upstream);
}

ReblurGradients reblur_vjp(const Image& sharp, const FlowField& step_flow,
                           int half_window, const ReblurResult& forward,
                           const Image& upstream) {
  return reblur_vjp_impl(sharp, step_flow, half_window, &forward, upstream);
}

Image convolution_reblur_1d(const Image& signal, int halfwidth) {
  if (halfwidth < 0) throw InvalidArgumentError("halfwidth must be >= 0");
  if (signal.width() <= 2 * halfwidth) {
    throw InvalidArgumentError("signal must be longer than the kernel");
  }
  std::vector<int> widths(static_cast<std::size_t>(signal.width()), halfwidth);
  return convolution_reblur_1d(signal, widths);
}

Image convolution_reblur_1d(const Image& signal, std::span<const int> halfwidths) {
  if (signal.height() != 1) {
    throw ShapeError("convolution_reblur_1d expects a single-row signal");
  }
  const int length = signal.width();
  if (halfwidths.size() != static_cast<std::size_t>(length)) {
    throw ShapeError("convolution_reblur_1d: one half-width per sample required");
  }
  Image out(length, 1, signal.channels(), 0.0);
  for (int i = 0; i < length; ++i) {
    const int h = halfwidths[static_cast<std::size_t>(i)];
    if (h < 0) throw InvalidArgumentError("halfwidth must be >= 0");
    const int lo = std::max(0, i - h);
    const int hi = std::min(length - 1, i + h);
    for (int c = 0; c < signal.channels(); ++c) {
      double sum = 0.0;
      for (int j = lo; j <= hi; ++j) sum += signal.at(j, 0, c);
      out.at(i, 0, c) = sum / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

}  // namespace reblur
