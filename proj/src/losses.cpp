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
#include "reblur/losses.hpp"

#include <cmath>

#include "reblur/backward_warp.hpp"
#include "reblur/occlusion.hpp"

namespace reblur {

namespace {

double l1_normalizer(const Mask& mask, int channels) {
  return mask.sum() * static_cast<double>(channels);
}

void check_latent(const Image& blur_a, const Image& blur_b,
                  const LatentPair& latent) {
  require_same_shape(blur_a, blur_b, "total_loss blurry pair");
  require_same_shape(blur_a, latent.sharp_a, "total_loss latent a");
  require_same_shape(blur_a, latent.sharp_b, "total_loss latent b");
  require_same_grid(blur_a, latent.flow_ab, "total_loss flow_ab");
  require_same_grid(blur_a, latent.flow_ba, "total_loss flow_ba");
}

void add_into(Image& dst, const Image& src, double scale = 1.0) {
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void add_into(FlowField& dst, const FlowField& src, double scale = 1.0) {
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

// Everything total_loss and its VJP share: the forward products and masks.
struct ForwardPass {
  double step_scale = 0.0;
  FlowField step_a;
  FlowField step_b;
  ReblurResult reblur_a;
  ReblurResult reblur_b;
  BackwardWarpResult warp_a;  // sharp_b pulled into frame a via flow_ab
  BackwardWarpResult warp_b;  // sharp_a pulled into frame b via flow_ba
  LossMasks masks;
  LossReport report;
};

ForwardPass run_forward(const Image& blur_a, const Image& blur_b,
                        const LatentPair& latent, const ReblurConfig& reblur_cfg,
                        const LossConfig& loss_cfg, bool keep_frames) {
  check_latent(blur_a, blur_b, latent);
  loss_cfg.validate();
  ForwardPass fp;
  fp.step_scale = exposure_flow_scale(reblur_cfg);
  const int n = reblur_cfg.half_window;
  fp.step_a = latent.flow_ab.scaled(fp.step_scale);
  fp.step_b = latent.flow_ba.scaled(fp.step_scale);
  fp.reblur_a = reblur(latent.sharp_a, fp.step_a, n, false, keep_frames);
  fp.reblur_b = reblur(latent.sharp_b, fp.step_b, n, false, keep_frames);
  fp.warp_a = backward_warp(latent.sharp_b, latent.flow_ab);
  fp.warp_b = backward_warp(latent.sharp_a, latent.flow_ba);

  fp.masks.self_a = fp.reblur_a.mask * self_consistency_mask(fp.step_a, n);
  fp.masks.self_b = fp.reblur_b.mask * self_consistency_mask(fp.step_b, n);
  fp.masks.fwbw_a = reachability_mask(latent.flow_ba) * fp.warp_a.valid;
  fp.masks.fwbw_b = reachability_mask(latent.flow_ab) * fp.warp_b.valid;

  LossReport& r = fp.report;
  r.l_self = masked_l1(fp.reblur_a.blurred, blur_a, fp.masks.self_a) +
             masked_l1(fp.reblur_b.blurred, blur_b, fp.masks.self_b);
  r.l_fwbw = masked_l1(fp.warp_a.warped, latent.sharp_a, fp.masks.fwbw_a) +
             masked_l1(fp.warp_b.warped, latent.sharp_b, fp.masks.fwbw_b);
  r.total = r.l_self + loss_cfg.lambda * r.l_fwbw;
  r.masked_pixel_counts = {fp.masks.self_a.sum(), fp.masks.self_b.sum(),
                           fp.masks.fwbw_a.sum(), fp.masks.fwbw_b.sum()};
  return fp;
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("lambda must be finite and >= 0");
  }
}

double masked_l1(const Image& a, const Image& b, const Mask& mask) {
  require_same_shape(a, b, "masked_l1");
  require_same_grid(a, mask, "masked_l1 mask");
  const double norm = l1_normalizer(mask, a.channels());
  if (norm == 0.0) return 0.0;
  double sum = 0.0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const double m = mask.at(x, y);
      if (m == 0.0) continue;
      for (int c = 0; c < a.channels(); ++c) {
        sum += m * std::abs(a.at(x, y, c) - b.at(x, y, c));
      }
    }
  }
  return sum / norm;
}

Image masked_l1_grad(const Image& a, const Image& b, const Mask& mask) {
  require_same_shape(a, b, "masked_l1_grad");
  require_same_grid(a, mask, "masked_l1_grad mask");
  Image grad(a.width(), a.height(), a.channels(), 0.0);
  const double norm = l1_normalizer(mask, a.channels());
  if (norm == 0.0) return grad;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const double m = mask.at(x, y);
      if (m == 0.0) continue;
      for (int c = 0; c < a.channels(); ++c) {
        const double r = a.at(x, y, c) - b.at(x, y, c);
        const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        grad.at(x, y, c) = m * sign / norm;
      }
    }
  }
  return grad;
}

double loss_self(const ReblurResult& reblur_a, const Image& blur_a,
                 const ReblurResult& reblur_b, const Image& blur_b) {
  return masked_l1(reblur_a.blurred, blur_a, reblur_a.mask) +
         masked_l1(reblur_b.blurred, blur_b, reblur_b.mask);
}

double loss_fwbw(const Image& sharp_a, const Image& sharp_b,
                 const FlowField& flow_ab, const FlowField& flow_ba,
                 const Mask& occlusion_a, const Mask& occlusion_b) {
  const BackwardWarpResult warp_a = backward_warp(sharp_b, flow_ab);
  const BackwardWarpResult warp_b = backward_warp(sharp_a, flow_ba);
  return masked_l1(warp_a.warped, sharp_a, occlusion_a * warp_a.valid) +
         masked_l1(warp_b.warped, sharp_b, occlusion_b * warp_b.valid);
}

LossMasks compute_loss_masks(const LatentPair& latent, const ReblurConfig& reblur_cfg) {
  check_latent(latent.sharp_a, latent.sharp_b, latent);
  const double scale = exposure_flow_scale(reblur_cfg);
  const int n = reblur_cfg.half_window;
  const FlowField step_a = latent.flow_ab.scaled(scale);
  const FlowField step_b = latent.flow_ba.scaled(scale);
  LossMasks masks;
  masks.self_a = reblur(latent.sharp_a, step_a, n).mask * self_consistency_mask(step_a, n);
  masks.self_b = reblur(latent.sharp_b, step_b, n).mask * self_consistency_mask(step_b, n);
  masks.fwbw_a = reachability_mask(latent.flow_ba) *
                 backward_warp(latent.sharp_b, latent.flow_ab).valid;
  masks.fwbw_b = reachability_mask(latent.flow_ab) *
                 backward_warp(latent.sharp_a, latent.flow_ba).valid;
  return masks;
}

LossReport total_loss(const Image& blur_a, const Image& blur_b,
                      const LatentPair& latent, const ReblurConfig& reblur_cfg,
                      const LossConfig& loss_cfg) {
  return run_forward(blur_a, blur_b, latent, reblur_cfg, loss_cfg, false).report;
}

LossEvaluation total_loss_vjp(const Image& blur_a, const Image& blur_b,
                              const LatentPair& latent, const ReblurConfig& reblur_cfg,
                              const LossConfig& loss_cfg) {
  const ForwardPass fp = run_forward(blur_a, blur_b, latent, reblur_cfg, loss_cfg, true);
  const int w = blur_a.width();
  const int h = blur_a.height();
  const int c = blur_a.channels();
  LossEvaluation out{fp.report,
                     {Image(w, h, c, 0.0), Image(w, h, c, 0.0), FlowField(w, h),
                      FlowField(w, h)}};
  LatentGradients& g = out.gradients;
  const int n = reblur_cfg.half_window;

  // Self-consistency terms.
  {
    const Image up_a = masked_l1_grad(fp.reblur_a.blurred, blur_a, fp.masks.self_a);
    const ReblurGradients ga = reblur_vjp(latent.sharp_a, fp.step_a, n, fp.reblur_a, up_a);
    add_into(g.grad_a, ga.grad_sharp);
    add_into(g.grad_flow_ab, ga.grad_step_flow, fp.step_scale);

    const Image up_b = masked_l1_grad(fp.reblur_b.blurred, blur_b, fp.masks.self_b);
    const ReblurGradients gb = reblur_vjp(latent.sharp_b, fp.step_b, n, fp.reblur_b, up_b);
    add_into(g.grad_b, gb.grad_sharp);
    add_into(g.grad_flow_ba, gb.grad_step_flow, fp.step_scale);
  }

  // Forward/backward terms, weighted by lambda.
  const double lambda = loss_cfg.lambda;
  if (lambda != 0.0) {
    const Image up_a = masked_l1_grad(fp.warp_a.warped, latent.sharp_a, fp.masks.fwbw_a);
    const BackwardWarpGradients wa = backward_warp_vjp(latent.sharp_b, latent.flow_ab, up_a);
    add_into(g.grad_b, wa.grad_src, lambda);
    add_into(g.grad_flow_ab, wa.grad_flow, lambda);
    add_into(g.grad_a, up_a, -lambda);

    const Image up_b = masked_l1_grad(fp.warp_b.warped, latent.sharp_b, fp.masks.fwbw_b);
    const BackwardWarpGradients wb = backward_warp_vjp(latent.sharp_a, latent.flow_ba, up_b);
    add_into(g.grad_a, wb.grad_src, lambda);
    add_into(g.grad_flow_ba, wb.grad_flow, lambda);
    add_into(g.grad_b, up_b, -lambda);
  }
  return out;
}

}  // namespace reblur
