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
#include "reblur/solver.hpp"

#include <algorithm>
#include <cmath>

#include "reblur/backward_warp.hpp"

namespace reblur {

namespace {

constexpr int kMaxHalvings = 10;
// Charbonnier smoothing of the total-variation penalties, in data units.
constexpr double kTvEpsilon = 1e-2;
// Pyramid levels stop before either side drops below this.
constexpr int kMinPyramidSide = 8;

double charbonnier(double d) {
  return std::sqrt(d * d + kTvEpsilon * kTvEpsilon) - kTvEpsilon;
}
double charbonnier_grad(double d) {
  return d / std::sqrt(d * d + kTvEpsilon * kTvEpsilon);
}

// Mean over pixels of the summed forward-difference penalties per channel.
double tv_value(const Raster& r) {
  double total = 0.0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      for (int c = 0; c < r.channels(); ++c) {
        const double v = r.at(x, y, c);
        if (x + 1 < r.width()) total += charbonnier(r.at(x + 1, y, c) - v);
        if (y + 1 < r.height()) total += charbonnier(r.at(x, y + 1, c) - v);
      }
    }
  }
  return total / static_cast<double>(r.pixel_count());
}

void tv_accumulate_grad(const Raster& r, double weight, std::span<double> grad) {
  const double scale = weight / static_cast<double>(r.pixel_count());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      for (int c = 0; c < r.channels(); ++c) {
        const double v = r.at(x, y, c);
        if (x + 1 < r.width()) {
          const double g = scale * charbonnier_grad(r.at(x + 1, y, c) - v);
          grad[r.index(x + 1, y, c)] += g;
          grad[r.index(x, y, c)] -= g;
        }
        if (y + 1 < r.height()) {
          const double g = scale * charbonnier_grad(r.at(x, y + 1, c) - v);
          grad[r.index(x, y + 1, c)] += g;
          grad[r.index(x, y, c)] -= g;
        }
      }
    }
  }
}

// Averages each image gradient with the other image's gradient pulled into
// its frame, where the pull is valid.
void couple_image_gradients(const LatentPair& latent, Image& grad_a, Image& grad_b) {
  const BackwardWarpResult into_a = backward_warp(grad_b, latent.flow_ab);
  const BackwardWarpResult into_b = backward_warp(grad_a, latent.flow_ba);
  auto mix = [](Image& g, const BackwardWarpResult& other) {
    for (int y = 0; y < g.height(); ++y) {
      for (int x = 0; x < g.width(); ++x) {
        if (other.valid.at(x, y) == 0.0) continue;
        for (int c = 0; c < g.channels(); ++c) {
          g.at(x, y, c) = 0.5 * (g.at(x, y, c) + other.warped.at(x, y, c));
        }
      }
    }
  };
  mix(grad_a, into_a);
  mix(grad_b, into_b);
}

// Separable box filter of the given radius with clamped borders, applied
// `passes` times per channel.
void smooth_in_place(Raster& r, int radius, int passes) {
  if (radius < 1 || passes < 1) return;
  const int w = r.width();
  const int h = r.height();
  const int ch = r.channels();
  std::vector<double> line;
  for (int pass = 0; pass < passes; ++pass) {
    for (int c = 0; c < ch; ++c) {
      for (int y = 0; y < h; ++y) {
        line.assign(static_cast<std::size_t>(w), 0.0);
        for (int x = 0; x < w; ++x) line[static_cast<std::size_t>(x)] = r.at(x, y, c);
        for (int x = 0; x < w; ++x) {
          double sum = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            sum += line[static_cast<std::size_t>(std::clamp(x + k, 0, w - 1))];
          }
          r.at(x, y, c) = sum / (2 * radius + 1);
        }
      }
      for (int x = 0; x < w; ++x) {
        line.assign(static_cast<std::size_t>(h), 0.0);
        for (int y = 0; y < h; ++y) line[static_cast<std::size_t>(y)] = r.at(x, y, c);
        for (int y = 0; y < h; ++y) {
          double sum = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            sum += line[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1))];
          }
          r.at(x, y, c) = sum / (2 * radius + 1);
        }
      }
    }
  }
}

bool all_finite(const LatentGradients& g) {
  return g.grad_a.all_finite() && g.grad_b.all_finite() &&
         g.grad_flow_ab.all_finite() && g.grad_flow_ba.all_finite();
}

struct Evaluation {
  LossReport report;
  double objective = 0.0;
};

Evaluation evaluate(const SolverState& state, const LatentPair& latent,
                    const SolverConfig& config) {
  Evaluation e;
  e.report = total_loss(state.blur_a, state.blur_b, latent,
                        config.reblur_config(), config.loss_config());
  e.objective = e.report.total + regularizer(latent, config);
  return e;
}

void apply_update(Image& image, const Image& grad, double step) {
  auto v = image.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::clamp(v[i] - step * g[i], 0.0, 1.0);
  }
}

void apply_update(FlowField& flow, const FlowField& grad, double step) {
  auto v = flow.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * g[i];
}

double sample_clamped(const Raster& r, double x, double y, int c) {
  x = std::clamp(x, 0.0, static_cast<double>(r.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(r.height() - 1));
  const int x0 = std::min(static_cast<int>(std::floor(x)), std::max(0, r.width() - 2));
  const int y0 = std::min(static_cast<int>(std::floor(y)), std::max(0, r.height() - 2));
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  return (1.0 - ax) * (1.0 - ay) * r.at(x0, y0, c) + ax * (1.0 - ay) * r.at(x1, y0, c) +
         (1.0 - ax) * ay * r.at(x0, y1, c) + ax * ay * r.at(x1, y1, c);
}

template <typename RasterT>
void upsample_into(const Raster& coarse, RasterT& fine, double value_scale) {
  const double sx = static_cast<double>(coarse.width()) / fine.width();
  const double sy = static_cast<double>(coarse.height()) / fine.height();
  for (int y = 0; y < fine.height(); ++y) {
    for (int x = 0; x < fine.width(); ++x) {
      const double cx = (x + 0.5) * sx - 0.5;
      const double cy = (y + 0.5) * sy - 0.5;
      for (int c = 0; c < fine.channels(); ++c) {
        fine.at(x, y, c) = value_scale * sample_clamped(coarse, cx, cy, c);
      }
    }
  }
}

void record(SolverState& state, const Evaluation& e) {
  state.loss_history.push_back(e.report);
  state.objective_history.push_back(e.objective);
}

}  // namespace

void SolverConfig::validate() const {
  if (iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
  if (!(step_size_image > 0.0) || !(step_size_flow > 0.0)) {
    throw InvalidArgumentError("step sizes must be > 0");
  }
  if (!(tv_weight_image >= 0.0) || !(tv_weight_flow >= 0.0)) {
    throw InvalidArgumentError("tv weights must be >= 0");
  }
  if (pyramid_levels < 1) throw InvalidArgumentError("pyramid_levels must be >= 1");
  if (image_levels < 0) throw InvalidArgumentError("image_levels must be >= 0");
  if (flow_smoothing_radius < 0 || flow_smoothing_passes < 0) {
    throw InvalidArgumentError("flow smoothing radius and passes must be >= 0");
  }
  loss_config().validate();
  reblur_config().validate();
}

ReblurConfig SolverConfig::reblur_config() const {
  return ReblurConfig{half_window, exposure_ratio, 1.0};
}

double regularizer(const LatentPair& latent, const SolverConfig& config) {
  double total = 0.0;
  if (config.tv_weight_flow > 0.0) {
    total += config.tv_weight_flow * (tv_value(latent.flow_ab) + tv_value(latent.flow_ba));
  }
  if (config.tv_weight_image > 0.0) {
    total += config.tv_weight_image * (tv_value(latent.sharp_a) + tv_value(latent.sharp_b));
  }
  return total;
}

SolverState initialize(const Image& blur_a, const Image& blur_b) {
  require_same_shape(blur_a, blur_b, "initialize");
  SolverState state;
  state.blur_a = blur_a;
  state.blur_b = blur_b;
  state.latent = LatentPair{blur_a, blur_b, FlowField(blur_a.width(), blur_a.height()),
                            FlowField(blur_a.width(), blur_a.height())};
  return state;
}

SolverState step(const SolverState& state, const SolverConfig& config) {
  LossEvaluation eval = total_loss_vjp(state.blur_a, state.blur_b, state.latent,
                                       config.reblur_config(), config.loss_config());
  LatentGradients& g = eval.gradients;
  if (config.tv_weight_flow > 0.0) {
    tv_accumulate_grad(state.latent.flow_ab, config.tv_weight_flow, g.grad_flow_ab.data());
    tv_accumulate_grad(state.latent.flow_ba, config.tv_weight_flow, g.grad_flow_ba.data());
  }
  if (config.tv_weight_image > 0.0) {
    tv_accumulate_grad(state.latent.sharp_a, config.tv_weight_image, g.grad_a.data());
    tv_accumulate_grad(state.latent.sharp_b, config.tv_weight_image, g.grad_b.data());
  }
  if (!std::isfinite(eval.report.total) || !all_finite(g)) {
    throw NumericError("non-finite loss or gradient after " +
                       std::to_string(state.loss_history.size()) + " iterations");
  }

  if (config.couple_images) couple_image_gradients(state.latent, g.grad_a, g.grad_b);
  smooth_in_place(g.grad_flow_ab, config.flow_smoothing_radius, config.flow_smoothing_passes);
  smooth_in_place(g.grad_flow_ba, config.flow_smoothing_radius, config.flow_smoothing_passes);

  const Evaluation current{eval.report,
                           eval.report.total + regularizer(state.latent, config)};
  const double pixels = static_cast<double>(state.blur_a.pixel_count());
  const double image_step = config.update_images
                                ? config.step_size_image * pixels * state.blur_a.channels()
                                : 0.0;
  const double flow_step = config.update_flows ? config.step_size_flow * pixels : 0.0;

  SolverState next = state;
  // Joint step first. On the l1 kinks the joint direction can fail to
  // descend while one block alone still does, so the flow-only and
  // image-only steps are tried before giving up.
  std::vector<std::pair<double, double>> blocks{{image_step, flow_step}};
  if (image_step > 0.0 && flow_step > 0.0) {
    blocks.emplace_back(0.0, flow_step);
    blocks.emplace_back(image_step, 0.0);
  }
  double scale = state.step_scale;
  for (const auto& [block_image_step, block_flow_step] : blocks) {
    scale = state.step_scale;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, scale *= 0.5) {
      LatentPair candidate = state.latent;
      if (block_image_step > 0.0) {
        apply_update(candidate.sharp_a, g.grad_a, scale * block_image_step);
        apply_update(candidate.sharp_b, g.grad_b, scale * block_image_step);
      }
      if (block_flow_step > 0.0) {
        apply_update(candidate.flow_ab, g.grad_flow_ab, scale * block_flow_step);
        apply_update(candidate.flow_ba, g.grad_flow_ba, scale * block_flow_step);
      }
      const Evaluation trial = evaluate(state, candidate, config);
      if (std::isfinite(trial.objective) && trial.objective <= current.objective &&
          trial.report.total <= current.report.total) {
        next.latent = std::move(candidate);
        next.step_scale = std::min(1.0, 2.0 * scale);
        record(next, trial);
        return next;
      }
    }
  }
  next.step_scale = std::max(scale, 1e-6);
  ++next.rejected_steps;
  record(next, current);
  return next;
}

SolverState solve(const Image& blur_a, const Image& blur_b,
                  const SolverConfig& config, const ProgressFn& progress) {
  require_same_shape(blur_a, blur_b, "solve");
  config.validate();

  std::vector<std::string> warnings;
  if (config.lambda == 0.0) {
    warnings.emplace_back(
        "lambda = 0 disables the forward/backward loss; the flow is not "
        "constrained by the self-consistency term alone");
  }

  // Pyramid, finest first.
  std::vector<std::pair<Image, Image>> pyramid{{blur_a, blur_b}};
  while (static_cast<int>(pyramid.size()) < config.pyramid_levels) {
    const Image& a = pyramid.back().first;
    if (a.width() / 2 < kMinPyramidSide || a.height() / 2 < kMinPyramidSide) break;
    pyramid.emplace_back(downsample(a), downsample(pyramid.back().second));
  }

  SolverState state;
  std::vector<std::vector<LossReport>> coarse_histories;
  for (int level = static_cast<int>(pyramid.size()) - 1; level >= 0; --level) {
    const auto& [level_a, level_b] = pyramid[static_cast<std::size_t>(level)];
    if (level == static_cast<int>(pyramid.size()) - 1) {
      state = initialize(level_a, level_b);
    } else {
      const int w = level_a.width();
      const int h = level_a.height();
      // Carry the coarse correction (latent minus blurry input) upward.
      auto lift = [&](const Image& latent, const Image& coarse_blur, const Image& fine_blur) {
        Image delta = latent;
        auto d = delta.data();
        const auto cb = coarse_blur.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= cb[i];
        Image out = upsample(delta, w, h);
        auto o = out.data();
        const auto fb = fine_blur.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::clamp(o[i] + fb[i], 0.0, 1.0);
        return out;
      };
      SolverState fine = initialize(level_a, level_b);
      fine.latent.sharp_a = lift(state.latent.sharp_a, state.blur_a, level_a);
      fine.latent.sharp_b = lift(state.latent.sharp_b, state.blur_b, level_b);
      fine.latent.flow_ab = upsample_flow(state.latent.flow_ab, w, h);
      fine.latent.flow_ba = upsample_flow(state.latent.flow_ba, w, h);
      coarse_histories.push_back(std::move(state.loss_history));
      state = std::move(fine);
    }
    SolverConfig level_config = config;
    level_config.update_images = config.update_images && level < config.image_levels;
    record(state, evaluate(state, state.latent, config));
    for (int it = 0; it < config.iterations; ++it) {
      state = step(state, level_config);
      if (progress) progress(level, it, state.loss_history.back());
    }
  }
  state.level_histories = std::move(coarse_histories);
  state.warnings = std::move(warnings);
  return state;
}

Image downsample(const Image& image) {
  const int w = image.width() / 2;
  const int h = image.height() / 2;
  if (w < 1 || h < 1) throw InvalidDimensionError("image too small to downsample");
  Image out(w, h, image.channels(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = 0.25 * (image.at(2 * x, 2 * y, c) + image.at(2 * x + 1, 2 * y, c) +
                                  image.at(2 * x, 2 * y + 1, c) +
                                  image.at(2 * x + 1, 2 * y + 1, c));
      }
    }
  }
  return out;
}

Image upsample(const Image& image, int width, int height) {
  Image out(width, height, image.channels(), 0.0);
  upsample_into(image, out, 1.0);
  return out;
}

FlowField upsample_flow(const FlowField& flow, int width, int height) {
  FlowField out(width, height);
  upsample_into(flow, out, 1.0);
  const double rx = static_cast<double>(width) / flow.width();
  const double ry = static_cast<double>(height) / flow.height();
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); i += 2) {
    d[i] *= rx;
    d[i + 1] *= ry;
  }
  return out;
}

}  // namespace reblur
