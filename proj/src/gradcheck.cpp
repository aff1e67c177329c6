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
#include "reblur/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "reblur/backward_warp.hpp"
#include "reblur/core.hpp"
#include "reblur/losses.hpp"
#include "reblur/mesh_warp.hpp"
#include "reblur/reblur.hpp"

namespace reblur {

namespace {

// Residuals at or below this magnitude sit too close to the l1 kink.
constexpr double kResidualKink = 1e-3;
// Bilinear fractions within this distance of an integer sit on a cell edge.
constexpr double kCellEdge = 1e-2;

enum SuiteId : std::uint64_t { kForward = 1, kBackward = 2, kReblur = 3, kLoss = 4 };

std::mt19937_64 trial_rng(std::uint64_t seed, SuiteId suite, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(suite), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Image random_image(std::mt19937_64& rng, int size, int channels, double lo, double hi) {
  Image img(size, size, channels, 0.0);
  for (double& v : img.data()) v = uniform(rng, lo, hi);
  return img;
}

FlowField random_flow(std::mt19937_64& rng, int size, double range) {
  FlowField flow(size, size);
  for (double& v : flow.data()) v = uniform(rng, -range, range);
  return flow;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Discrete state of an evaluation plus the l1 residuals whose signs matter.
struct Signature {
  std::vector<long> discrete;
  std::vector<double> residuals;
};

bool residual_sign_stable(double r0, double r) {
  if (std::abs(r0) <= kResidualKink) return r == r0;
  return (r0 > 0.0) == (r > 0.0) && r != 0.0;
}

// Evaluates f at +/- h around one coordinate. Returns false when the
// signature changes, in which case the coordinate is excluded.
struct Probe {
  std::function<double()> value;
  std::function<Signature()> signature;
};

void probe_coordinate(double& coord, double h, double analytic, const Probe& probe,
                      const Signature& base, GradcheckSuiteResult& result) {
  const double saved = coord;
  coord = saved + h;
  const double fp = probe.value();
  const Signature sp = probe.signature();
  coord = saved - h;
  const double fm = probe.value();
  const Signature sm = probe.signature();
  coord = saved;
  ++result.probed;

  bool stable = sp.discrete == base.discrete && sm.discrete == base.discrete;
  for (std::size_t k = 0; stable && k < base.residuals.size(); ++k) {
    const double r0 = base.residuals[k];
    if (sp.residuals[k] == r0 && sm.residuals[k] == r0) continue;
    stable = residual_sign_stable(r0, sp.residuals[k]) &&
             residual_sign_stable(r0, sm.residuals[k]);
  }
  if (!stable) {
    ++result.excluded;
    return;
  }
  const double numeric = (fp - fm) / (2.0 * h);
  const double err = relative_error(analytic, numeric);
  result.max_relative_error = std::max(result.max_relative_error, err);
  if (err <= result.tolerance) ++result.passed;
}

void append_fragments(const ForwardWarpResult& warp, std::vector<long>& out) {
  for (const Fragment& f : warp.fragments) out.push_back(f.triangle_id);
}

void append_mask(const Mask& mask, std::vector<long>& out) {
  for (double v : mask.data()) out.push_back(v != 0.0 ? 1 : 0);
}

void append_cells(const FlowField& flow, std::vector<long>& out) {
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const Vec2 u = flow.vec(x, y);
      const SampleCell cell = sample_cell({x + u.x, y + u.y}, flow.width(), flow.height());
      out.push_back(cell.valid ? cell.y0 * flow.width() + cell.x0 : -1);
    }
  }
}

void append_residuals(const Image& a, const Image& b, std::vector<double>& out) {
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) out.push_back(da[i] - db[i]);
}

GradcheckSuiteResult make_result(const char* name, double tolerance) {
  GradcheckSuiteResult r;
  r.name = name;
  r.tolerance = tolerance;
  return r;
}

}  // namespace

bool GradcheckReport::ok() const {
  return !suites.empty() &&
         std::all_of(suites.begin(), suites.end(), [](const auto& s) { return s.ok(); });
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradcheckSuiteResult check_forward_warp(const GradcheckOptions& options) {
  GradcheckSuiteResult result = make_result("forward_warp", kWarpTolerance);
  const int n = options.size;
  const TriangleLattice lattice = build_lattice(n, n);
  for (int trial = 0; trial < options.trials; ++trial) {
    auto rng = trial_rng(options.seed, kForward, trial);
    Image src = random_image(rng, n, options.channels, 0.0, 1.0);
    FlowField flow = random_flow(rng, n, options.flow_range);
    const Image upstream = random_image(rng, n, options.channels, -1.0, 1.0);

    const ForwardWarpResult fwd = forward_warp(lattice, src, flow);
    ForwardWarpGradients grads = forward_warp_vjp(lattice, src, flow, fwd, upstream);

    Probe probe;
    probe.value = [&] { return dot(forward_warp(lattice, src, flow).image.data(), upstream.data()); };
    probe.signature = [&] {
      Signature s;
      append_fragments(forward_warp(lattice, src, flow), s.discrete);
      return s;
    };
    const Signature base = probe.signature();

    auto src_data = src.data();
    const auto gs = grads.grad_src.data();
    for (std::size_t i = 0; i < src_data.size(); ++i) {
      probe_coordinate(src_data[i], kIntensityStep, options.fault_scale * gs[i], probe, base,
                       result);
    }
    auto flow_data = flow.data();
    const auto gf = grads.grad_flow.data();
    for (std::size_t i = 0; i < flow_data.size(); ++i) {
      probe_coordinate(flow_data[i], kFlowStep, options.fault_scale * gf[i], probe, base,
                       result);
    }
  }
  return result;
}

GradcheckSuiteResult check_backward_warp(const GradcheckOptions& options) {
  GradcheckSuiteResult result = make_result("backward_warp", kWarpTolerance);
  const int n = options.size;
  for (int trial = 0; trial < options.trials; ++trial) {
    auto rng = trial_rng(options.seed, kBackward, trial);
    Image src = random_image(rng, n, options.channels, 0.0, 1.0);
    FlowField flow = random_flow(rng, n, options.flow_range);
    const Image upstream = random_image(rng, n, options.channels, -1.0, 1.0);
    const BackwardWarpGradients grads = backward_warp_vjp(src, flow, upstream);

    Probe probe;
    probe.value = [&] { return dot(backward_warp(src, flow).warped.data(), upstream.data()); };
    probe.signature = [&] {
      Signature s;
      append_cells(flow, s.discrete);
      return s;
    };
    const Signature base = probe.signature();

    auto src_data = src.data();
    const auto gs = grads.grad_src.data();
    for (std::size_t i = 0; i < src_data.size(); ++i) {
      probe_coordinate(src_data[i], kIntensityStep, options.fault_scale * gs[i], probe, base,
                       result);
    }
    auto flow_data = flow.data();
    const auto gf = grads.grad_flow.data();
    for (std::size_t i = 0; i < flow_data.size(); ++i) {
      // Sample coordinate along this component; the pixel index i / 2 gives
      // x = (i / 2) % n, y = (i / 2) / n.
      const int pixel = static_cast<int>(i / 2);
      const double base_coord = (i % 2 == 0 ? pixel % n : pixel / n) + flow_data[i];
      const double frac = base_coord - std::floor(base_coord);
      if (std::min(frac, 1.0 - frac) <= kCellEdge) {
        ++result.probed;
        ++result.excluded;
        continue;
      }
      probe_coordinate(flow_data[i], kFlowStep, options.fault_scale * gf[i], probe, base,
                       result);
    }
  }
  return result;
}

GradcheckSuiteResult check_reblur(const GradcheckOptions& options, int half_window) {
  GradcheckSuiteResult result = make_result("reblur", kWarpTolerance);
  const int n = options.size;
  const TriangleLattice lattice = build_lattice(n, n);
  for (int trial = 0; trial < options.trials; ++trial) {
    auto rng = trial_rng(options.seed, kReblur, trial);
    Image sharp = random_image(rng, n, options.channels, 0.0, 1.0);
    FlowField step = random_flow(rng, n, options.flow_range / std::max(1, half_window));
    const Image upstream = random_image(rng, n, options.channels, -1.0, 1.0);
    const ReblurGradients grads = reblur_vjp(sharp, step, half_window, upstream);

    Probe probe;
    probe.value = [&] {
      return dot(reblur(sharp, step, half_window).blurred.data(), upstream.data());
    };
    probe.signature = [&] {
      Signature s;
      for (int i = -half_window; i <= half_window; ++i) {
        append_fragments(forward_warp(lattice, sharp, step.scaled(i)), s.discrete);
      }
      return s;
    };
    const Signature base = probe.signature();

    auto sharp_data = sharp.data();
    const auto gs = grads.grad_sharp.data();
    for (std::size_t i = 0; i < sharp_data.size(); ++i) {
      probe_coordinate(sharp_data[i], kIntensityStep, options.fault_scale * gs[i], probe,
                       base, result);
    }
    auto step_data = step.data();
    const auto gf = grads.grad_step_flow.data();
    for (std::size_t i = 0; i < step_data.size(); ++i) {
      probe_coordinate(step_data[i], kFlowStep, options.fault_scale * gf[i], probe, base,
                       result);
    }
  }
  return result;
}

GradcheckSuiteResult check_total_loss(const GradcheckOptions& options, int half_window) {
  GradcheckSuiteResult result = make_result("total_loss", kLossTolerance);
  const int n = options.size;
  const int c = options.channels;
  const TriangleLattice lattice = build_lattice(n, n);
  const ReblurConfig reblur_cfg{half_window, 1.0, 1.0};
  const LossConfig loss_cfg{};
  for (int trial = 0; trial < options.trials; ++trial) {
    auto rng = trial_rng(options.seed, kLoss, trial);
    const Image blur_a = random_image(rng, n, c, 0.0, 1.0);
    const Image blur_b = random_image(rng, n, c, 0.0, 1.0);
    LatentPair latent{random_image(rng, n, c, 0.0, 1.0), random_image(rng, n, c, 0.0, 1.0),
                      random_flow(rng, n, options.flow_range),
                      random_flow(rng, n, options.flow_range)};
    const LossEvaluation eval = total_loss_vjp(blur_a, blur_b, latent, reblur_cfg, loss_cfg);

    Probe probe;
    probe.value = [&] { return total_loss(blur_a, blur_b, latent, reblur_cfg, loss_cfg).total; };
    probe.signature = [&] {
      Signature s;
      const double scale = exposure_flow_scale(reblur_cfg);
      const FlowField step_a = latent.flow_ab.scaled(scale);
      const FlowField step_b = latent.flow_ba.scaled(scale);
      for (int i = -half_window; i <= half_window; ++i) {
        append_fragments(forward_warp(lattice, latent.sharp_a, step_a.scaled(i)), s.discrete);
        append_fragments(forward_warp(lattice, latent.sharp_b, step_b.scaled(i)), s.discrete);
      }
      append_cells(latent.flow_ab, s.discrete);
      append_cells(latent.flow_ba, s.discrete);
      const LossMasks masks = compute_loss_masks(latent, reblur_cfg);
      append_mask(masks.self_a, s.discrete);
      append_mask(masks.self_b, s.discrete);
      append_mask(masks.fwbw_a, s.discrete);
      append_mask(masks.fwbw_b, s.discrete);
      append_residuals(reblur(latent.sharp_a, step_a, half_window).blurred, blur_a,
                       s.residuals);
      append_residuals(reblur(latent.sharp_b, step_b, half_window).blurred, blur_b,
                       s.residuals);
      append_residuals(backward_warp(latent.sharp_b, latent.flow_ab).warped, latent.sharp_a,
                       s.residuals);
      append_residuals(backward_warp(latent.sharp_a, latent.flow_ba).warped, latent.sharp_b,
                       s.residuals);
      return s;
    };
    const Signature base = probe.signature();

    const auto probe_all = [&](std::span<double> values, std::span<const double> grads,
                               double h) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        probe_coordinate(values[i], h, options.fault_scale * grads[i], probe, base, result);
      }
    };
    probe_all(latent.sharp_a.data(), eval.gradients.grad_a.data(), kIntensityStep);
    probe_all(latent.sharp_b.data(), eval.gradients.grad_b.data(), kIntensityStep);
    probe_all(latent.flow_ab.data(), eval.gradients.grad_flow_ab.data(), kFlowStep);
    probe_all(latent.flow_ba.data(), eval.gradients.grad_flow_ba.data(), kFlowStep);
  }
  return result;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  if (options.trials < 1) throw InvalidArgumentError("gradcheck needs at least one trial");
  if (options.size < 2) throw InvalidDimensionError("gradcheck size must be >= 2");
  GradcheckReport report;
  report.suites.push_back(check_forward_warp(options));
  report.suites.push_back(check_backward_warp(options));
  report.suites.push_back(check_reblur(options));
  report.suites.push_back(check_total_loss(options));
  return report;
}

}  // namespace reblur
