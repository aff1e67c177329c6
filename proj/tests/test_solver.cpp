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
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "reblur/io.hpp"
#include "reblur/metrics.hpp"
#include "reblur/solver.hpp"

namespace reblur {
namespace {

using testing::make_rng;
using testing::random_image;

// Noise moving one pixel per frame; window 5 and stride 4, so the blur
// streak is 4 px and flow_ab is (4, 0).
BlurPair noise_pair(int size, std::uint64_t seed) {
  SequenceSpec spec;
  spec.pattern = Pattern::kNoise;
  spec.width = size;
  spec.height = size;
  spec.velocity = {1, 0};
  spec.count = 14;
  spec.seed = seed;
  return synthesize_blur_pair(generate_synthetic_sequence(spec), 5, 4, Vec2{1, 0});
}

// Checkerboard with 16 px cells moving one pixel per frame; window 9 and
// stride 8 give an 8 px streak and flow_ab = (8, 0).
BlurPair checker_pair(int size) {
  SequenceSpec spec;
  spec.width = size;
  spec.height = size;
  spec.velocity = {1, 0};
  spec.count = 26;
  return synthesize_blur_pair(generate_synthetic_sequence(spec), 9, 8, Vec2{1, 0});
}

SolverConfig small_config() {
  SolverConfig config;
  config.half_window = 2;
  config.iterations = 30;
  config.pyramid_levels = 2;
  return config;
}

TEST_CASE("initialize copies the inputs and zeroes the flows") {
  auto rng = make_rng(1);
  const Image a = random_image(rng, 8, 8), b = random_image(rng, 8, 8);
  const SolverState s = initialize(a, b);
  CHECK(testing::max_abs_diff(s.latent.sharp_a.data(), a.data()) == 0.0);
  CHECK(testing::max_abs_diff(s.latent.sharp_b.data(), b.data()) == 0.0);
  for (double v : s.latent.flow_ab.data()) CHECK(v == 0.0);
  for (double v : s.latent.flow_ba.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(initialize(a, Image(8, 9, 1)), ShapeError);
}

TEST_CASE("blurry pair starts with zero self-consistency loss") {
  const BlurPair p = noise_pair(24, 3);
  const SolverState s = initialize(p.blur_a, p.blur_b);
  const SolverConfig config;
  const auto r = total_loss(p.blur_a, p.blur_b, s.latent, config.reblur_config(),
                            config.loss_config());
  CHECK(r.l_self < 1e-6);
  CHECK(r.l_fwbw > 0.0);
}

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
  c = SolverConfig{};
  c.step_size_flow = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
  c = SolverConfig{};
  c.tv_weight_image = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
  c = SolverConfig{};
  c.pyramid_levels = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
}

TEST_CASE("zero-loss state is a fixed point of step") {
  auto rng = make_rng(2);
  const Image s = random_image(rng, 12, 12);
  const SolverState state = initialize(s, s);
  const SolverState next = step(state, SolverConfig{});
  CHECK(testing::max_abs_diff(next.latent.sharp_a.data(), s.data()) == 0.0);
  CHECK(testing::max_abs_diff(next.latent.sharp_b.data(), s.data()) == 0.0);
  for (double v : next.latent.flow_ab.data()) CHECK(v == 0.0);
  REQUIRE(next.loss_history.size() == 1);
  CHECK(next.loss_history.back().total == 0.0);
}

TEST_CASE("static sharp pair is returned unchanged") {
  auto rng = make_rng(3);
  const Image s = random_image(rng, 24, 24);
  SolverConfig config = small_config();
  config.iterations = 5;
  const SolverState out = solve(s, s, config);
  CHECK(testing::max_abs_diff(out.latent.sharp_a.data(), s.data()) == 0.0);
  CHECK(testing::max_abs_diff(out.latent.sharp_b.data(), s.data()) == 0.0);
  CHECK(out.loss_history.back().total < 1e-6);
}

TEST_CASE("flow updates point toward the true flow when images are frozen") {
  int toward = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const BlurPair p = noise_pair(24, 100 + trial);
    auto rng = make_rng(200 + trial);
    SolverState state = initialize(p.blur_a, p.blur_b);
    state.latent.sharp_a = p.sharp_a;
    state.latent.sharp_b = p.sharp_b;
    const double truth_ab = 4.0, truth_ba = -4.0;
    for (double& v : state.latent.flow_ab.data()) v = testing::uniform(rng, -1, 1);
    for (double& v : state.latent.flow_ba.data()) v = testing::uniform(rng, -1, 1);
    for (std::size_t i = 0; i < state.latent.flow_ab.size(); i += 2) {
      state.latent.flow_ab.data()[i] += truth_ab;
      state.latent.flow_ba.data()[i] += truth_ba;
    }
    SolverConfig config = small_config();
    config.update_images = false;
    const SolverState next = step(state, config);
    double inner = 0.0;
    for (std::size_t i = 0; i < state.latent.flow_ab.size(); ++i) {
      const bool x = i % 2 == 0;
      const double d_ab = next.latent.flow_ab.data()[i] - state.latent.flow_ab.data()[i];
      const double d_ba = next.latent.flow_ba.data()[i] - state.latent.flow_ba.data()[i];
      inner += d_ab * ((x ? truth_ab : 0.0) - state.latent.flow_ab.data()[i]);
      inner += d_ba * ((x ? truth_ba : 0.0) - state.latent.flow_ba.data()[i]);
    }
    if (inner > 0.0) ++toward;
  }
  CHECK(toward >= trials * 9 / 10);
}

TEST_CASE("solve descends monotonically and keeps self-consistency") {
  const BlurPair p = checker_pair(48);
  SolverConfig config;
  config.iterations = 30;
  const SolverState out = solve(p.blur_a, p.blur_b, config);
  REQUIRE(out.loss_history.size() == static_cast<std::size_t>(config.iterations) + 1);
  for (std::size_t i = 1; i < out.loss_history.size(); ++i) {
    CHECK(out.loss_history[i].total <= out.loss_history[i - 1].total);
    CHECK(out.objective_history[i] <= out.objective_history[i - 1]);
  }
  CHECK(out.loss_history.back().total < out.loss_history.front().total);
  CHECK(out.warnings.empty());

  // Reblurring the latents with the recovered flow explains the inputs at
  // least as well as reblurring the inputs themselves.
  const LatentPair inputs{p.blur_a, p.blur_b, out.latent.flow_ab, out.latent.flow_ba};
  const auto at_inputs = total_loss(p.blur_a, p.blur_b, inputs, config.reblur_config(),
                                    config.loss_config());
  const auto at_optimum = total_loss(p.blur_a, p.blur_b, out.latent, config.reblur_config(),
                                     config.loss_config());
  CHECK(at_optimum.l_self <= at_inputs.l_self);
  CHECK(psnr(p.sharp_a, out.latent.sharp_a) > psnr(p.sharp_a, p.blur_a) + 0.5);

  const SolverState again = solve(p.blur_a, p.blur_b, config);
  CHECK(testing::max_abs_diff(again.latent.sharp_a.data(), out.latent.sharp_a.data()) == 0.0);
  CHECK(testing::max_abs_diff(again.latent.flow_ab.data(), out.latent.flow_ab.data()) == 0.0);
}

TEST_CASE("constant inputs stay constant") {
  const Image c(20, 20, 3, 0.4);
  const SolverState out = solve(c, c, small_config());
  for (double v : out.latent.sharp_a.data()) CHECK(std::abs(v - 0.4) <= 1e-6);
  for (double v : out.latent.sharp_b.data()) CHECK(std::abs(v - 0.4) <= 1e-6);
  for (double v : out.latent.flow_ab.data()) CHECK(std::abs(v) <= 1e-6);
  for (double v : out.latent.flow_ba.data()) CHECK(std::abs(v) <= 1e-6);
}

TEST_CASE("lambda = 0 warns") {
  const Image c(16, 16, 1, 0.5);
  SolverConfig config = small_config();
  config.iterations = 1;
  config.lambda = 0.0;
  const SolverState out = solve(c, c, config);
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0].find("lambda") != std::string::npos);
}

TEST_CASE("non-finite inputs abort with a numeric error") {
  Image a(12, 12, 1, 0.5);
  a.at(3, 3) = std::nan("");
  const SolverState state = initialize(a, Image(12, 12, 1, 0.5));
  CHECK_THROWS_AS(step(state, SolverConfig{}), NumericError);
}

TEST_CASE("pyramid resampling") {
  const Image c(9, 6, 3, 0.25);
  const Image d = downsample(c);
  CHECK(d.width() == 4);
  CHECK(d.height() == 3);
  for (double v : d.data()) CHECK(v == doctest::Approx(0.25));
  const FlowField f = upsample_flow(FlowField(4, 3, Vec2{1, -2}), 9, 6);
  // Displacements scale with the size ratio of each axis.
  CHECK(f.vec(5, 4).x == doctest::Approx(9.0 / 4.0));
  CHECK(f.vec(5, 4).y == doctest::Approx(-4.0));
}

}  // namespace
}  // namespace reblur
