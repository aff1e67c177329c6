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
#include "reblur/backward_warp.hpp"

namespace reblur {
namespace {

using testing::make_rng;
using testing::random_flow;
using testing::random_image;

TEST_CASE("zero flow is exact") {
  auto rng = make_rng(1);
  const Image src = random_image(rng, 7, 5, 3);
  const auto r = backward_warp(src, FlowField(7, 5));
  CHECK(testing::max_abs_diff(r.warped.data(), src.data()) == 0.0);
  for (double v : r.valid.data()) CHECK(v == 1.0);
}

TEST_CASE("half-pixel shift of a ramp is exact") {
  const int w = 10, h = 4;
  Image ramp(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) ramp.at(x, y) = static_cast<double>(x) / w;
  }
  const auto r = backward_warp(ramp, FlowField(w, h, Vec2{0.5, 0}));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 0.5 <= w - 1) {
        CHECK(r.valid.at(x, y) == 1.0);
        CHECK(r.warped.at(x, y) == doctest::Approx((x + 0.5) / w).epsilon(1e-12));
      } else {
        CHECK(r.valid.at(x, y) == 0.0);
        CHECK(r.warped.at(x, y) == 0.0);
      }
    }
  }
}

TEST_CASE("samples outside the frame are invalid") {
  const Image src(5, 5, 1, 0.5);
  FlowField flow(5, 5);
  flow.set(2, 2, Vec2{-3, 0});
  flow.set(1, 1, Vec2{0, 4});
  const auto r = backward_warp(src, flow);
  CHECK(r.valid.at(2, 2) == 0.0);
  CHECK(r.valid.at(1, 1) == 0.0);
  CHECK(r.valid.at(0, 0) == 1.0);
}

TEST_CASE("matches the tent-kernel oracle and preserves the range") {
  auto rng = make_rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Image src = random_image(rng, 6, 7, 2 * (trial % 2) + 1);
    const FlowField flow = random_flow(rng, 6, 7, 2.5);
    const auto r = backward_warp(src, flow);
    const auto [lo, hi] = std::minmax_element(src.data().begin(), src.data().end());
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 6; ++x) {
        const double sx = x + flow.at(x, y, 0), sy = y + flow.at(x, y, 1);
        const bool inside = sx >= 0 && sy >= 0 && sx <= 5 && sy <= 6;
        CHECK(r.valid.at(x, y) == (inside ? 1.0 : 0.0));
        if (!inside) continue;
        for (int c = 0; c < src.channels(); ++c) {
          CHECK(std::abs(r.warped.at(x, y, c) - testing::tent_sample(src, sx, sy, c)) <= 1e-12);
          CHECK(r.warped.at(x, y, c) >= *lo - 1e-12);
          CHECK(r.warped.at(x, y, c) <= *hi + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("vjp examples") {
  auto rng = make_rng(5);
  const Image src = random_image(rng, 6, 6);
  const auto g = backward_warp_vjp(src, FlowField(6, 6), Image(6, 6, 1, 1.0));
  for (double v : g.grad_src.data()) CHECK(v == doctest::Approx(1.0));

  Image up(6, 6, 1);
  for (double& v : up.data()) v = testing::uniform(rng, -1, 1);
  const auto gc = backward_warp_vjp(Image(6, 6, 1, 0.3), random_flow(rng, 6, 6, 1.0), up);
  for (double v : gc.grad_flow.data()) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("invalid pixels contribute no gradient") {
  auto rng = make_rng(6);
  const Image src = random_image(rng, 5, 5);
  const FlowField flow(5, 5, Vec2{10, 0});
  const auto g = backward_warp_vjp(src, flow, Image(5, 5, 1, 1.0));
  for (double v : g.grad_src.data()) CHECK(v == 0.0);
  for (double v : g.grad_flow.data()) CHECK(v == 0.0);
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS_AS(backward_warp(Image(4, 4, 1), FlowField(3, 4)), ShapeError);
}

}  // namespace
}  // namespace reblur
