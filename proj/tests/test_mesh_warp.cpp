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
#include "reblur/mesh_warp.hpp"
#include "reblur/parallel.hpp"

namespace reblur {
namespace {

using testing::make_rng;
using testing::random_flow;
using testing::random_image;

TEST_CASE("zero flow is the identity") {
  auto rng = make_rng(1);
  const Image src = random_image(rng, 9, 7, 3);
  const auto r = forward_warp(src, FlowField(9, 7));
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      CHECK(r.coverage.at(x, y) == 1.0);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(r.image.at(x, y, c) - src.at(x, y, c)) <= 1e-6);
    }
  }
}

TEST_CASE("integer shift by two leaves a two-column hole") {
  auto rng = make_rng(2);
  const Image src = random_image(rng, 8, 8);
  const auto r = forward_warp(src, FlowField(8, 8, Vec2{2, 0}));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x < 2) {
        CHECK(r.coverage.at(x, y) == 0.0);
        CHECK(r.image.at(x, y) == 0.0);
      } else {
        CHECK(r.coverage.at(x, y) == 1.0);
        CHECK(std::abs(r.image.at(x, y) - src.at(x - 2, y)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("colliding flows: the larger motion is in front") {
  // 8x3 grid. Columns 0..3 move right by 3; columns 4..7 stay. The moving
  // block lands on columns 3..6 and overlaps the static block at 4..6.
  Image src(8, 3, 1, 0.0);
  FlowField flow(8, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 8; ++x) {
      src.at(x, y) = x < 4 ? 1.0 : 0.0;
      if (x < 4) flow.set(x, y, Vec2{3, 0});
    }
  }
  const auto r = forward_warp(src, flow);
  const auto oracle = testing::brute_force_forward_warp(src, flow);
  for (int y = 0; y < 3; ++y) {
    for (int x = 4; x <= 6; ++x) {
      CHECK(r.image.at(x, y) == doctest::Approx(1.0));
      const auto& frag = r.fragments[static_cast<std::size_t>(y) * 8 + x];
      CHECK(frag.triangle_id == oracle.owner[static_cast<std::size_t>(y) * 8 + x]);
      CHECK(frag.motion_magnitude == doctest::Approx(3.0));
    }
  }
}

TEST_CASE("matches the brute-force rasterizer on random flows") {
  auto rng = make_rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Image src = random_image(rng, 7, 6, trial % 2 == 0 ? 1 : 3);
    const FlowField flow = random_flow(rng, 7, 6, 1.5);
    const auto r = forward_warp(src, flow);
    const auto oracle = testing::brute_force_forward_warp(src, flow);
    for (std::size_t p = 0; p < r.fragments.size(); ++p) {
      CHECK(r.fragments[p].triangle_id == oracle.owner[p]);
      CHECK(r.coverage.data()[p] == (oracle.owner[p] >= 0 ? 1.0 : 0.0));
    }
    CHECK(testing::max_abs_diff(r.image.data(), oracle.image) <= 1e-9);
  }
}

TEST_CASE("property: covered outputs are convex combinations") {
  auto rng = make_rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Image src = random_image(rng, 8, 8);
    const FlowField flow = random_flow(rng, 8, 8, 2.0);
    const auto r = forward_warp(src, flow);
    const auto [lo, hi] = std::minmax_element(src.data().begin(), src.data().end());
    for (std::size_t p = 0; p < r.fragments.size(); ++p) {
      const Fragment& f = r.fragments[p];
      if (!f.covered()) continue;
      double sum = 0.0;
      for (double w : f.barycentric) {
        CHECK(w >= -1e-6);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
      CHECK(r.image.data()[p] >= *lo - 1e-12);
      CHECK(r.image.data()[p] <= *hi + 1e-12);
    }
  }
}

TEST_CASE("property: linear in intensities") {
  auto rng = make_rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Image s1 = random_image(rng, 6, 6, 3);
    const Image s2 = random_image(rng, 6, 6, 3);
    const FlowField flow = random_flow(rng, 6, 6, 1.5);
    const double a = testing::uniform(rng, -2, 2), b = testing::uniform(rng, -2, 2);
    Image mix(6, 6, 3);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      mix.data()[i] = a * s1.data()[i] + b * s2.data()[i];
    }
    const auto r = forward_warp(mix, flow);
    const auto r1 = forward_warp(s1, flow);
    const auto r2 = forward_warp(s2, flow);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      CHECK(std::abs(r.image.data()[i] - (a * r1.image.data()[i] + b * r2.image.data()[i])) <=
            1e-12);
    }
  }
}

TEST_CASE("output does not depend on the thread count") {
  auto rng = make_rng(8);
  const Image src = random_image(rng, 40, 33, 3);
  const FlowField flow = random_flow(rng, 40, 33, 3.0);
  Image up(40, 33, 3);
  for (double& v : up.data()) v = testing::uniform(rng, -1, 1);
  set_num_threads(1);
  const auto r1 = forward_warp(src, flow);
  const auto g1 = forward_warp_vjp(src, flow, up);
  set_num_threads(4);
  const auto r4 = forward_warp(src, flow);
  const auto g4 = forward_warp_vjp(src, flow, up);
  set_num_threads(0);
  CHECK(std::equal(r1.image.data().begin(), r1.image.data().end(), r4.image.data().begin()));
  CHECK(std::equal(g1.grad_src.data().begin(), g1.grad_src.data().end(),
                   g4.grad_src.data().begin()));
  CHECK(std::equal(g1.grad_flow.data().begin(), g1.grad_flow.data().end(),
                   g4.grad_flow.data().begin()));
}

TEST_CASE("motion_magnitude examples") {
  const TriangleLattice lat = build_lattice(2, 2);
  FlowField flow(2, 2);
  CHECK(motion_magnitude(flow, 0, lat) == 0.0);
  flow = FlowField(2, 2, Vec2{3, 4});
  CHECK(motion_magnitude(flow, 0, lat) == doctest::Approx(5.0));
  // Triangle 0 is (v00, v10, v01).
  flow = FlowField(2, 2);
  flow.set(0, 0, Vec2{1, 0});
  flow.set(1, 0, Vec2{0, 1});
  CHECK(motion_magnitude(flow, 0, lat) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("vjp examples") {
  auto rng = make_rng(9);
  Image ones(6, 5, 1, 1.0);
  const Image src = random_image(rng, 6, 5);
  const auto g = forward_warp_vjp(src, FlowField(6, 5), ones);
  for (double v : g.grad_src.data()) CHECK(v == doctest::Approx(1.0));

  const Image flat(6, 5, 1, 0.4);
  Image up(6, 5, 1);
  for (double& v : up.data()) v = testing::uniform(rng, -1, 1);
  const auto gc = forward_warp_vjp(flat, random_flow(rng, 6, 5, 1.0), up);
  for (double v : gc.grad_flow.data()) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS_AS(forward_warp(Image(4, 4, 1), FlowField(4, 5)), ShapeError);
  CHECK_THROWS_AS(forward_warp_vjp(Image(4, 4, 1), FlowField(4, 4), Image(4, 4, 3)),
                  ShapeError);
}

}  // namespace
}  // namespace reblur
