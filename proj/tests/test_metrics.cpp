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
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "reblur/metrics.hpp"

namespace reblur {
namespace {

using testing::make_rng;
using testing::random_image;

TEST_CASE("psnr examples") {
  auto rng = make_rng(1);
  const Image a = random_image(rng, 16, 16);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  CHECK(psnr(Image(8, 8, 1, 0.3), Image(8, 8, 1, 0.4)) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(Image(8, 8, 3, 1.0), Image(8, 8, 3, 0.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psnr(Image(8, 8, 1), Image(8, 9, 1)), ShapeError);
}

TEST_CASE("property: psnr is symmetric and decreases with mse") {
  auto rng = make_rng(2);
  const Image ref = random_image(rng, 12, 12);
  double prev = std::numeric_limits<double>::infinity();
  for (double amount : {0.01, 0.02, 0.05, 0.1, 0.3}) {
    Image t = ref;
    for (double& v : t.data()) v += amount;
    const double p = psnr(ref, t);
    CHECK(p == psnr(t, ref));
    CHECK(p < prev);
    CHECK(p == doctest::Approx(10.0 * std::log10(1.0 / mean_squared_error(ref, t))));
    prev = p;
  }
}

TEST_CASE("ssim of an image with itself is exactly one") {
  auto rng = make_rng(3);
  const Image a = random_image(rng, 20, 17, 3);
  CHECK(ssim(a, a) == 1.0);
}

TEST_CASE("ssim is symmetric") {
  auto rng = make_rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Image a = random_image(rng, 16, 16), b = random_image(rng, 16, 16);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-9);
  }
}

TEST_CASE("ssim matches a direct per-window evaluation") {
  auto rng = make_rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Image a = random_image(rng, 15, 13, trial % 2 == 0 ? 1 : 3);
    Image b = a;
    for (double& v : b.data()) v = std::clamp(v + testing::uniform(rng, -0.2, 0.2), 0.0, 1.0);
    CHECK(std::abs(ssim(a, b) - testing::naive_ssim(a, b)) <= 1e-9);
  }
}

TEST_CASE("an image against its negative scores below zero") {
  Image a(16, 16, 1);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) a.at(x, y) = ((x / 2 + y / 2) % 2 == 0) ? 0.9 : 0.1;
  }
  Image neg = a;
  for (double& v : neg.data()) v = 1.0 - v;
  CHECK(ssim(a, neg) < 0.0);
}

TEST_CASE("constant images reduce to the luminance factor") {
  const double mu_a = 0.2, mu_b = 0.7;
  const double c1 = 0.01 * 0.01;
  const double expected = (2 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
  CHECK(ssim(Image(12, 12, 1, mu_a), Image(12, 12, 1, mu_b)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim rejects images smaller than the window") {
  CHECK_THROWS_AS(ssim(Image(10, 20, 1), Image(10, 20, 1)), InvalidDimensionError);
}

}  // namespace
}  // namespace reblur
