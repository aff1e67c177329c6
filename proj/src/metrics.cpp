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
#include "reblur/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace reblur {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kSsimWindow * kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow * kSsimWindow> w{};
  const int half = kSsimWindow / 2;
  double total = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v =
          std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
      w[static_cast<std::size_t>((dy + half) * kSsimWindow + dx + half)] = v;
      total += v;
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double mean_squared_error(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "mse");
  const auto a = reference.data();
  const auto b = test.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double psnr(const Image& reference, const Image& test) {
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "ssim");
  if (reference.width() < kSsimWindow || reference.height() < kSsimWindow) {
    throw InvalidDimensionError("ssim needs images of at least 11x11 pixels");
  }
  static const auto window = gaussian_window();
  const int out_w = reference.width() - kSsimWindow + 1;
  const int out_h = reference.height() - kSsimWindow + 1;
  double channel_total = 0.0;
  for (int c = 0; c < reference.channels(); ++c) {
    double sum = 0.0;
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        double mu_a = 0.0, mu_b = 0.0;
        for (int wy = 0; wy < kSsimWindow; ++wy) {
          for (int wx = 0; wx < kSsimWindow; ++wx) {
            const double w = window[static_cast<std::size_t>(wy * kSsimWindow + wx)];
            mu_a += w * reference.at(x + wx, y + wy, c);
            mu_b += w * test.at(x + wx, y + wy, c);
          }
        }
        double var_a = 0.0, var_b = 0.0, cov = 0.0;
        for (int wy = 0; wy < kSsimWindow; ++wy) {
          for (int wx = 0; wx < kSsimWindow; ++wx) {
            const double w = window[static_cast<std::size_t>(wy * kSsimWindow + wx)];
            const double da = reference.at(x + wx, y + wy, c) - mu_a;
            const double db = test.at(x + wx, y + wy, c) - mu_b;
            var_a += w * da * da;
            var_b += w * db * db;
            cov += w * da * db;
          }
        }
        const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
        const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
        sum += num / den;
      }
    }
    channel_total += sum / (static_cast<double>(out_w) * out_h);
  }
  return channel_total / reference.channels();
}

}  // namespace reblur
