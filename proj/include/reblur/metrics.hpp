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
#ifndef REBLUR_METRICS_HPP_
#define REBLUR_METRICS_HPP_

#include "reblur/core.hpp"

namespace reblur {

double mean_squared_error(const Image& reference, const Image& test);

// 10 log10(1 / MSE) for unit-range intensities; +infinity when MSE == 0.
double psnr(const Image& reference, const Image& test);

// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5),
// C1 = 0.01^2, C2 = 0.03^2, averaged over channels. Both sides need at
// least 11 pixels.
double ssim(const Image& reference, const Image& test);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

}  // namespace reblur

#endif  // REBLUR_METRICS_HPP_
