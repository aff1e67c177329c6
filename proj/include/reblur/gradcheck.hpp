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
#ifndef REBLUR_GRADCHECK_HPP_
#define REBLUR_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace reblur {

// Central finite-difference checks of every analytic VJP on seeded random
// instances. Coordinates whose perturbation changes a discrete decision
// (fragment assignment, bilinear cell, mask, sign of an l1 residual) are
// excluded, since the analytic gradient is only defined piecewise.

struct GradcheckOptions {
  std::uint64_t seed = 0;
  int trials = 100;
  int size = 6;
  int channels = 1;
  double flow_range = 1.5;  // flows drawn from [-range, range]
  // Multiplies every analytic gradient; 1.0 except in negative controls.
  double fault_scale = 1.0;
};

struct GradcheckSuiteResult {
  std::string name;
  double tolerance = 0.0;
  double required_pass_fraction = 0.99;
  long probed = 0;
  long excluded = 0;
  long passed = 0;
  double max_relative_error = 0.0;  // over included coordinates

  long included() const { return probed - excluded; }
  double pass_fraction() const {
    return included() == 0 ? 0.0 : static_cast<double>(passed) / included();
  }
  bool ok() const { return included() > 0 && pass_fraction() >= required_pass_fraction; }
};

struct GradcheckReport {
  std::vector<GradcheckSuiteResult> suites;
  bool ok() const;
};

inline constexpr double kIntensityStep = 1e-3;
inline constexpr double kFlowStep = 1e-4;
inline constexpr double kWarpTolerance = 1e-3;
inline constexpr double kLossTolerance = 1e-2;

// |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

GradcheckSuiteResult check_forward_warp(const GradcheckOptions& options);
GradcheckSuiteResult check_backward_warp(const GradcheckOptions& options);
GradcheckSuiteResult check_reblur(const GradcheckOptions& options, int half_window = 2);
GradcheckSuiteResult check_total_loss(const GradcheckOptions& options, int half_window = 2);

GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace reblur

#endif  // REBLUR_GRADCHECK_HPP_
