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
#include "doctest.h"
#include "reblur/core.hpp"
#include "reblur/gradcheck.hpp"

namespace reblur {
namespace {

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
}

TEST_CASE("all suites pass on correct gradients") {
  GradcheckOptions options;
  options.trials = 5;
  const GradcheckReport report = run_gradcheck(options);
  REQUIRE(report.suites.size() == 4);
  for (const auto& s : report.suites) {
    INFO(s.name);
    CHECK(s.ok());
    CHECK(s.included() > 0);
    CHECK(s.pass_fraction() >= 0.99);
  }
  CHECK(report.ok());
}

TEST_CASE("scaled gradients are caught") {
  GradcheckOptions options;
  options.trials = 3;
  options.fault_scale = 1.5;
  const GradcheckReport report = run_gradcheck(options);
  for (const auto& s : report.suites) {
    INFO(s.name);
    CHECK_FALSE(s.ok());
  }
  CHECK_FALSE(report.ok());
}

TEST_CASE("results are reproducible for a seed") {
  GradcheckOptions options;
  options.trials = 2;
  options.seed = 17;
  const auto a = run_gradcheck(options);
  const auto b = run_gradcheck(options);
  for (std::size_t i = 0; i < a.suites.size(); ++i) {
    CHECK(a.suites[i].probed == b.suites[i].probed);
    CHECK(a.suites[i].passed == b.suites[i].passed);
    CHECK(a.suites[i].max_relative_error == b.suites[i].max_relative_error);
  }
}

TEST_CASE("invalid options are rejected") {
  GradcheckOptions options;
  options.trials = 0;
  CHECK_THROWS_AS(run_gradcheck(options), InvalidArgumentError);
  options.trials = 1;
  options.size = 1;
  CHECK_THROWS_AS(run_gradcheck(options), InvalidDimensionError);
}

}  // namespace
}  // namespace reblur
