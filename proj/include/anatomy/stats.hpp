// Copyright 2026 The Anatomy-kNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ANATOMY_STATS_HPP_
#define ANATOMY_STATS_HPP_

#include <vector>

namespace anatomy {

double mean(const std::vector<double>& values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(const std::vector<double>& values);

// Two-sided critical value of Student's t with `dof` degrees of freedom.
double t_critical(double confidence, int dof);

struct TTestResult {
  double t = 0;  // +/-infinity when the differences are constant and nonzero
  bool significant = false;
};

// Paired two-sided t-test on a - b. Constant zero differences give t = 0;
// constant nonzero differences give an infinite t, significant at every level.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                          double confidence);

}  // namespace anatomy

#endif  // ANATOMY_STATS_HPP_
