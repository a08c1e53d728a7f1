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

#include "anatomy/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "anatomy/error.hpp"

namespace anatomy {

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0;
  const double m = mean(values);
  double sq = 0;
  for (double v : values) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

double t_critical(double confidence, int dof) {
  if (!(confidence > 0 && confidence < 1)) throw ValidationError("confidence must be in (0,1)");
  if (dof < 1) throw ValidationError("t_critical: dof must be >= 1");
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, (1 - confidence) / 2));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                          double confidence) {
  if (a.size() != b.size()) throw ValidationError("paired_t_test: samples differ in length");
  if (a.size() < 2) throw ValidationError("paired_t_test: need at least 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double sd = sample_sd(diff);
  TTestResult out;
  // constant differences: treat residual floating-point noise as zero spread
  const double noise = 1e-12 * std::max(1.0, std::abs(m));
  if (sd <= noise) {
    if (std::abs(m) <= noise) return out;
    out.t = std::copysign(std::numeric_limits<double>::infinity(), m);
    out.significant = true;
    return out;
  }
  out.t = m / (sd / std::sqrt(static_cast<double>(diff.size())));
  out.significant = std::abs(out.t) > t_critical(confidence, static_cast<int>(diff.size()) - 1);
  return out;
}

}  // namespace anatomy
