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

#ifndef ANATOMY_THEORY_HPP_
#define ANATOMY_THEORY_HPP_

#include <string>
#include <vector>

#include "anatomy/dataset.hpp"

namespace anatomy {

// Class posteriors at a point; q1 + q2 = 1.
struct PosteriorPoint {
  double q1 = 0.5;
  double q2 = 0.5;

  PosteriorPoint() = default;
  PosteriorPoint(double q1_, double q2_);
  static PosteriorPoint from_q1(double q1) { return {q1, 1.0 - q1}; }
};

// C(n, r); exact products up to n = 30, log-gamma beyond.
double binomial(int n, int r);

// Asymptotic k-NN error at a point for odd k:
//   sum_{i=1}^{(k+1)/2} C(2i-2, i-1)/i (q1 q2)^i + C(k+1, (k+1)/2)/2 (q1 q2)^{(k+1)/2}
// which is the probability that a majority of k labels drawn with the
// posteriors disagrees with the query label.
double knn_asymptotic_error(const PosteriorPoint& q, int k);

struct BayesErrorPoint {
  double exact = 0;   // min(q1, q2)
  double series = 0;  // partial sum of the same series, series_terms terms
};
BayesErrorPoint bayes_error_point(const PosteriorPoint& q, int series_terms);

// r* - tol <= measured <= 2 r* + tol.
bool check_bounds(double r_star, double r_measured, int k, double tolerance);

// Errors measured for increasing odd k on the same data: every one within
// the bounds and the sequence non-increasing up to the tolerance.
bool check_bound_chain(double r_star, const std::vector<double>& measured_by_k,
                       const std::vector<int>& ks, double tolerance);

// Finite-sample constant of the 1-NN convergence rate in dimension d + 1.
double beta_constant(int d);

struct ConvergenceModel {
  double asymptote = 0;  // R_A
  double constant = 0;   // fitted bias scale c
  int d = 1;
  int l = 1;

  bool operator==(const ConvergenceModel&) const = default;
};

// R_A + c / (n l)^{2/(d+1)}
double convergence_predict(const ConvergenceModel& model, double n_train);

struct MeasuredPoint {
  double n_train = 0;
  double error = 0;

  bool operator==(const MeasuredPoint&) const = default;
};

enum class AsymptoteRule {
  kMinimumObserved,  // R_A = smallest measured error, c by least squares
  kLeastSquares,     // R_A and c jointly by least squares
};

ConvergenceModel convergence_fit(const std::vector<MeasuredPoint>& measured, int d, int l,
                                 AsymptoteRule rule = AsymptoteRule::kMinimumObserved);

double max_residual(const ConvergenceModel& model, const std::vector<MeasuredPoint>& measured);

enum class ParzenKernel { kGaussianProduct, kUniformHypercube };

// Numeric features are scaled per axis by their standard deviation on the
// training data times `width`; categorical features use an exact-match
// kernel. width <= 0 selects the default N^(-1/(D+5)) with D numeric axes.
struct ParzenEstimator {
  ParzenKernel kernel = ParzenKernel::kGaussianProduct;
  double width = 0;
};

double default_parzen_width(std::size_t n, std::size_t numeric_axes);

// Classifies each eval row by h(X) = -ln(p1(X)/p2(X)) against
// t = ln(P1/P2) with Parzen class densities and returns the error fraction.
// Class 1 is the first class label in sorted order.
double parzen_bayes_error(const Dataset& train, const Dataset& eval, const ParzenEstimator& est);

}  // namespace anatomy

#endif  // ANATOMY_THEORY_HPP_
