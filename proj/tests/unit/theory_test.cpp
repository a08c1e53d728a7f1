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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anatomy/error.hpp"
#include "anatomy/experiments.hpp"
#include "anatomy/theory.hpp"

namespace anatomy {
namespace {

// Probability that the majority of k labels, each wrong with probability
// q_other, disagrees with the true label; averaged over the true label.
double majority_vote_error(double q1, int k) {
  double q2 = 1 - q1;
  auto majority_wrong = [k](double p_wrong) {
    double total = 0;
    for (int j = k / 2 + 1; j <= k; ++j) {
      total += std::tgamma(k + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(k - j + 1.0)) *
               std::pow(p_wrong, j) * std::pow(1 - p_wrong, k - j);
    }
    return total;
  };
  return q1 * majority_wrong(q2) + q2 * majority_wrong(q1);
}

TEST(KnnAsymptoticError, Examples) {
  EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(0.5), 1), 0.5, 1e-15);
  EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(0.1), 1), 0.18, 1e-15);
  EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(0.1), 3), 0.1224, 1e-15);
  EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(0.1), 5), 0.106848, 1e-15);
  EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(0.1), 7), 0.1021824, 1e-15);
}

TEST(KnnAsymptoticError, MatchesMajorityVoteOracle) {
  for (double q1 = 0; q1 <= 1.0 + 1e-9; q1 += 0.05) {
    for (int k = 1; k <= 41; k += 2) {
      double q = std::min(q1, 1.0);
      EXPECT_NEAR(knn_asymptotic_error(PosteriorPoint::from_q1(q), k), majority_vote_error(q, k),
                  1e-12)
          << "q1=" << q << " k=" << k;
    }
  }
}

TEST(KnnAsymptoticError, RejectsEvenOrNonPositiveK) {
  EXPECT_THROW(knn_asymptotic_error(PosteriorPoint::from_q1(0.2), 2), ValidationError);
  EXPECT_THROW(knn_asymptotic_error(PosteriorPoint::from_q1(0.2), 0), ValidationError);
  EXPECT_THROW(knn_asymptotic_error(PosteriorPoint::from_q1(0.2), -3), ValidationError);
  EXPECT_THROW(PosteriorPoint(0.3, 0.3), ValidationError);
}

TEST(KnnAsymptoticError, GridInvariants) {
  for (int i = 0; i <= 100; ++i) {
    double q1 = i / 100.0;
    auto q = PosteriorPoint::from_q1(q1);
    double r_star = std::min(q.q1, q.q2);
    double previous = 1;
    for (int k = 1; k <= 61; k += 2) {
      double r = knn_asymptotic_error(q, k);
      EXPECT_NEAR(r, knn_asymptotic_error(PosteriorPoint::from_q1(1 - q1), k), 1e-12);
      EXPECT_GE(r, r_star - 1e-12);
      EXPECT_LE(r, 2 * r_star + 1e-12);
      EXPECT_LE(r, previous + 1e-12);
      previous = r;
    }
    EXPECT_NEAR(knn_asymptotic_error(q, 1), 2 * q.q1 * q.q2, 1e-15);
  }
}

TEST(Binomial, LargeArgumentsUseLogGamma) {
  EXPECT_EQ(binomial(10, 3), 120.0);
  EXPECT_EQ(binomial(30, 15), 155117520.0);
  EXPECT_NEAR(binomial(40, 20), 137846528820.0, 137846528820.0 * 1e-12);
  EXPECT_NEAR(binomial(60, 30), 1.1826458156486115e17, 1.2e17 * 1e-11);
  EXPECT_EQ(binomial(5, 6), 0.0);
}

TEST(BayesErrorPoint, Examples) {
  auto half = bayes_error_point(PosteriorPoint::from_q1(0.5), 50);
  EXPECT_EQ(half.exact, 0.5);
  // the tail at q1 = q2 decays like 1/sqrt(terms)
  EXPECT_NEAR(half.series, 0.46020538130641064, 1e-14);
  EXPECT_NEAR(bayes_error_point(PosteriorPoint::from_q1(0.5), 5000).series, 0.5, 5e-3);
  const double partial[] = {0.09, 0.0981, 0.099558};
  for (int terms = 1; terms <= 3; ++terms) {
    auto p = bayes_error_point(PosteriorPoint::from_q1(0.1), terms);
    EXPECT_NEAR(p.exact, 0.1, 1e-15);
    EXPECT_NEAR(p.series, partial[terms - 1], 1e-15);
  }
  auto zero = bayes_error_point(PosteriorPoint::from_q1(0), 10);
  EXPECT_EQ(zero.exact, 0.0);
  EXPECT_EQ(zero.series, 0.0);
  EXPECT_THROW(bayes_error_point(PosteriorPoint::from_q1(0.1), 0), ValidationError);
}

TEST(BayesErrorPoint, SeriesMonotoneAndBounded) {
  for (double q1 : {0.01, 0.1, 0.25, 0.4, 0.49}) {
    double previous = 0;
    const double tolerance = q1 < 0.45 ? 1e-6 : 0.02;
    for (int terms = 1; terms <= 200; ++terms) {
      double s = bayes_error_point(PosteriorPoint::from_q1(q1), terms).series;
      EXPECT_GE(s, previous);
      EXPECT_LE(s, q1 + 1e-12);
      previous = s;
    }
    EXPECT_NEAR(previous, q1, tolerance);
  }
}

TEST(CheckBounds, Examples) {
  EXPECT_TRUE(check_bounds(0.1, 0.18, 1, 0));
  EXPECT_FALSE(check_bounds(0.1, 0.25, 1, 0));
  EXPECT_FALSE(check_bounds(0.1, 0.05, 1, 0));
  EXPECT_TRUE(check_bounds(0.1, 0.095, 1, 0.01));
  EXPECT_THROW(check_bounds(0.6, 0.3, 1, 0), ValidationError);
  EXPECT_TRUE(check_bound_chain(0.1, {0.18, 0.12, 0.11}, {1, 3, 5}, 0));
  EXPECT_FALSE(check_bound_chain(0.1, {0.12, 0.18}, {1, 3}, 0));
  EXPECT_TRUE(check_bound_chain(0.1, {0.12, 0.125}, {1, 3}, 0.01));
}

TEST(BetaConstant, Values) {
  EXPECT_NEAR(beta_constant(1), 1 / (2 * std::numbers::pi), 1e-15);
  // independent multiprecision evaluation of the gamma expression
  EXPECT_NEAR(beta_constant(2), 0.115802580826345874459947400084, 1e-13);
  EXPECT_NEAR(beta_constant(4), 0.0913194690491191584697579160193, 1e-13);
  EXPECT_NEAR(beta_constant(10), 0.074797092862001065419823517745, 1e-13);
  EXPECT_NEAR(beta_constant(64), 0.0624768711663594658420942555531, 1e-13);
  for (int d = 1; d <= 200; ++d) EXPECT_GT(beta_constant(d), 0);
  EXPECT_THROW(beta_constant(0), ValidationError);
}

TEST(ConvergencePredict, Identities) {
  ConvergenceModel flat{0.2, 0.0, 4, 2};
  for (double n : {1.0, 10.0, 1e6}) EXPECT_EQ(convergence_predict(flat, n), 0.2);
  ConvergenceModel m{0.1, 0.5, 3, 2};
  double bias1 = convergence_predict(m, 1000) - 0.1;
  double bias2 = convergence_predict(m, 2000) - 0.1;
  EXPECT_NEAR(bias1 / bias2, std::pow(2.0, 2.0 / 4), 1e-12);
  double previous = convergence_predict(m, 1);
  for (double n = 2; n < 1e6; n *= 1.7) {
    double v = convergence_predict(m, n);
    EXPECT_LT(v, previous);
    previous = v;
  }
  ConvergenceModel original{0.1, 0.5, 3, 1};
  EXPECT_NEAR(convergence_predict(original, 100) - 0.1, 0.5 / std::pow(100.0, 0.5), 1e-15);
  EXPECT_THROW(convergence_predict(m, 0), ValidationError);
}

TEST(ConvergenceFit, NoiselessRoundTripWithJointFit) {
  ConvergenceModel truth{0.15, 0.3, 4, 2};
  std::vector<MeasuredPoint> points;
  for (double n : {1000.0, 2000.0, 3000.0, 4000.0}) {
    points.push_back({n, convergence_predict(truth, n)});
  }
  auto fitted = convergence_fit(points, 4, 2, AsymptoteRule::kLeastSquares);
  EXPECT_NEAR(fitted.constant, 0.3, 1e-9);
  EXPECT_NEAR(fitted.asymptote, 0.15, 1e-9);
  EXPECT_NEAR(max_residual(fitted, points), 0.0, 1e-12);
}

TEST(ConvergenceFit, MinimumRuleUsesSmallestErrorAndLeastSquaresConstant) {
  ConvergenceModel truth{0.15, 0.3, 4, 2};
  std::vector<MeasuredPoint> points;
  for (double n : {1000.0, 2000.0, 3000.0, 4000.0}) {
    points.push_back({n, convergence_predict(truth, n)});
  }
  auto fitted = convergence_fit(points, 4, 2);
  EXPECT_EQ(fitted.asymptote, points.back().error);
  double num = 0, den = 0;
  for (const auto& p : points) {
    double x = std::pow(p.n_train * 2, -2.0 / 5);
    num += x * (p.error - fitted.asymptote);
    den += x * x;
  }
  EXPECT_NEAR(fitted.constant, num / den, 1e-12);
}

TEST(ConvergenceFit, FlatAndDegenerateInput) {
  auto flat = convergence_fit({{100, 0.2}, {200, 0.2}, {300, 0.2}}, 2, 1);
  EXPECT_EQ(flat.asymptote, 0.2);
  EXPECT_EQ(flat.constant, 0.0);
  // rising errors would need a negative constant; clamped to zero
  auto rising = convergence_fit({{100, 0.2}, {200, 0.3}}, 2, 1, AsymptoteRule::kLeastSquares);
  EXPECT_EQ(rising.constant, 0.0);
  EXPECT_NEAR(rising.asymptote, 0.25, 1e-15);
  EXPECT_THROW(convergence_fit({{100, 0.2}}, 2, 1), ValidationError);
}

TEST(Parzen, SeparatedGaussiansApproachBayesError) {
  auto train = gaussian_pair(4000, 2.0, 1, 1);
  auto eval = gaussian_pair(4000, 2.0, 1, 2);
  double r = parzen_bayes_error(train, eval, ParzenEstimator{});
  EXPECT_NEAR(r, gaussian_pair_bayes_error(2.0), 0.02);
  ParzenEstimator box{ParzenKernel::kUniformHypercube, 0.5};
  EXPECT_NEAR(parzen_bayes_error(train, eval, box), gaussian_pair_bayes_error(2.0), 0.03);
}

TEST(Parzen, IdenticalClassesNearHalf) {
  auto train = gaussian_pair(3000, 0.0, 1, 3);
  auto eval = gaussian_pair(3000, 0.0, 1, 4);
  EXPECT_NEAR(parzen_bayes_error(train, eval, ParzenEstimator{}), 0.5, 0.04);
}

TEST(Parzen, Errors) {
  auto train = gaussian_pair(50, 2.0, 1, 1);
  std::vector<Instance> one_class;
  for (const auto& x : train.rows()) {
    if (as_text(x.values[2]) == "1") one_class.push_back(x);
  }
  Dataset single(train.schema(), one_class);
  EXPECT_THROW(parzen_bayes_error(single, train, ParzenEstimator{}), ValidationError);
  EXPECT_THROW(parzen_bayes_error(train, Dataset(train.schema(), {}), ParzenEstimator{}),
               ValidationError);
  EXPECT_NEAR(default_parzen_width(10000, 1), std::pow(10000.0, -1.0 / 6), 1e-15);
}

TEST(Parzen, ZeroDensityFallsBackToMajorityClass) {
  // box kernel far smaller than the gap: every eval point sees no training point
  auto train = gaussian_pair(200, 2.0, 1, 5);
  Schema schema = train.schema();
  std::vector<Instance> far;
  far.push_back({RowId{0}, {Cell{1000.0}, Cell{std::string("s0")}, Cell{std::string("1")}}});
  far.push_back({RowId{1}, {Cell{1000.0}, Cell{std::string("s0")}, Cell{std::string("2")}}});
  Dataset eval(schema, far);
  // one of the two eval rows disagrees with whichever class is the majority
  EXPECT_EQ(parzen_bayes_error(train, eval, {ParzenKernel::kUniformHypercube, 0.01}), 0.5);
}

}  // namespace
}  // namespace anatomy
