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

#include "anatomy/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "anatomy/error.hpp"

namespace anatomy {

PosteriorPoint::PosteriorPoint(double q1_, double q2_) : q1(q1_), q2(q2_) {
  if (!(q1 >= 0 && q1 <= 1 && q2 >= 0 && q2 <= 1) || std::abs(q1 + q2 - 1.0) > 1e-12) {
    throw ValidationError("posteriors must lie in [0,1] and sum to 1");
  }
}

double binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  if (n <= 30) {
    double c = 1;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return std::round(c);
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0));
}

namespace {

double series_term(int i, double p) {
  if (p == 0) return 0;
  if (i <= 15) return binomial(2 * i - 2, i - 1) / i * std::pow(p, i);
  // keep the log form for large i where C(2i-2, i-1) overflows before p^i
  double log_c = std::lgamma(2.0 * i - 1) - 2 * std::lgamma(static_cast<double>(i));
  return std::exp(log_c - std::log(static_cast<double>(i)) + i * std::log(p));
}

void require_odd(int k) {
  if (k < 1 || k % 2 == 0) {
    throw ValidationError("k must be odd and positive, got " + std::to_string(k));
  }
}

}  // namespace

double knn_asymptotic_error(const PosteriorPoint& q, int k) {
  require_odd(k);
  const double p = q.q1 * q.q2;
  const int m = (k + 1) / 2;
  double sum = 0;
  for (int i = 1; i <= m; ++i) sum += series_term(i, p);
  if (p > 0) sum += 0.5 * binomial(k + 1, m) * std::pow(p, m);
  return sum;
}

BayesErrorPoint bayes_error_point(const PosteriorPoint& q, int series_terms) {
  if (series_terms < 1) throw ValidationError("series_terms must be >= 1");
  BayesErrorPoint out;
  out.exact = std::min(q.q1, q.q2);
  const double p = q.q1 * q.q2;
  for (int i = 1; i <= series_terms; ++i) out.series += series_term(i, p);
  return out;
}

bool check_bounds(double r_star, double r_measured, int k, double tolerance) {
  require_odd(k);
  if (!(r_star >= 0 && r_star <= 0.5)) throw ValidationError("r_star must lie in [0, 0.5]");
  return r_star - tolerance <= r_measured && r_measured <= 2 * r_star + tolerance;
}

bool check_bound_chain(double r_star, const std::vector<double>& measured_by_k,
                       const std::vector<int>& ks, double tolerance) {
  if (measured_by_k.size() != ks.size()) throw ValidationError("one error per k expected");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!check_bounds(r_star, measured_by_k[i], ks[i], tolerance)) return false;
    if (i > 0) {
      if (ks[i] <= ks[i - 1]) throw ValidationError("k values must increase");
      if (measured_by_k[i] > measured_by_k[i - 1] + tolerance) return false;
    }
  }
  return true;
}

double beta_constant(int d) {
  if (d < 1) throw ValidationError("beta_constant: d must be >= 1");
  const double e = 2.0 / (d + 1);
  return std::exp(e * std::lgamma((d + 3) / 2.0)) * std::tgamma(e + 1) /
         (std::numbers::pi * (d + 1));
}

double convergence_predict(const ConvergenceModel& model, double n_train) {
  if (!(n_train >= 1)) throw ValidationError("convergence_predict: n_train must be >= 1");
  return model.asymptote +
         model.constant / std::pow(n_train * model.l, 2.0 / (model.d + 1));
}

ConvergenceModel convergence_fit(const std::vector<MeasuredPoint>& measured, int d, int l,
                                 AsymptoteRule rule) {
  if (measured.size() < 2) throw ValidationError("convergence_fit: need at least 2 points");
  if (d < 1 || l < 1) throw ValidationError("convergence_fit: d and l must be >= 1");
  ConvergenceModel model;
  model.d = d;
  model.l = l;
  std::vector<double> x;
  for (const auto& p : measured) {
    if (!(p.n_train >= 1)) throw ValidationError("convergence_fit: n_train must be >= 1");
    x.push_back(std::pow(p.n_train * l, -2.0 / (d + 1)));
  }

  auto fit_c = [&](double asymptote) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
      num += x[i] * (measured[i].error - asymptote);
      den += x[i] * x[i];
    }
    return den > 0 ? std::max(0.0, num / den) : 0.0;
  };

  double lowest = measured[0].error;
  for (const auto& p : measured) lowest = std::min(lowest, p.error);
  model.asymptote = std::clamp(lowest, 0.0, 0.5);
  if (rule == AsymptoteRule::kLeastSquares) {
    const double n = static_cast<double>(measured.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
      sx += x[i];
      sy += measured[i].error;
      sxx += x[i] * x[i];
      sxy += x[i] * measured[i].error;
    }
    const double det = n * sxx - sx * sx;
    double c = det > 0 ? (n * sxy - sx * sy) / det : 0.0;
    if (c <= 0) {
      model.asymptote = std::clamp(sy / n, 0.0, 0.5);
    } else {
      model.asymptote = std::clamp((sy - c * sx) / n, 0.0, 0.5);
    }
  }
  model.constant = fit_c(model.asymptote);
  return model;
}

double max_residual(const ConvergenceModel& model, const std::vector<MeasuredPoint>& measured) {
  double worst = 0;
  for (const auto& p : measured) {
    worst = std::max(worst, std::abs(p.error - convergence_predict(model, p.n_train)));
  }
  return worst;
}

double default_parzen_width(std::size_t n, std::size_t numeric_axes) {
  if (n == 0) throw ValidationError("default_parzen_width: n must be > 0");
  return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(numeric_axes) + 5.0));
}

namespace {

struct ParzenPoints {
  std::vector<double> numeric;  // row-major, already divided by the axis widths
  std::vector<std::string> categorical;
  std::size_t num_dims = 0;
  std::size_t cat_dims = 0;
};

ParzenPoints encode(const Dataset& data, const std::vector<std::size_t>& num_cols,
                    const std::vector<std::size_t>& cat_cols, const std::vector<double>& scale,
                    std::span<const std::size_t> rows) {
  ParzenPoints p;
  p.num_dims = num_cols.size();
  p.cat_dims = cat_cols.size();
  for (std::size_t r : rows) {
    const Instance& x = data.row(r);
    for (std::size_t a = 0; a < num_cols.size(); ++a) {
      p.numeric.push_back(as_number(x.values[num_cols[a]]) / scale[a]);
    }
    for (std::size_t c : cat_cols) p.categorical.push_back(as_text(x.values[c]));
  }
  return p;
}

// log of the unnormalized kernel sum; the normalization constant is shared
// by both classes and cancels in the decision
double log_kernel_sum(const ParzenPoints& pts, std::size_t count, const double* x,
                      const std::string* xc, ParzenKernel kernel) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (kernel == ParzenKernel::kUniformHypercube) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < count; ++i) {
      bool inside = true;
      for (std::size_t a = 0; a < pts.num_dims && inside; ++a) {
        inside = std::abs(pts.numeric[i * pts.num_dims + a] - x[a]) <= 0.5;
      }
      for (std::size_t c = 0; c < pts.cat_dims && inside; ++c) {
        inside = pts.categorical[i * pts.cat_dims + c] == xc[c];
      }
      hits += inside;
    }
    return hits ? std::log(static_cast<double>(hits)) : neg_inf;
  }
  double best = neg_inf;
  std::vector<double> exponents;
  exponents.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    bool match = true;
    for (std::size_t c = 0; c < pts.cat_dims && match; ++c) {
      match = pts.categorical[i * pts.cat_dims + c] == xc[c];
    }
    if (!match) continue;
    double s = 0;
    for (std::size_t a = 0; a < pts.num_dims; ++a) {
      double z = pts.numeric[i * pts.num_dims + a] - x[a];
      s += z * z;
    }
    exponents.push_back(-0.5 * s);
    best = std::max(best, -0.5 * s);
  }
  if (exponents.empty()) return neg_inf;
  double sum = 0;
  for (double e : exponents) sum += std::exp(e - best);
  return best + std::log(sum);
}

}  // namespace

double parzen_bayes_error(const Dataset& train, const Dataset& eval, const ParzenEstimator& est) {
  if (eval.empty()) throw ValidationError("parzen_bayes_error: empty evaluation set");
  const Schema& schema = train.schema();
  std::vector<std::size_t> num_cols, cat_cols;
  for (std::size_t f : schema.feature_indices()) {
    (schema[f].kind == AttributeKind::kNumeric ? num_cols : cat_cols).push_back(f);
  }
  const auto labels = train.class_labels();
  if (labels.size() != 2) throw ValidationError("parzen_bayes_error: both classes must be present");

  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < train.size(); ++r) {
    by_class[train.class_of(r) == labels[0] ? 0 : 1].push_back(r);
  }

  const double width = est.width > 0 ? est.width : default_parzen_width(train.size(), num_cols.size());
  if (!(width > 0)) throw ValidationError("parzen_bayes_error: width must be > 0");
  std::vector<double> scale(num_cols.size());
  for (std::size_t a = 0; a < num_cols.size(); ++a) {
    double mean = 0, sq = 0;
    for (const auto& x : train.rows()) mean += as_number(x.values[num_cols[a]]);
    mean /= static_cast<double>(train.size());
    for (const auto& x : train.rows()) {
      double dv = as_number(x.values[num_cols[a]]) - mean;
      sq += dv * dv;
    }
    double sd = train.size() > 1 ? std::sqrt(sq / static_cast<double>(train.size() - 1)) : 0.0;
    scale[a] = (sd > 0 ? sd : 1.0) * width;
  }

  ParzenPoints pts[2] = {encode(train, num_cols, cat_cols, scale, by_class[0]),
                         encode(train, num_cols, cat_cols, scale, by_class[1])};
  const double n1 = static_cast<double>(by_class[0].size());
  const double n2 = static_cast<double>(by_class[1].size());
  const double t = std::log(n1 / n2);  // ln(P1 / P2)
  const std::size_t majority = n1 >= n2 ? 0 : 1;

  std::vector<std::size_t> eval_rows(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) eval_rows[i] = i;
  std::vector<std::size_t> eval_num, eval_cat;
  for (std::size_t f : eval.schema().feature_indices()) {
    (eval.schema()[f].kind == AttributeKind::kNumeric ? eval_num : eval_cat).push_back(f);
  }
  if (eval_num.size() != num_cols.size() || eval_cat.size() != cat_cols.size()) {
    throw ValidationError("parzen_bayes_error: evaluation schema does not match");
  }
  ParzenPoints q = encode(eval, eval_num, eval_cat, scale, eval_rows);

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const double* x = q.numeric.data() + i * q.num_dims;
    const std::string* xc = q.categorical.data() + i * q.cat_dims;
    double lp1 = log_kernel_sum(pts[0], by_class[0].size(), x, xc, est.kernel) - std::log(n1);
    double lp2 = log_kernel_sum(pts[1], by_class[1].size(), x, xc, est.kernel) - std::log(n2);
    std::size_t decided;
    if (std::isinf(lp1) && std::isinf(lp2)) {
      decided = majority;
    } else {
      double h = lp2 - lp1;  // -ln(p1/p2)
      decided = h < t ? 0 : (h > t ? 1 : majority);
    }
    wrong += eval.class_of(i) != labels[decided];
  }
  return static_cast<double>(wrong) / static_cast<double>(eval.size());
}

}  // namespace anatomy
