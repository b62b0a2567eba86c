// Copyright 2026 The gradsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRADSIM_STATS_HPP_
#define GRADSIM_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "gradsim/estimators.hpp"

namespace gradsim {

// Inverse standard normal CDF. Acklam's rational approximation refined by
// one Halley step against erfc, giving near machine precision on (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  }

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  constexpr double kSqrtTwoPi = 2.5066282746310005024;
  const double cdf_error = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double step = cdf_error * kSqrtTwoPi * std::exp(0.5 * x * x);
  return x - step / (1.0 + 0.5 * x * step);
}

// Summary of one estimator run. The variance is the plug-in (1/n) variance
// of the gradient samples; the interval is the central-limit interval
// mean +/- z * sqrt(variance / n) at the stated confidence level.
struct EstimateReport {
  double mean = 0.0;
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.0;
  std::int64_t n = 0;
  double wall_time_s = 0.0;
  std::int64_t model_evaluations = 0;
  double efficiency = 0.0;
  std::string estimator;
  std::uint64_t config_fingerprint = 0;
};

inline EstimateReport summarize(const GradientSampleBatch& batch,
                                double confidence = 0.95) {
  if (batch.samples.size() < 2) {
    throw std::invalid_argument(
        "summarize: insufficient data, need at least 2 samples, got " +
        std::to_string(batch.samples.size()));
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence: must lie strictly in (0,1)");
  }

  const std::size_t n = batch.samples.size();

  double low = batch.samples[0];
  double high = batch.samples[0];
  double total = 0.0;
  for (const double sample : batch.samples) {
    total += sample;
    low = std::min(low, sample);
    high = std::max(high, sample);
  }

  EstimateReport report;
  report.confidence = confidence;
  report.n = static_cast<std::int64_t>(n);
  report.wall_time_s = batch.wall_time_s;
  report.model_evaluations = batch.model_evaluations;
  report.estimator = batch.estimator;
  report.config_fingerprint = batch.config_fingerprint;

  if (low == high) {
    // Degenerate batch: constant samples carry zero spread, exactly.
    report.mean = low;
    report.variance = 0.0;
    report.ci_low = low;
    report.ci_high = low;
    return report;
  }

  report.mean = total / static_cast<double>(n);
  double squared_deviation = 0.0;
  for (const double sample : batch.samples) {
    const double deviation = sample - report.mean;
    squared_deviation += deviation * deviation;
  }
  report.variance = squared_deviation / static_cast<double>(n);

  const double z = normal_quantile(0.5 * (1.0 + confidence));
  const double half_width = z * std::sqrt(report.variance / static_cast<double>(n));
  report.ci_low = report.mean - half_width;
  report.ci_high = report.mean + half_width;

  if (report.variance > 0.0 && report.wall_time_s > 0.0) {
    report.efficiency = 1.0 / (report.variance * report.wall_time_s);
  } else {
    report.efficiency = std::numeric_limits<double>::infinity();
  }
  return report;
}

// Head-to-head comparison of two runs of the same experiment.
// normalized_width = ci width * sqrt(wall time) removes the first-order
// effect of spending more time: halving a width by quadrupling the time
// leaves it unchanged.
struct ComparisonVerdict {
  double ci_width_ratio = 0.0;         // width(a) / width(b)
  double efficiency_ratio = 0.0;       // efficiency(a) / efficiency(b)
  double normalized_width_ratio = 0.0; // normalized_width(a) / normalized_width(b)
  bool a_dominates = false;            // strictly smaller normalized width
};

inline ComparisonVerdict compare(const EstimateReport& a,
                                 const EstimateReport& b) {
  if (a.config_fingerprint != b.config_fingerprint) {
    throw std::invalid_argument(
        "compare: reports come from different experiment configurations "
        "(fingerprint mismatch)");
  }
  const double width_a = a.ci_high - a.ci_low;
  const double width_b = b.ci_high - b.ci_low;
  const double normalized_a = width_a * std::sqrt(a.wall_time_s);
  const double normalized_b = width_b * std::sqrt(b.wall_time_s);

  ComparisonVerdict verdict;
  verdict.ci_width_ratio = width_a / width_b;
  verdict.efficiency_ratio = a.efficiency / b.efficiency;
  verdict.normalized_width_ratio = normalized_a / normalized_b;
  verdict.a_dominates = normalized_a < normalized_b;
  return verdict;
}

}  // namespace gradsim

#endif  // GRADSIM_STATS_HPP_
