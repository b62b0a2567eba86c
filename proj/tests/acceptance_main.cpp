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

// Acceptance gate for the library. Each criterion prints one PASS/FAIL line
// with its runtime and a short measurement summary; the exit code is the
// number of failed criteria. Criteria carry individual wall-clock limits so
// a pathologically slow build fails loudly instead of silently degrading.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gradsim/gradsim.hpp"
#include "support/oracles.hpp"

namespace {

using gradsim::Distribution;
using gradsim::EstimateReport;
using gradsim::EstimatorKind;
using gradsim::GradientSampleBatch;
using gradsim::Model;
using gradsim::RunLimit;
using gradsim::RunOptions;
using gradsim::StreamSpec;

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return std::string(buffer);
}

struct CriterionResult {
  bool pass;
  std::string detail;
};

// FNV-1a over the raw bytes of every sample, in replication order.
std::uint64_t hash_samples_into(std::uint64_t hash,
                                const std::vector<double>& samples) {
  for (const double value : samples) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (bits >> (8 * byte)) & 0xffu;
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

std::uint64_t hash_samples(const std::vector<double>& samples) {
  return hash_samples_into(1469598103934665603ULL, samples);
}

// Digests of every fixed-n batch produced by criteria 3 through 7, keyed by
// a stable label; the determinism criterion recomputes and compares them.
std::map<std::string, std::uint64_t>& recorded_digests() {
  static std::map<std::string, std::uint64_t> digests;
  return digests;
}

// Disjoint substream slot per estimator kind under one master seed.
std::uint64_t slot(EstimatorKind kind) {
  return static_cast<std::uint64_t>(kind) << 48;
}

bool contains(const EstimateReport& report, double value) {
  return report.ci_low <= value && value <= report.ci_high;
}

bool overlap(const EstimateReport& a, const EstimateReport& b) {
  return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
}

Model exact_queue() {
  return gradsim::Mm1Model{1, gradsim::Exponential{1.0},
                           gradsim::Exponential{2.0}};
}

Model busy_queue(int n_customers) {
  return gradsim::Mm1Model{n_customers, gradsim::Exponential{1.0},
                           gradsim::Exponential{2.0}};
}

Model bridge() {
  const Distribution arc = gradsim::Exponential{1.0};
  return gradsim::SanBridgeModel{{arc, arc, arc, arc, arc}};
}

// The families whose derivative admits a two-density difference form, at
// the parameter spreads the identity criteria sweep.
std::vector<Distribution> difference_form_families() {
  return {gradsim::Exponential{1.0},  gradsim::Gamma{0.5, 1.0},
          gradsim::Gamma{1.0, 1.0},   gradsim::Gamma{3.0, 1.0},
          gradsim::Gaussian{0.0, 0.5}, gradsim::Gaussian{0.0, 1.0},
          gradsim::Gaussian{0.0, 2.0}};
}

// Criterion 1: the scaled difference of the two derivative-part densities
// must reproduce the parameter derivative of the nominal density.
CriterionResult check_decomposition_identity() {
  double worst = 0.0;
  int points = 0;
  for (const Distribution& family : difference_form_families()) {
    testsupport::R2Sequence grid;
    for (int i = 0; i < 100; ++i) {
      const auto [u1, u2] = grid.next();
      const double theta = 0.3 + 2.7 * u1;
      const Distribution d = with_sensitivity_parameter(family, theta);
      double x;
      if (const gradsim::Gaussian* g = d.get_if<gradsim::Gaussian>()) {
        x = theta + g->stddev * (8.0 * u2 - 4.0);
      } else if (const gradsim::Gamma* g = d.get_if<gradsim::Gamma>()) {
        x = (0.02 + 0.98 * u2) * theta * (g->shape + 4.0 * std::sqrt(g->shape));
      } else {
        x = (0.02 + 0.98 * u2) * 8.0 * theta;
      }
      const gradsim::DecompositionTriple triple = decomposition(d);
      const double closed_form =
          triple.c *
          (density(triple.plus_part, x) - density(triple.minus_part, x));
      const double differenced = testsupport::central_difference(
          [&](double t) {
            return density(with_sensitivity_parameter(family, t), x);
          },
          theta, testsupport::derivative_step(theta));
      worst = std::max(worst, std::fabs(closed_form - differenced));
      ++points;
    }
  }
  if (worst > 1e-6) {
    return {false, fmt("max deviation %.3g exceeds 1e-6", worst)};
  }
  return {true, fmt("max deviation %.2g over %d (theta, x) points", worst,
                    points)};
}

// Criterion 2: the single-run weight equals the log-density score pointwise,
// and the two estimators built on them coincide replication by replication.
CriterionResult check_single_run_identity() {
  const std::vector<Distribution> families = {
      gradsim::Exponential{0.7},   gradsim::Gamma{0.5, 1.3},
      gradsim::Gamma{1.0, 0.8},    gradsim::Gamma{3.0, 0.45},
      gradsim::Gaussian{0.2, 0.5}, gradsim::Gaussian{-1.0, 1.0},
      gradsim::Gaussian{2.0, 2.0}};
  gradsim::UniformStream stream(StreamSpec{202, 0});
  double worst_point = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Distribution& d = families[static_cast<std::size_t>(i) %
                                     families.size()];
    const double x = sample(d, stream);
    worst_point = std::max(
        worst_point, std::fabs(likelihood_ratio_weight(d, x) - score(d, x)));
  }
  if (worst_point > 1e-10) {
    return {false, fmt("pointwise gap %.3g exceeds 1e-10", worst_point)};
  }

  const Model queue = busy_queue(10);
  const GradientSampleBatch a =
      run_estimator(EstimatorKind::kIswd, queue, RunLimit::replications(1000),
                    StreamSpec{202, 0});
  const GradientSampleBatch b =
      run_estimator(EstimatorKind::kScoreFunction, queue,
                    RunLimit::replications(1000), StreamSpec{202, 0});
  double worst_rep = 0.0;
  for (std::size_t r = 0; r < a.samples.size(); ++r) {
    worst_rep = std::max(worst_rep, std::fabs(a.samples[r] - b.samples[r]));
  }
  if (worst_rep > 1e-10) {
    return {false, fmt("per-replication gap %.3g exceeds 1e-10", worst_rep)};
  }
  return {true, fmt("max gap %.2g over 10000 draws, %.2g over 1000 "
                    "shared-stream replications",
                    worst_point, worst_rep)};
}

const EstimatorKind kAllKinds[] = {
    EstimatorKind::kWdClassical, EstimatorKind::kIswd,
    EstimatorKind::kScoreFunction, EstimatorKind::kFiniteDifference};

// Batches behind criterion 3, reused verbatim by the determinism re-run.
std::vector<GradientSampleBatch> exact_gradient_batches() {
  const Model queue = exact_queue();
  std::vector<GradientSampleBatch> batches;
  for (const EstimatorKind kind : kAllKinds) {
    RunOptions options;
    if (kind == EstimatorKind::kFiniteDifference) {
      options.fd_step = gradsim::default_fd_step(queue);
    }
    batches.push_back(run_estimator(kind, queue,
                                    RunLimit::replications(1000000),
                                    StreamSpec{101, slot(kind)}, options));
  }
  return batches;
}

// Criterion 3: a single-customer queue with unit-mean service has gradient
// exactly 1; every estimator's 99% interval at n = 10^6 must contain it.
CriterionResult check_exact_gradient_recovery() {
  double widest = 0.0;
  std::string detail;
  for (const GradientSampleBatch& batch : exact_gradient_batches()) {
    recorded_digests()["c3/" + batch.estimator] = hash_samples(batch.samples);
    const EstimateReport report = summarize(batch, 0.99);
    widest = std::max(widest, report.ci_high - report.ci_low);
    if (!contains(report, 1.0)) {
      detail += fmt("%s 99%% CI [%.5f, %.5f] misses 1; ",
                    batch.estimator.c_str(), report.ci_low, report.ci_high);
    }
  }
  if (!detail.empty()) return {false, detail};
  return {true, fmt("all four 99%% CIs at n=10^6 contain 1 (widest width "
                    "%.4f)",
                    widest)};
}

std::vector<GradientSampleBatch> queue_agreement_batches() {
  const Model queue = busy_queue(5);
  std::vector<GradientSampleBatch> batches;
  for (const EstimatorKind kind : kAllKinds) {
    RunOptions options;
    if (kind == EstimatorKind::kFiniteDifference) options.fd_step = 1e-3;
    batches.push_back(run_estimator(kind, queue,
                                    RunLimit::replications(100000),
                                    StreamSpec{404, slot(kind)}, options));
  }
  batches.push_back(gradsim::finite_difference(
      queue, 1000000, 1e-3, StreamSpec{404, std::uint64_t{4} << 48}));
  return batches;
}

// Shared agreement check: every pair of intervals overlaps and the last
// batch, a long coupled-difference run, acts as the reference value.
CriterionResult check_agreement(std::vector<GradientSampleBatch> batches,
                                const char* digest_prefix) {
  std::vector<EstimateReport> reports;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const bool is_oracle = i + 1 == batches.size();
    recorded_digests()[std::string(digest_prefix) + "/" +
                       (is_oracle ? "oracle" : batches[i].estimator)] =
        hash_samples(batches[i].samples);
    if (!is_oracle) reports.push_back(summarize(batches[i], 0.99));
  }
  const double reference = summarize(batches.back(), 0.99).mean;

  std::string detail;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      if (!overlap(reports[i], reports[j])) {
        detail += fmt("%s and %s 99%% CIs disjoint; ",
                      batches[i].estimator.c_str(),
                      batches[j].estimator.c_str());
      }
    }
    if (!contains(reports[i], reference)) {
      detail += fmt("%s 99%% CI [%.5f, %.5f] misses reference %.5f; ",
                    batches[i].estimator.c_str(), reports[i].ci_low,
                    reports[i].ci_high, reference);
    }
  }
  if (!detail.empty()) return {false, detail};
  return {true, fmt("all CIs pairwise overlap and contain the coupled "
                    "long-run reference %.4f",
                    reference)};
}

CriterionResult check_queue_agreement() {
  return check_agreement(queue_agreement_batches(), "c4");
}

// Criterion 5 sweep: 1000 disjoint-substream batches; returns the rolling
// digest of every sample plus the count of intervals covering 1.
std::pair<std::uint64_t, int> coverage_sweep() {
  const Model queue = exact_queue();
  std::uint64_t digest = 1469598103934665603ULL;
  int covered = 0;
  for (int b = 0; b < 1000; ++b) {
    const GradientSampleBatch batch = gradsim::iswd(
        queue, 10000,
        StreamSpec{505, static_cast<std::uint64_t>(b) * 10000});
    const EstimateReport report = summarize(batch, 0.95);
    if (contains(report, 1.0)) ++covered;
    digest = hash_samples_into(digest, batch.samples);
  }
  return {digest, covered};
}

CriterionResult check_interval_coverage() {
  const auto [digest, covered] = coverage_sweep();
  recorded_digests()["c5/sweep"] = digest;
  if (covered < 930 || covered > 970) {
    return {false, fmt("%d of 1000 95%% CIs cover the true value, outside "
                       "[930, 970]",
                       covered)};
  }
  return {true, fmt("%d of 1000 95%% CIs cover the true value", covered)};
}

std::vector<GradientSampleBatch> work_accounting_batches() {
  const Model queue = busy_queue(100);
  std::vector<GradientSampleBatch> batches;
  batches.push_back(gradsim::wd_classical(queue, 10000, StreamSpec{606, 0}));
  batches.push_back(
      gradsim::iswd(queue, 10000, StreamSpec{606, std::uint64_t{1} << 48}));
  return batches;
}

// Criterion 6: evaluation counts are exact (2N per replication for the
// resimulating estimator, 1 for the single-run one) and the measured
// wall-time gap at N = 100 is at least an order of magnitude.
CriterionResult check_work_accounting() {
  const std::vector<GradientSampleBatch> batches = work_accounting_batches();
  const GradientSampleBatch& wd = batches[0];
  const GradientSampleBatch& is = batches[1];
  recorded_digests()["c6/" + wd.estimator] = hash_samples(wd.samples);
  recorded_digests()["c6/" + is.estimator] = hash_samples(is.samples);

  if (wd.model_evaluations != 2 * 100 * 10000) {
    return {false, fmt("resimulating estimator logged %lld evaluations, "
                       "want 2000000",
                       static_cast<long long>(wd.model_evaluations))};
  }
  if (is.model_evaluations != 10000) {
    return {false, fmt("single-run estimator logged %lld evaluations, want "
                       "10000",
                       static_cast<long long>(is.model_evaluations))};
  }
  const double ratio = wd.wall_time_s / is.wall_time_s;
  if (!(ratio > 10.0)) {
    return {false, fmt("wall-time ratio %.2f does not exceed 10", ratio)};
  }
  return {true, fmt("evaluation counts exact; wall-time ratio %.1f at "
                    "N=100",
                    ratio)};
}

std::vector<GradientSampleBatch> bridge_agreement_batches() {
  const Model network = bridge();
  std::vector<GradientSampleBatch> batches;
  for (const EstimatorKind kind :
       {EstimatorKind::kWdClassical, EstimatorKind::kIswd,
        EstimatorKind::kScoreFunction}) {
    batches.push_back(run_estimator(kind, network,
                                    RunLimit::replications(100000),
                                    StreamSpec{707, slot(kind)}));
  }
  batches.push_back(gradsim::finite_difference(
      network, 1000000, 1e-3, StreamSpec{707, std::uint64_t{4} << 48}));
  return batches;
}

CriterionResult check_bridge_agreement() {
  return check_agreement(bridge_agreement_batches(), "c7");
}

// Criterion 8: rerunning every fixed-n batch above must reproduce each
// sample vector byte for byte.
CriterionResult check_bitwise_reproducibility() {
  const std::map<std::string, std::uint64_t>& first = recorded_digests();
  if (first.empty()) {
    return {false, "no batches were recorded by the earlier criteria"};
  }

  std::map<std::string, std::uint64_t> again;
  for (const GradientSampleBatch& batch : exact_gradient_batches()) {
    again["c3/" + batch.estimator] = hash_samples(batch.samples);
  }
  {
    const std::vector<GradientSampleBatch> batches = queue_agreement_batches();
    for (std::size_t i = 0; i < batches.size(); ++i) {
      again[std::string("c4/") +
            (i + 1 == batches.size() ? "oracle" : batches[i].estimator)] =
          hash_samples(batches[i].samples);
    }
  }
  again["c5/sweep"] = coverage_sweep().first;
  for (const GradientSampleBatch& batch : work_accounting_batches()) {
    again["c6/" + batch.estimator] = hash_samples(batch.samples);
  }
  {
    const std::vector<GradientSampleBatch> batches =
        bridge_agreement_batches();
    for (std::size_t i = 0; i < batches.size(); ++i) {
      again[std::string("c7/") +
            (i + 1 == batches.size() ? "oracle" : batches[i].estimator)] =
          hash_samples(batches[i].samples);
    }
  }

  int matched = 0;
  std::string detail;
  for (const auto& [label, digest] : first) {
    const auto found = again.find(label);
    if (found == again.end()) {
      detail += fmt("%s missing from re-run; ", label.c_str());
    } else if (found->second != digest) {
      detail += fmt("%s digest changed; ", label.c_str());
    } else {
      ++matched;
    }
  }
  if (!detail.empty() || matched == 0) {
    return {false, detail.empty() ? "nothing to compare" : detail};
  }
  return {true, fmt("%d batch digests identical across a full re-run",
                    matched)};
}

struct Criterion {
  const char* id;
  const char* label;
  double time_limit_s;  // 0 = no limit
  std::function<CriterionResult()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"c1", "decomposition-identity", 1.0, check_decomposition_identity},
      {"c2", "single-run-score-identity", 5.0, check_single_run_identity},
      {"c3", "exact-gradient-recovery", 30.0, check_exact_gradient_recovery},
      {"c4", "estimator-agreement-queue", 60.0, check_queue_agreement},
      {"c5", "interval-coverage", 60.0, check_interval_coverage},
      {"c6", "work-accounting", 60.0, check_work_accounting},
      {"c7", "estimator-agreement-network", 30.0, check_bridge_agreement},
      {"c8", "bitwise-reproducibility", 0.0, check_bitwise_reproducibility},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto started = std::chrono::steady_clock::now();
    CriterionResult result{false, ""};
    try {
      result = criterion.run();
    } catch (const std::exception& error) {
      result = {false, fmt("threw: %s", error.what())};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    if (result.pass && criterion.time_limit_s > 0.0 &&
        elapsed >= criterion.time_limit_s) {
      result = {false, fmt("passed checks but took %.2fs, limit %.0fs; %s",
                           elapsed, criterion.time_limit_s,
                           result.detail.c_str())};
    }
    if (!result.pass) ++failures;
    std::printf("%s  %-3s %-28s (%6.2fs)  %s\n",
                result.pass ? "PASS" : "FAIL", criterion.id, criterion.label,
                elapsed, result.detail.c_str());
    std::fflush(stdout);
  }

  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
