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

#ifndef GRADSIM_ESTIMATORS_HPP_
#define GRADSIM_ESTIMATORS_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "gradsim/distributions.hpp"
#include "gradsim/models.hpp"
#include "gradsim/rng.hpp"

namespace gradsim {

// Estimators of d E[Y(X; theta)] / d theta.
//
//   kWdClassical      two-sided weak-derivative resampling: per replication,
//                     one base input vector and, for each sensitive
//                     coordinate, a fresh plus/minus pair of output
//                     evaluations (2 * sensitive_count evaluations).
//   kIswd             single-run weak derivative: one output evaluation,
//                     reweighted by the summed likelihood_ratio_weight of
//                     the realized sensitive coordinates.
//   kScoreFunction    single-run likelihood-ratio form using score();
//                     pointwise identical to kIswd up to rounding.
//   kFiniteDifference central difference of two coupled runs at
//                     theta +/- step driven by common random numbers
//                     (two evaluations).
enum class EstimatorKind { kWdClassical, kIswd, kScoreFunction, kFiniteDifference };

inline std::string_view estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kWdClassical: return "wd";
    case EstimatorKind::kIswd: return "iswd";
    case EstimatorKind::kScoreFunction: return "sf";
    case EstimatorKind::kFiniteDifference: return "fd";
  }
  throw std::logic_error("estimator_name: unknown kind");
}

inline EstimatorKind parse_estimator_name(std::string_view name) {
  if (name == "wd") return EstimatorKind::kWdClassical;
  if (name == "iswd") return EstimatorKind::kIswd;
  if (name == "sf") return EstimatorKind::kScoreFunction;
  if (name == "fd") return EstimatorKind::kFiniteDifference;
  throw std::invalid_argument("estimator: unknown name '" + std::string(name) +
                              "' (expected wd, iswd, sf, or fd)");
}

// Stopping rule: either an exact replication count or a wall-clock budget.
// Budget runs stop at the first check past the budget, never before two
// replications (a variance needs at least two samples).
class RunLimit {
 public:
  static RunLimit replications(std::int64_t n) {
    if (n < 1) {
      throw std::invalid_argument("n: replication count must be at least 1");
    }
    RunLimit limit;
    limit.n_ = n;
    return limit;
  }

  static RunLimit time_budget(double seconds) {
    if (!(seconds > 0)) {
      throw std::invalid_argument("time_budget_s: budget must be positive");
    }
    RunLimit limit;
    limit.budget_s_ = seconds;
    return limit;
  }

  bool fixed() const { return n_ > 0; }
  std::int64_t n() const { return n_; }
  double budget_s() const { return budget_s_; }

  std::string describe() const {
    return fixed() ? "n=" + std::to_string(n_)
                   : "budget_s=" + detail::format_double(budget_s_);
  }

 private:
  RunLimit() = default;

  std::int64_t n_ = 0;
  double budget_s_ = 0.0;
};

struct RunOptions {
  double fd_step = 0.0;  // must be positive for kFiniteDifference
  int threads = 1;       // fixed-count runs may fan replications out
};

// One estimator run: per-replication gradient samples plus bookkeeping.
struct GradientSampleBatch {
  std::vector<double> samples;
  std::int64_t n = 0;
  double wall_time_s = 0.0;
  std::int64_t model_evaluations = 0;
  std::string estimator;
  std::uint64_t config_fingerprint = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

// Hash of everything two batches must share to be statistically comparable:
// the model (with its parameters), the stopping rule, and the master seed.
// The estimator itself and its step size are deliberately excluded.
inline std::uint64_t run_fingerprint(const Model& model, const RunLimit& limit,
                                     std::uint64_t master_seed) {
  return fnv1a64(describe(model) + "|" + limit.describe() +
                 "|seed=" + std::to_string(master_seed));
}

// Per-run immutable state shared by all replications.
struct EstimatorContext {
  EstimatorKind kind;
  const Model* model = nullptr;
  std::vector<DecompositionTriple> triples;  // kWdClassical
  std::optional<Model> plus_model;           // kFiniteDifference
  std::optional<Model> minus_model;
  double fd_step = 0.0;
};

inline EstimatorContext make_context(EstimatorKind kind, const Model& model,
                                     const RunOptions& options) {
  EstimatorContext ctx;
  ctx.kind = kind;
  ctx.model = &model;
  if (kind == EstimatorKind::kWdClassical) {
    const std::size_t count = sensitive_count(model);
    ctx.triples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      ctx.triples.push_back(decomposition(sensitive_distribution(model, i)));
    }
  } else if (kind == EstimatorKind::kFiniteDifference) {
    if (!(options.fd_step > 0)) {
      throw std::invalid_argument(
          "fd_step: finite-difference step must be positive");
    }
    ctx.fd_step = options.fd_step;
    ctx.plus_model = with_sensitivity_shift(model, options.fd_step);
    ctx.minus_model = with_sensitivity_shift(model, -options.fd_step);
  }
  return ctx;
}

// Runs one replication on its own substream and returns the gradient sample.
inline double replicate(const EstimatorContext& ctx, UniformStream& stream,
                        std::int64_t& evaluations) {
  switch (ctx.kind) {
    case EstimatorKind::kWdClassical: {
      const InputVector base = sample_input(*ctx.model, stream);
      double total = 0.0;
      for (std::size_t i = 0; i < ctx.triples.size(); ++i) {
        const DecompositionTriple& triple = ctx.triples[i];
        const double plus_draw = sample(triple.plus_part, stream);
        const double minus_draw = sample(triple.minus_part, stream);
        const double y_plus =
            evaluate(*ctx.model, substitute(base, i, plus_draw));
        const double y_minus =
            evaluate(*ctx.model, substitute(base, i, minus_draw));
        total += triple.c * (y_plus - y_minus);
      }
      evaluations += 2 * static_cast<std::int64_t>(ctx.triples.size());
      return total;
    }

    case EstimatorKind::kIswd: {
      const InputVector x = sample_input(*ctx.model, stream);
      const double output = evaluate(*ctx.model, x);
      ++evaluations;
      double weight = 0.0;
      for (std::size_t i = 0; i < x.service.size(); ++i) {
        weight += likelihood_ratio_weight(sensitive_distribution(*ctx.model, i),
                                          x.service[i]);
      }
      return output * weight;
    }

    case EstimatorKind::kScoreFunction: {
      const InputVector x = sample_input(*ctx.model, stream);
      const double output = evaluate(*ctx.model, x);
      ++evaluations;
      double total_score = 0.0;
      for (std::size_t i = 0; i < x.service.size(); ++i) {
        total_score +=
            score(sensitive_distribution(*ctx.model, i), x.service[i]);
      }
      return output * total_score;
    }

    case EstimatorKind::kFiniteDifference: {
      UniformStream minus_stream = stream;  // same substream position: CRN
      const InputVector x_plus = sample_input(*ctx.plus_model, stream);
      const InputVector x_minus = sample_input(*ctx.minus_model, minus_stream);
      const double y_plus = evaluate(*ctx.plus_model, x_plus);
      const double y_minus = evaluate(*ctx.minus_model, x_minus);
      evaluations += 2;
      return (y_plus - y_minus) / (2.0 * ctx.fd_step);
    }
  }
  throw std::logic_error("replicate: unknown estimator kind");
}

}  // namespace detail

// Runs `kind` on `model` until `limit` is met. Replication r draws from
// substream streams.substream_index + r of streams.master_seed, so results
// do not depend on thread count and a caller scheduling several runs under
// one master seed must hand each a disjoint substream range.
inline GradientSampleBatch run_estimator(EstimatorKind kind, const Model& model,
                                         const RunLimit& limit,
                                         StreamSpec streams,
                                         const RunOptions& options = {}) {
  if (options.threads < 1) {
    throw std::invalid_argument("threads: must be at least 1");
  }
  const detail::EstimatorContext ctx = detail::make_context(kind, model, options);

  GradientSampleBatch batch;
  batch.estimator = std::string(estimator_name(kind));
  batch.config_fingerprint =
      detail::run_fingerprint(model, limit, streams.master_seed);

  const auto substream_for = [&streams](std::int64_t r) {
    return StreamSpec{streams.master_seed,
                      streams.substream_index + static_cast<std::uint64_t>(r)};
  };

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed_s = [&started]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  if (limit.fixed()) {
    const std::int64_t n = limit.n();
    batch.samples.resize(static_cast<std::size_t>(n));
    const int threads =
        static_cast<int>(std::min<std::int64_t>(options.threads, n));
    if (threads <= 1) {
      for (std::int64_t r = 0; r < n; ++r) {
        UniformStream stream(substream_for(r));
        batch.samples[static_cast<std::size_t>(r)] =
            detail::replicate(ctx, stream, batch.model_evaluations);
      }
    } else {
      std::vector<std::thread> workers;
      std::vector<std::int64_t> worker_evaluations(
          static_cast<std::size_t>(threads), 0);
      const std::int64_t chunk = (n + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min<std::int64_t>(n, begin + chunk);
        workers.emplace_back([&, t, begin, end]() {
          for (std::int64_t r = begin; r < end; ++r) {
            UniformStream stream(substream_for(r));
            batch.samples[static_cast<std::size_t>(r)] = detail::replicate(
                ctx, stream, worker_evaluations[static_cast<std::size_t>(t)]);
          }
        });
      }
      for (std::thread& worker : workers) worker.join();
      for (const std::int64_t count : worker_evaluations) {
        batch.model_evaluations += count;
      }
    }
  } else {
    // Budget mode is single-threaded so the replication sequence (and thus
    // sample r's value) is reproducible; only the count varies with load.
    std::int64_t r = 0;
    for (;;) {
      UniformStream stream(substream_for(r));
      batch.samples.push_back(
          detail::replicate(ctx, stream, batch.model_evaluations));
      ++r;
      if (r >= 2 && elapsed_s() >= limit.budget_s()) break;
    }
  }

  batch.wall_time_s = elapsed_s();
  batch.n = static_cast<std::int64_t>(batch.samples.size());
  return batch;
}

inline GradientSampleBatch wd_classical(const Model& model, std::int64_t n,
                                        StreamSpec streams,
                                        const RunOptions& options = {}) {
  return run_estimator(EstimatorKind::kWdClassical, model,
                       RunLimit::replications(n), streams, options);
}

inline GradientSampleBatch iswd(const Model& model, std::int64_t n,
                                StreamSpec streams,
                                const RunOptions& options = {}) {
  return run_estimator(EstimatorKind::kIswd, model, RunLimit::replications(n),
                       streams, options);
}

inline GradientSampleBatch score_function(const Model& model, std::int64_t n,
                                          StreamSpec streams,
                                          const RunOptions& options = {}) {
  return run_estimator(EstimatorKind::kScoreFunction, model,
                       RunLimit::replications(n), streams, options);
}

inline GradientSampleBatch finite_difference(const Model& model,
                                             std::int64_t n, double step,
                                             StreamSpec streams,
                                             RunOptions options = {}) {
  options.fd_step = step;
  return run_estimator(EstimatorKind::kFiniteDifference, model,
                       RunLimit::replications(n), streams, options);
}

// Default central-difference step when none is configured.
inline double default_fd_step(const Model& model) {
  const double theta = sensitivity_parameter_value(model);
  return 1e-3 * std::max(1.0, theta);
}

}  // namespace gradsim

#endif  // GRADSIM_ESTIMATORS_HPP_
