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

#ifndef GRADSIM_EXPERIMENT_HPP_
#define GRADSIM_EXPERIMENT_HPP_

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "gradsim/estimators.hpp"
#include "gradsim/models.hpp"
#include "gradsim/stats.hpp"

namespace gradsim {

// Declarative description of one experiment: a model, one or more
// estimators, a stopping rule, and output disposition. Optional fields fall
// back to documented defaults when the model needs them; setting a field
// that the chosen model does not have is a validation error.
struct ExperimentConfig {
  std::string model = "mm1";
  std::optional<int> n_customers;        // mm1 only, default 1
  std::optional<double> service_mean;    // default 1.0 (exponential)
  std::optional<double> arrival_mean;    // mm1 only, default 2.0 (exponential)
  std::optional<std::string> service_dist;  // family{...} syntax, overrides
  std::optional<std::string> arrival_dist;  // service_mean / arrival_mean
  std::vector<std::string> estimators;   // of "wd", "iswd", "sf", "fd"
  std::optional<std::int64_t> n;         // exactly one of n /
  std::optional<double> time_budget_s;   // time_budget_s must be set
  std::uint64_t seed = 0;
  double confidence = 0.95;
  std::optional<double> fd_step;
  std::string out;                       // output path; empty keeps stdout
  std::string format = "csv";            // "csv" or "json"
};

namespace detail {

inline std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  return text;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find(',', begin);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = trim(text.substr(begin, end - begin));
    if (!item.empty()) items.emplace_back(item);
    begin = end + 1;
  }
  return items;
}

inline double parse_number(std::string_view text, const std::string& context) {
  const std::string holder(trim(text));
  char* end = nullptr;
  const double value = std::strtod(holder.c_str(), &end);
  if (holder.empty() || end != holder.c_str() + holder.size()) {
    throw std::invalid_argument(context + ": expected a number, got '" +
                                holder + "'");
  }
  return value;
}

}  // namespace detail

// Parses the one-line distribution syntax accepted in configs:
//   exponential{mean=2}  gamma{shape=3,scale=0.5}  gaussian{mean=0,stddev=1}
// Whitespace around tokens is ignored. Unknown families, unknown or
// duplicate parameters, and malformed numbers are rejected.
inline Distribution parse_distribution(std::string_view text) {
  const std::string_view whole = detail::trim(text);
  const std::size_t open = whole.find('{');
  if (open == std::string_view::npos || whole.empty() || whole.back() != '}') {
    throw std::invalid_argument(
        "distribution: expected family{key=value,...}, got '" +
        std::string(whole) + "'");
  }
  const std::string family(detail::trim(whole.substr(0, open)));
  const std::string_view body = whole.substr(open + 1, whole.size() - open - 2);

  std::map<std::string, double> params;
  for (const std::string& piece : detail::split_list(body)) {
    const std::size_t eq = piece.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("distribution '" + family +
                                  "': expected key=value, got '" + piece + "'");
    }
    const std::string key(detail::trim(std::string_view(piece).substr(0, eq)));
    const double value = detail::parse_number(
        std::string_view(piece).substr(eq + 1), "distribution '" + family +
                                                    "' parameter '" + key + "'");
    if (!params.emplace(key, value).second) {
      throw std::invalid_argument("distribution '" + family +
                                  "': duplicate parameter '" + key + "'");
    }
  }

  const auto take = [&params, &family](const char* key) {
    const auto found = params.find(key);
    if (found == params.end()) {
      throw std::invalid_argument("distribution '" + family +
                                  "': missing parameter '" + key + "'");
    }
    const double value = found->second;
    params.erase(found);
    return value;
  };
  const auto finish = [&params, &family]() {
    if (!params.empty()) {
      throw std::invalid_argument("distribution '" + family +
                                  "': unexpected parameter '" +
                                  params.begin()->first + "'");
    }
  };

  if (family == "exponential") {
    const double mean = take("mean");
    finish();
    return Exponential{mean};
  }
  if (family == "gamma") {
    const double shape = take("shape");
    const double scale = take("scale");
    finish();
    return Gamma{shape, scale};
  }
  if (family == "gaussian") {
    const double mean = take("mean");
    const double stddev = take("stddev");
    finish();
    return Gaussian{mean, stddev};
  }
  throw std::invalid_argument(
      "distribution: unknown family '" + family +
      "' (expected exponential, gamma, or gaussian)");
}

// Fully validated, executable form of a config. Construction is the
// validation pass: every violated constraint throws std::invalid_argument
// whose message starts with the offending field name.
struct ExperimentPlan {
  Model model;
  RunLimit limit;
  RunOptions options;
  std::vector<EstimatorKind> estimators;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& field,
                                      const std::string& message) {
  throw std::invalid_argument(field + ": " + message);
}

inline Distribution input_distribution(
    const std::string& field_dist, const std::optional<std::string>& dist_text,
    const std::string& field_mean, const std::optional<double>& mean,
    double default_mean) {
  if (dist_text && mean) {
    config_error(field_mean, "conflicts with " + field_dist);
  }
  if (dist_text) {
    Distribution parsed = [&]() {
      try {
        return parse_distribution(*dist_text);
      } catch (const std::invalid_argument& error) {
        config_error(field_dist, error.what());
      }
    }();
    if (parsed.get_if<Gaussian>()) {
      config_error(field_dist,
                   "gaussian is not a valid model input (durations must be "
                   "positive); use exponential or gamma");
    }
    return parsed;
  }
  const double resolved = mean.value_or(default_mean);
  if (!(resolved > 0)) config_error(field_mean, "must be positive");
  return Exponential{resolved};
}

}  // namespace detail

inline ExperimentPlan make_plan(const ExperimentConfig& config) {
  using detail::config_error;

  const Distribution service = detail::input_distribution(
      "service_dist", config.service_dist, "service_mean", config.service_mean,
      1.0);

  std::optional<Model> model;
  if (config.model == "mm1") {
    const int n_customers = config.n_customers.value_or(1);
    if (n_customers < 1) config_error("n_customers", "must be at least 1");
    const Distribution interarrival = detail::input_distribution(
        "arrival_dist", config.arrival_dist, "arrival_mean",
        config.arrival_mean, 2.0);
    model = Model(Mm1Model{n_customers, service, interarrival});
  } else if (config.model == "san_bridge") {
    if (config.n_customers) {
      config_error("n_customers", "not a san_bridge field");
    }
    if (config.arrival_mean) {
      config_error("arrival_mean", "not a san_bridge field");
    }
    if (config.arrival_dist) {
      config_error("arrival_dist", "not a san_bridge field");
    }
    model = Model(
        SanBridgeModel{{service, service, service, service, service}});
  } else {
    config_error("model",
                 "unknown model '" + config.model +
                     "' (expected mm1 or san_bridge)");
  }

  if (config.estimators.empty()) {
    config_error("estimator", "at least one estimator is required");
  }
  std::vector<EstimatorKind> kinds;
  for (const std::string& name : config.estimators) {
    EstimatorKind kind = [&]() {
      try {
        return parse_estimator_name(name);
      } catch (const std::invalid_argument& error) {
        config_error("estimator", error.what());
      }
    }();
    for (const EstimatorKind existing : kinds) {
      if (existing == kind) config_error("estimator", "duplicate '" + name + "'");
    }
    kinds.push_back(kind);
  }

  if (config.n && config.time_budget_s) {
    config_error("n", "exactly one of n and time_budget_s may be set");
  }
  if (!config.n && !config.time_budget_s) {
    config_error("n", "one of n and time_budget_s is required");
  }
  std::optional<RunLimit> limit;
  if (config.n) {
    if (*config.n < 1) config_error("n", "must be at least 1");
    limit = RunLimit::replications(*config.n);
  } else {
    if (!(*config.time_budget_s > 0)) {
      config_error("time_budget_s", "must be positive");
    }
    limit = RunLimit::time_budget(*config.time_budget_s);
  }

  if (!(config.confidence > 0 && config.confidence < 1)) {
    config_error("confidence", "must lie strictly in (0,1)");
  }
  if (config.fd_step && !(*config.fd_step > 0)) {
    config_error("fd_step", "must be positive");
  }
  if (config.format != "csv" && config.format != "json") {
    config_error("format", "expected 'csv' or 'json'");
  }

  RunOptions options;
  options.fd_step = config.fd_step.value_or(default_fd_step(*model));
  return ExperimentPlan{std::move(*model), *limit, options, std::move(kinds)};
}

// Resolved-config echo embedded in every output, so a result file is
// self-describing and replayable.
inline nlohmann::json config_echo(const ExperimentConfig& config,
                                  const ExperimentPlan& plan) {
  nlohmann::json echo;
  echo["model"] = config.model;
  if (const Mm1Model* queue = std::get_if<Mm1Model>(&plan.model.kind())) {
    echo["n_customers"] = queue->n_customers;
    echo["service_dist"] = describe(queue->service);
    echo["arrival_dist"] = describe(queue->interarrival);
  } else {
    const SanBridgeModel& san = std::get<SanBridgeModel>(plan.model.kind());
    echo["service_dist"] = describe(san.activity[0]);
  }
  std::string estimators;
  for (const EstimatorKind kind : plan.estimators) {
    if (!estimators.empty()) estimators += ',';
    estimators += estimator_name(kind);
  }
  echo["estimator"] = estimators;
  if (plan.limit.fixed()) {
    echo["n"] = plan.limit.n();
  } else {
    echo["time_budget_s"] = plan.limit.budget_s();
  }
  echo["seed"] = config.seed;
  echo["confidence"] = config.confidence;
  for (const EstimatorKind kind : plan.estimators) {
    if (kind == EstimatorKind::kFiniteDifference) {
      echo["fd_step"] = plan.options.fd_step;
      break;
    }
  }
  echo["format"] = config.format;
  return echo;
}

namespace detail {

inline nlohmann::json report_row_json(const EstimateReport& report,
                                      const ExperimentPlan& plan) {
  nlohmann::json row;
  row["estimator"] = report.estimator;
  row["model"] = std::string(model_name(plan.model));
  row["N"] = sensitive_count(plan.model);
  row["theta"] = sensitivity_parameter_value(plan.model);
  row["n"] = report.n;
  row["mean"] = report.mean;
  row["variance"] = report.variance;
  row["ci_low"] = report.ci_low;
  row["ci_high"] = report.ci_high;
  row["wall_time_s"] = report.wall_time_s;
  row["model_evals"] = report.model_evaluations;
  row["efficiency"] = report.efficiency;
  return row;
}

}  // namespace detail

inline std::string render_csv(const ExperimentConfig& config,
                              const ExperimentPlan& plan,
                              const std::vector<EstimateReport>& reports) {
  using detail::format_double;
  std::string text = "# config " + config_echo(config, plan).dump() + "\n";
  text +=
      "estimator,model,N,theta,n,mean,variance,ci_low,ci_high,wall_time_s,"
      "model_evals,efficiency\n";
  for (const EstimateReport& report : reports) {
    text += report.estimator;
    text += ',';
    text += model_name(plan.model);
    text += ',';
    text += std::to_string(sensitive_count(plan.model));
    text += ',';
    text += format_double(sensitivity_parameter_value(plan.model));
    text += ',';
    text += std::to_string(report.n);
    text += ',';
    text += format_double(report.mean);
    text += ',';
    text += format_double(report.variance);
    text += ',';
    text += format_double(report.ci_low);
    text += ',';
    text += format_double(report.ci_high);
    text += ',';
    text += format_double(report.wall_time_s);
    text += ',';
    text += std::to_string(report.model_evaluations);
    text += ',';
    text += format_double(report.efficiency);
    text += '\n';
  }
  return text;
}

inline std::string render_json(const ExperimentConfig& config,
                               const ExperimentPlan& plan,
                               const std::vector<EstimateReport>& reports) {
  nlohmann::json document;
  document["config"] = config_echo(config, plan);
  document["results"] = nlohmann::json::array();
  for (const EstimateReport& report : reports) {
    document["results"].push_back(detail::report_row_json(report, plan));
  }
  return document.dump(2) + "\n";
}

// Writes via a temporary file in the same directory plus rename, so readers
// of `path` see either the old content or the new content, never a torn mix.
inline void write_file_atomic(const std::string& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path temporary(target);
  temporary += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("out: cannot open '" + temporary.string() +
                               "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      throw std::runtime_error("out: write to '" + temporary.string() +
                               "' failed");
    }
  }
  fs::rename(temporary, target);
}

struct ExperimentResult {
  std::vector<EstimateReport> reports;
  std::string rendered;  // config echo + per-estimator rows, in config.format
};

// Validates, runs every configured estimator on the model, and renders the
// result. Estimator cells own disjoint substream ranges by list position
// (spaced 2^48 apart), so cells within one run never share randomness,
// while single-estimator runs under one seed all start at substream 0 and
// are therefore coupled replication-for-replication across estimator
// choices (common random numbers for cross-run comparisons). When
// config.out is set the rendered text is also written there atomically.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  const ExperimentPlan plan = make_plan(config);
  constexpr std::uint64_t kCellStride = 1ULL << 48;

  ExperimentResult result;
  for (std::size_t cell = 0; cell < plan.estimators.size(); ++cell) {
    const EstimatorKind kind = plan.estimators[cell];
    const StreamSpec streams{config.seed, cell * kCellStride};
    const GradientSampleBatch batch =
        run_estimator(kind, plan.model, plan.limit, streams, plan.options);
    result.reports.push_back(summarize(batch, config.confidence));
  }

  result.rendered = config.format == "json"
                        ? render_json(config, plan, result.reports)
                        : render_csv(config, plan, result.reports);
  if (!config.out.empty()) {
    write_file_atomic(config.out, result.rendered);
  }
  return result;
}

// Loads an ExperimentConfig from a JSON file using the same field names as
// the command-line flags. Unknown fields are rejected.
inline ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  nlohmann::json document;
  try {
    in >> document;
  } catch (const nlohmann::json::exception& error) {
    throw std::invalid_argument("config: '" + path +
                                "' is not valid JSON: " + error.what());
  }
  if (!document.is_object()) {
    throw std::invalid_argument("config: '" + path +
                                "' must hold a JSON object");
  }

  ExperimentConfig config;
  for (const auto& [key, value] : document.items()) {
    try {
      if (key == "model") {
        config.model = value.get<std::string>();
      } else if (key == "n_customers") {
        config.n_customers = value.get<int>();
      } else if (key == "service_mean") {
        config.service_mean = value.get<double>();
      } else if (key == "arrival_mean") {
        config.arrival_mean = value.get<double>();
      } else if (key == "service_dist") {
        config.service_dist = value.get<std::string>();
      } else if (key == "arrival_dist") {
        config.arrival_dist = value.get<std::string>();
      } else if (key == "estimator") {
        if (value.is_array()) {
          for (const auto& item : value) {
            config.estimators.push_back(item.get<std::string>());
          }
        } else {
          config.estimators = detail::split_list(value.get<std::string>());
        }
      } else if (key == "n") {
        config.n = value.get<std::int64_t>();
      } else if (key == "time_budget_s") {
        config.time_budget_s = value.get<double>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "confidence") {
        config.confidence = value.get<double>();
      } else if (key == "fd_step") {
        config.fd_step = value.get<double>();
      } else if (key == "out") {
        config.out = value.get<std::string>();
      } else if (key == "format") {
        config.format = value.get<std::string>();
      } else {
        throw std::invalid_argument("config: unknown field '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config: field '" + key +
                                  "' has the wrong type");
    }
  }
  return config;
}

}  // namespace gradsim

#endif  // GRADSIM_EXPERIMENT_HPP_
