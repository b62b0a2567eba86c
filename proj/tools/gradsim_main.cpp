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

// Command-line front end: `gradsim run` simulates gradient estimators on a
// configured model and emits one summary row per estimator.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gradsim/gradsim.hpp"

namespace {

struct CliValues {
  std::string config_path;
  std::string model;
  int n_customers = 0;
  double service_mean = 0.0;
  double arrival_mean = 0.0;
  std::string service_dist;
  std::string arrival_dist;
  std::string estimator;
  std::int64_t n = 0;
  double time_budget_s = 0.0;
  std::uint64_t seed = 0;
  double confidence = 0.0;
  double fd_step = 0.0;
  std::string out;
  std::string format;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-based gradient estimation for stochastic networks"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand(
      "run", "Run configured gradient estimators and report summaries");
  CliValues values;

  run->add_option("--config", values.config_path,
                  "JSON config file; explicit flags override its fields");
  CLI::Option* model =
      run->add_option("--model", values.model, "Model: mm1 or san_bridge");
  CLI::Option* n_customers = run->add_option(
      "--n-customers", values.n_customers,
      "Customers observed by the mm1 model (default 1)");
  CLI::Option* service_mean = run->add_option(
      "--service-mean", values.service_mean,
      "Mean of the exponential service/activity time, the parameter "
      "gradients are taken against (default 1)");
  CLI::Option* arrival_mean = run->add_option(
      "--arrival-mean", values.arrival_mean,
      "Mean of the exponential interarrival time for mm1 (default 2)");
  CLI::Option* service_dist = run->add_option(
      "--service-dist", values.service_dist,
      "Service/activity distribution, e.g. 'gamma{shape=2,scale=0.5}'");
  CLI::Option* arrival_dist = run->add_option(
      "--arrival-dist", values.arrival_dist,
      "Interarrival distribution for mm1, same syntax as --service-dist");
  CLI::Option* estimator = run->add_option(
      "--estimator", values.estimator,
      "Comma-separated estimators to run: wd, iswd, sf, fd");
  CLI::Option* n = run->add_option(
      "--n", values.n, "Replication count (exclusive with --time-budget-s)");
  CLI::Option* time_budget = run->add_option(
      "--time-budget-s", values.time_budget_s,
      "Wall-clock budget per estimator in seconds (exclusive with --n)");
  CLI::Option* seed =
      run->add_option("--seed", values.seed, "Master seed (default 0)");
  CLI::Option* confidence = run->add_option(
      "--confidence", values.confidence,
      "Confidence level of the reported intervals (default 0.95)");
  CLI::Option* fd_step = run->add_option(
      "--fd-step", values.fd_step,
      "Central-difference step for fd (default 1e-3 * max(1, theta))");
  CLI::Option* out = run->add_option(
      "--out", values.out, "Output file path (default: print to stdout)");
  CLI::Option* format = run->add_option("--format", values.format,
                                        "Output format: csv or json");

  CLI11_PARSE(app, argc, argv);

  try {
    gradsim::ExperimentConfig config;
    if (!values.config_path.empty()) {
      config = gradsim::config_from_json_file(values.config_path);
    }
    if (*model) config.model = values.model;
    if (*n_customers) config.n_customers = values.n_customers;
    if (*service_mean) config.service_mean = values.service_mean;
    if (*arrival_mean) config.arrival_mean = values.arrival_mean;
    if (*service_dist) config.service_dist = values.service_dist;
    if (*arrival_dist) config.arrival_dist = values.arrival_dist;
    if (*estimator) {
      config.estimators = gradsim::detail::split_list(values.estimator);
    }
    if (*n) config.n = values.n;
    if (*time_budget) config.time_budget_s = values.time_budget_s;
    if (*seed) config.seed = values.seed;
    if (*confidence) config.confidence = values.confidence;
    if (*fd_step) config.fd_step = values.fd_step;
    if (*out) config.out = values.out;
    if (*format) config.format = values.format;

    const gradsim::ExperimentResult result = gradsim::run_experiment(config);
    if (config.out.empty()) {
      std::fputs(result.rendered.c_str(), stdout);
    }
    return 0;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}
