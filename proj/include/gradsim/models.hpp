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

#ifndef GRADSIM_MODELS_HPP_
#define GRADSIM_MODELS_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gradsim/distributions.hpp"
#include "gradsim/rng.hpp"

namespace gradsim {

// One realization of a model's random inputs. `service` holds the sensitive
// coordinates (per-customer service times, or per-activity durations for the
// network model); `arrival` holds interarrival times and is empty for models
// without an arrival process. Entries of sampled inputs are strictly
// positive and finite.
struct InputVector {
  std::vector<double> service;
  std::vector<double> arrival;
};

// Copy of `x` with sensitive coordinate `index` (0-based) replaced by
// `value`; every other coordinate is left bitwise identical.
inline InputVector substitute(const InputVector& x, std::size_t index,
                              double value) {
  if (index >= x.service.size()) {
    throw std::out_of_range("substitute: sensitive index " +
                            std::to_string(index) + " out of range [0," +
                            std::to_string(x.service.size()) + ")");
  }
  InputVector result = x;
  result.service[index] = value;
  return result;
}

// Single-server queue observed for a fixed number of customers, starting
// empty. Output is the sojourn time of the last customer.
struct Mm1Model {
  int n_customers;
  Distribution service;       // service time of each customer
  Distribution interarrival;  // gap in front of each customer after the first
};

// Stochastic activity network with the five-arc bridge layout
//
//        1
//   a1 /  \ a4
//     0  a3|  3        arcs: a1 0->1, a2 0->2, a3 1->2, a4 1->3, a5 2->3
//   a2 \  /|a5
//        2
//
// Output is the completion time of the sink: the longest of the paths
// a1-a4, a1-a3-a5, a2-a5. Every arc duration is a sensitive input.
struct SanBridgeModel {
  std::array<Distribution, 5> activity;
};

namespace detail {

struct BridgeArc {
  int from;
  int to;
};

inline constexpr std::array<BridgeArc, 5> kBridgeArcs = {
    BridgeArc{0, 1}, BridgeArc{0, 2}, BridgeArc{1, 2}, BridgeArc{1, 3},
    BridgeArc{2, 3}};

}  // namespace detail

using ModelKind = std::variant<Mm1Model, SanBridgeModel>;

// Validated model. Simulation entry points below take this wrapper, so an
// instance in hand always has coherent parameters.
class Model {
 public:
  Model(Mm1Model m) : kind_(std::move(m)) {
    if (std::get<Mm1Model>(kind_).n_customers < 1) {
      throw std::invalid_argument("mm1 n_customers must be at least 1");
    }
  }
  Model(SanBridgeModel m) : kind_(std::move(m)) {}

  const ModelKind& kind() const { return kind_; }

 private:
  ModelKind kind_;
};

inline std::string_view model_name(const Model& m) {
  return std::holds_alternative<Mm1Model>(m.kind()) ? "mm1" : "san_bridge";
}

// Number of sensitive input coordinates: N customers, or 5 arcs.
inline std::size_t sensitive_count(const Model& m) {
  struct Visitor {
    std::size_t operator()(const Mm1Model& q) const {
      return static_cast<std::size_t>(q.n_customers);
    }
    std::size_t operator()(const SanBridgeModel&) const { return 5; }
  };
  return std::visit(Visitor{}, m.kind());
}

inline const Distribution& sensitive_distribution(const Model& m,
                                                  std::size_t index) {
  if (index >= sensitive_count(m)) {
    throw std::out_of_range("sensitive_distribution: index out of range");
  }
  struct Visitor {
    std::size_t index;
    const Distribution& operator()(const Mm1Model& q) const {
      return q.service;
    }
    const Distribution& operator()(const SanBridgeModel& s) const {
      return s.activity[index];
    }
  };
  return std::visit(Visitor{index}, m.kind());
}

// Deterministic output map Y(x).
//
// mm1: Lindley recursion for sojourn times, T_1 = X_1 and
// T_i = X_i + max(0, T_{i-1} - A_i); the first interarrival slot is carried
// but never read (customer 1 meets an empty queue). Returns T_N.
//
// san_bridge: longest path from source to sink, one relaxation pass over
// the arcs in topological order. Returns the sink completion time.
inline double evaluate(const Model& m, const InputVector& x) {
  struct Visitor {
    const InputVector& x;

    double operator()(const Mm1Model& q) const {
      const std::size_t n = static_cast<std::size_t>(q.n_customers);
      if (x.service.size() != n || x.arrival.size() != n) {
        throw std::invalid_argument(
            "evaluate: mm1 expects " + std::to_string(n) +
            " service and interarrival entries, got " +
            std::to_string(x.service.size()) + "/" +
            std::to_string(x.arrival.size()));
      }
      double sojourn = x.service[0];
      for (std::size_t i = 1; i < n; ++i) {
        sojourn = x.service[i] + std::max(0.0, sojourn - x.arrival[i]);
      }
      return sojourn;
    }

    double operator()(const SanBridgeModel&) const {
      if (x.service.size() != 5 || !x.arrival.empty()) {
        throw std::invalid_argument(
            "evaluate: san_bridge expects 5 activity durations and no "
            "arrival entries");
      }
      std::array<double, 4> completion;
      completion.fill(-std::numeric_limits<double>::infinity());
      completion[0] = 0.0;
      for (std::size_t i = 0; i < detail::kBridgeArcs.size(); ++i) {
        const auto arc = detail::kBridgeArcs[i];
        completion[arc.to] = std::max(completion[arc.to],
                                      completion[arc.from] + x.service[i]);
      }
      return completion[3];
    }
  };
  return std::visit(Visitor{x}, m.kind());
}

// Draws a full input realization. Consumption order is fixed: all sensitive
// coordinates in index order, then all interarrival times (mm1 only), so a
// replication is reproducible from its stream spec alone.
inline InputVector sample_input(const Model& m, UniformStream& stream) {
  struct Visitor {
    UniformStream& stream;

    InputVector operator()(const Mm1Model& q) const {
      const std::size_t n = static_cast<std::size_t>(q.n_customers);
      InputVector x;
      x.service.reserve(n);
      x.arrival.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        x.service.push_back(sample(q.service, stream));
      for (std::size_t i = 0; i < n; ++i)
        x.arrival.push_back(sample(q.interarrival, stream));
      return x;
    }

    InputVector operator()(const SanBridgeModel& s) const {
      InputVector x;
      x.service.reserve(s.activity.size());
      for (const Distribution& activity : s.activity)
        x.service.push_back(sample(activity, stream));
      return x;
    }
  };
  return std::visit(Visitor{stream}, m.kind());
}

// Value of the shared sensitivity parameter theta (taken from the first
// sensitive coordinate's distribution).
inline double sensitivity_parameter_value(const Model& m) {
  return sensitivity_parameter(sensitive_distribution(m, 0));
}

// Copy of the model with theta shifted to theta + delta in every sensitive
// coordinate's distribution. Non-sensitive inputs (mm1 arrivals) are kept.
inline Model with_sensitivity_shift(const Model& m, double delta) {
  struct Visitor {
    double delta;

    Model operator()(const Mm1Model& q) const {
      Mm1Model shifted = q;
      shifted.service = with_sensitivity_parameter(
          q.service, sensitivity_parameter(q.service) + delta);
      return Model(shifted);
    }

    Model operator()(const SanBridgeModel& s) const {
      SanBridgeModel shifted = s;
      for (Distribution& activity : shifted.activity) {
        activity = with_sensitivity_parameter(
            activity, sensitivity_parameter(activity) + delta);
      }
      return Model(shifted);
    }
  };
  return std::visit(Visitor{delta}, m.kind());
}

// Canonical one-line form used for run fingerprints and config echo.
inline std::string describe(const Model& m) {
  struct Visitor {
    std::string operator()(const Mm1Model& q) const {
      return "mm1{n_customers=" + std::to_string(q.n_customers) +
             ",service=" + describe(q.service) +
             ",interarrival=" + describe(q.interarrival) + "}";
    }
    std::string operator()(const SanBridgeModel& s) const {
      std::string text = "san_bridge{";
      for (std::size_t i = 0; i < s.activity.size(); ++i) {
        if (i > 0) text += ',';
        text += "a" + std::to_string(i + 1) + "=" + describe(s.activity[i]);
      }
      return text + "}";
    }
  };
  return std::visit(Visitor{}, m.kind());
}

}  // namespace gradsim

#endif  // GRADSIM_MODELS_HPP_
