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

#ifndef GRADSIM_DISTRIBUTIONS_HPP_
#define GRADSIM_DISTRIBUTIONS_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "gradsim/rng.hpp"

namespace gradsim {

// Requested operation exists in the interface but not for this family.
class not_implemented_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Evaluation point lies outside the support of the density involved.
class support_violation_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input families. Each family designates one sensitivity parameter (the one
// gradients are taken with respect to):
//   exponential        f(x) = (1/m) exp(-x/m), x >= 0          parameter: mean m
//   gamma              f(x) = x^(a-1) exp(-x/s) / (Gamma(a) s^a)  parameter: scale s
//   gaussian           N(mu, sigma^2)                          parameter: mean mu
//   erlang             gamma with integer shape k              parameter: scale s
//   weibull2           f(x) = 2 r x exp(-r x^2), x >= 0        parameter: rate r
//   shifted_weibull2   c + d*W with W ~ weibull2(r), d = +/-1  (no parameter)
// weibull2 is the shape-2 Weibull; shifted_weibull2 exists only as the
// positive/negative part of the gaussian mean decomposition.

struct Exponential {
  double mean;
};

struct Gamma {
  double shape;
  double scale;
};

struct Gaussian {
  double mean;
  double stddev;
};

struct Erlang {
  int stages;
  double scale;
};

struct Weibull2 {
  double rate;
};

struct ShiftedWeibull2 {
  double shift;
  double rate;
  int direction;  // +1: shift + W, -1: shift - W
};

using DistributionFamily = std::variant<Exponential, Gamma, Gaussian, Erlang,
                                        Weibull2, ShiftedWeibull2>;

// Value-type distribution. Construction validates parameters, so any held
// instance is usable with every operation its family supports.
class Distribution {
 public:
  Distribution(Exponential d) : family_(d) {
    require(d.mean > 0, "exponential mean must be positive");
  }
  Distribution(Gamma d) : family_(d) {
    require(d.shape > 0, "gamma shape must be positive");
    require(d.scale > 0, "gamma scale must be positive");
  }
  Distribution(Gaussian d) : family_(d) {
    require(d.stddev > 0, "gaussian stddev must be positive");
  }
  Distribution(Erlang d) : family_(d) {
    require(d.stages >= 1, "erlang stages must be at least 1");
    require(d.scale > 0, "erlang scale must be positive");
  }
  Distribution(Weibull2 d) : family_(d) {
    require(d.rate > 0, "weibull2 rate must be positive");
  }
  Distribution(ShiftedWeibull2 d) : family_(d) {
    require(d.rate > 0, "shifted_weibull2 rate must be positive");
    require(d.direction == 1 || d.direction == -1,
            "shifted_weibull2 direction must be +1 or -1");
  }

  const DistributionFamily& family() const { return family_; }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&family_);
  }

 private:
  static void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
  }

  DistributionFamily family_;
};

inline std::string_view family_name(const Distribution& d) {
  struct Visitor {
    std::string_view operator()(const Exponential&) { return "exponential"; }
    std::string_view operator()(const Gamma&) { return "gamma"; }
    std::string_view operator()(const Gaussian&) { return "gaussian"; }
    std::string_view operator()(const Erlang&) { return "erlang"; }
    std::string_view operator()(const Weibull2&) { return "weibull2"; }
    std::string_view operator()(const ShiftedWeibull2&) {
      return "shifted_weibull2";
    }
  };
  return std::visit(Visitor{}, d.family());
}

namespace detail {

// Shortest decimal string that parses back to exactly v.
inline std::string format_double(double v) {
  char buffer[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, v);
    if (std::strtod(buffer, nullptr) == v) break;
  }
  return buffer;
}

inline double erlang_norm(int stages, double scale) {
  double factorial = 1.0;
  for (int i = 2; i < stages; ++i) factorial *= i;
  double scale_pow = scale;
  for (int i = 1; i < stages; ++i) scale_pow *= scale;
  return 1.0 / (factorial * scale_pow);
}

}  // namespace detail

// Canonical one-line form, e.g. "gamma{shape=3,scale=0.5}". Round-trips
// through parse_distribution for the externally configurable families.
inline std::string describe(const Distribution& d) {
  using detail::format_double;
  struct Visitor {
    std::string operator()(const Exponential& e) {
      return "exponential{mean=" + format_double(e.mean) + "}";
    }
    std::string operator()(const Gamma& g) {
      return "gamma{shape=" + format_double(g.shape) +
             ",scale=" + format_double(g.scale) + "}";
    }
    std::string operator()(const Gaussian& g) {
      return "gaussian{mean=" + format_double(g.mean) +
             ",stddev=" + format_double(g.stddev) + "}";
    }
    std::string operator()(const Erlang& e) {
      return "erlang{stages=" + std::to_string(e.stages) +
             ",scale=" + format_double(e.scale) + "}";
    }
    std::string operator()(const Weibull2& w) {
      return "weibull2{rate=" + format_double(w.rate) + "}";
    }
    std::string operator()(const ShiftedWeibull2& w) {
      return "shifted_weibull2{shift=" + format_double(w.shift) +
             ",rate=" + format_double(w.rate) +
             ",direction=" + std::to_string(w.direction) + "}";
    }
  };
  return std::visit(Visitor{}, d.family());
}

// Density f(x). Points outside the support give 0 (no throw); the only
// unbounded case is gamma with shape < 1 at x == 0, which gives +infinity.
inline double density(const Distribution& d, double x) {
  struct Visitor {
    double x;
    double operator()(const Exponential& e) const {
      if (x < 0) return 0.0;
      return std::exp(-x / e.mean) / e.mean;
    }
    double operator()(const Gamma& g) const {
      if (x < 0) return 0.0;
      if (x == 0) {
        if (g.shape > 1) return 0.0;
        if (g.shape == 1) return 1.0 / g.scale;
        return std::numeric_limits<double>::infinity();
      }
      return std::exp((g.shape - 1) * std::log(x) - x / g.scale -
                      std::lgamma(g.shape) - g.shape * std::log(g.scale));
    }
    double operator()(const Gaussian& g) const {
      const double z = (x - g.mean) / g.stddev;
      constexpr double kInvSqrtTwoPi = 0.3989422804014326779;
      return kInvSqrtTwoPi / g.stddev * std::exp(-0.5 * z * z);
    }
    double operator()(const Erlang& e) const {
      if (x < 0) return 0.0;
      const double decay = std::exp(-x / e.scale);
      if (decay == 0.0) return 0.0;  // keeps inf * 0 out of the far tail
      double x_pow = 1.0;
      for (int i = 1; i < e.stages; ++i) x_pow *= x;
      return detail::erlang_norm(e.stages, e.scale) * x_pow * decay;
    }
    double operator()(const Weibull2& w) const {
      if (x < 0) return 0.0;
      const double decay = std::exp(-w.rate * x * x);
      if (decay == 0.0) return 0.0;
      return 2.0 * w.rate * x * decay;
    }
    double operator()(const ShiftedWeibull2& w) const {
      const double y = w.direction > 0 ? x - w.shift : w.shift - x;
      if (y < 0) return 0.0;
      const double decay = std::exp(-w.rate * y * y);
      if (decay == 0.0) return 0.0;
      return 2.0 * w.rate * y * decay;
    }
  };
  return std::visit(Visitor{x}, d.family());
}

// Draws one variate. Uniform consumption per draw is fixed for every family
// except gamma (rejection sampling):
//   exponential 1, erlang k (sum of k exponentials), gaussian 2 (Box-Muller,
//   no spare kept), weibull2 1, shifted_weibull2 1, gamma variable.
// The gamma sampler rejects on the unit-scale process and multiplies by the
// scale afterwards, so coupled streams stay aligned across scale changes.
inline double sample(const Distribution& d, UniformStream& stream) {
  struct Visitor {
    UniformStream& stream;

    double exponential(double mean) { return -mean * std::log(stream.next()); }

    double standard_normal() {
      const double u1 = stream.next();
      const double u2 = stream.next();
      constexpr double kTwoPi = 6.2831853071795864769;
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    // Marsaglia-Tsang squeeze for shape >= 1, unit scale.
    double standard_gamma(double shape) {
      const double d = shape - 1.0 / 3.0;
      const double c = 1.0 / std::sqrt(9.0 * d);
      for (;;) {
        double z, v;
        do {
          z = standard_normal();
          v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.next();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v)))
          return d * v;
      }
    }

    double operator()(const Exponential& e) { return exponential(e.mean); }
    double operator()(const Gamma& g) {
      if (g.shape >= 1.0) return g.scale * standard_gamma(g.shape);
      // shape < 1 via the boost relation G(a) = G(a+1) * U^(1/a)
      const double grown = standard_gamma(g.shape + 1.0);
      return g.scale * grown * std::pow(stream.next(), 1.0 / g.shape);
    }
    double operator()(const Gaussian& g) {
      return g.mean + g.stddev * standard_normal();
    }
    double operator()(const Erlang& e) {
      double total = 0.0;
      for (int i = 0; i < e.stages; ++i) total += exponential(e.scale);
      return total;
    }
    double operator()(const Weibull2& w) {
      return std::sqrt(-std::log(stream.next()) / w.rate);
    }
    double operator()(const ShiftedWeibull2& w) {
      const double draw = std::sqrt(-std::log(stream.next()) / w.rate);
      return w.shift + w.direction * draw;
    }
  };
  return std::visit(Visitor{stream}, d.family());
}

// d/dtheta log f(x; theta) where theta is the family's sensitivity
// parameter. Throws support_violation_error outside the support and
// not_implemented_error for shifted_weibull2 (it has no parameter).
inline double score(const Distribution& d, double x) {
  struct Visitor {
    double x;

    [[noreturn]] void outside(const char* support) const {
      throw support_violation_error("score evaluated outside support " +
                                    std::string(support) + " at x = " +
                                    detail::format_double(x));
    }

    double operator()(const Exponential& e) const {
      if (x < 0) outside("[0,inf)");
      return (x - e.mean) / (e.mean * e.mean);
    }
    double operator()(const Gamma& g) const {
      if (x <= 0) outside("(0,inf)");
      return (x - g.shape * g.scale) / (g.scale * g.scale);
    }
    double operator()(const Gaussian& g) const {
      return (x - g.mean) / (g.stddev * g.stddev);
    }
    double operator()(const Erlang& e) const {
      if (x < 0) outside("[0,inf)");
      return (x - e.stages * e.scale) / (e.scale * e.scale);
    }
    double operator()(const Weibull2& w) const {
      if (x < 0) outside("[0,inf)");
      return 1.0 / w.rate - x * x;
    }
    double operator()(const ShiftedWeibull2&) const {
      throw not_implemented_error(
          "score: shifted_weibull2 has no sensitivity parameter");
    }
  };
  return std::visit(Visitor{x}, d.family());
}

// Weak-derivative decomposition of d f(x; theta)/d theta into
// c(theta) * (plus_part - minus_part) with both parts proper densities.
struct DecompositionTriple {
  double c;
  Distribution plus_part;
  Distribution minus_part;
};

// Decomposition with respect to the family's sensitivity parameter:
//   exponential(m):   c = 1/m,        plus erlang{2,m},      minus exponential{m}
//   gamma(a,s):       c = a/s,        plus gamma{a+1,s},     minus gamma{a,s}
//   gaussian(mu,sg):  c = 1/(sg*sqrt(2*pi)), plus/minus mu +/- weibull2(1/(2 sg^2))
// Other families throw not_implemented_error.
inline DecompositionTriple decomposition(const Distribution& d) {
  struct Visitor {
    DecompositionTriple operator()(const Exponential& e) const {
      return {1.0 / e.mean, Erlang{2, e.mean}, Exponential{e.mean}};
    }
    DecompositionTriple operator()(const Gamma& g) const {
      return {g.shape / g.scale, Gamma{g.shape + 1.0, g.scale},
              Gamma{g.shape, g.scale}};
    }
    DecompositionTriple operator()(const Gaussian& g) const {
      constexpr double kInvSqrtTwoPi = 0.3989422804014326779;
      const double rate = 1.0 / (2.0 * g.stddev * g.stddev);
      return {kInvSqrtTwoPi / g.stddev,
              ShiftedWeibull2{g.mean, rate, +1},
              ShiftedWeibull2{g.mean, rate, -1}};
    }
    [[noreturn]] DecompositionTriple fail(std::string_view family) const {
      throw not_implemented_error("decomposition: no weak-derivative form for " +
                                  std::string(family));
    }
    DecompositionTriple operator()(const Erlang&) const { return fail("erlang"); }
    DecompositionTriple operator()(const Weibull2&) const {
      return fail("weibull2");
    }
    DecompositionTriple operator()(const ShiftedWeibull2&) const {
      return fail("shifted_weibull2");
    }
  };
  return std::visit(Visitor{}, d.family());
}

// Pointwise weight c * (f_plus(x) - f_minus(x)) / f(x): the factor that
// turns an output sample into its single-run gradient contribution. Equals
// score(d, x) wherever f(x) > 0. Throws support_violation_error when
// f(x) = 0 (the importance-sampling ratio is undefined there).
inline double likelihood_ratio_weight(const Distribution& d, double x) {
  const DecompositionTriple triple = decomposition(d);
  const double base = density(d, x);
  if (!(base > 0)) {
    throw support_violation_error(
        "likelihood_ratio_weight: " + std::string(family_name(d)) +
        " density is zero at x = " + detail::format_double(x));
  }
  const double signed_mass =
      density(triple.plus_part, x) - density(triple.minus_part, x);
  return triple.c * signed_mass / base;
}

// Current value of the sensitivity parameter.
inline double sensitivity_parameter(const Distribution& d) {
  struct Visitor {
    double operator()(const Exponential& e) const { return e.mean; }
    double operator()(const Gamma& g) const { return g.scale; }
    double operator()(const Gaussian& g) const { return g.mean; }
    double operator()(const Erlang& e) const { return e.scale; }
    double operator()(const Weibull2& w) const { return w.rate; }
    [[noreturn]] double operator()(const ShiftedWeibull2&) const {
      throw not_implemented_error(
          "sensitivity_parameter: shifted_weibull2 has no parameter");
    }
  };
  return std::visit(Visitor{}, d.family());
}

// Same family with the sensitivity parameter replaced by value.
inline Distribution with_sensitivity_parameter(const Distribution& d,
                                               double value) {
  struct Visitor {
    double value;
    Distribution operator()(const Exponential&) const {
      return Exponential{value};
    }
    Distribution operator()(const Gamma& g) const {
      return Gamma{g.shape, value};
    }
    Distribution operator()(const Gaussian& g) const {
      return Gaussian{value, g.stddev};
    }
    Distribution operator()(const Erlang& e) const {
      return Erlang{e.stages, value};
    }
    Distribution operator()(const Weibull2&) const { return Weibull2{value}; }
    [[noreturn]] Distribution operator()(const ShiftedWeibull2&) const {
      throw not_implemented_error(
          "with_sensitivity_parameter: shifted_weibull2 has no parameter");
    }
  };
  return std::visit(Visitor{value}, d.family());
}

}  // namespace gradsim

#endif  // GRADSIM_DISTRIBUTIONS_HPP_
