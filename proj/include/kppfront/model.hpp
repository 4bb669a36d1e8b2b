// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kppfront/errors.hpp"

namespace kppfront {

using RealFn = std::function<double(double)>;

/// Reaction term g with derivative oracles and the slopes at the two rest states.
/// Instances are immutable after validation and safe to share across threads.
struct Nonlinearity {
  RealFn evaluate;
  RealFn derivative_1;
  RealFn derivative_2;
  RealFn derivative_3;
  double gprime0 = 0.0;  // g'(0)
  double gprime1 = 0.0;  // g'(1)
  std::string name;
};

/// Coefficient sequence (a_1,...,a_K) with a geometric-decay certificate.
struct Kernel {
  std::vector<double> coefficients;  // a_k, k = 1..K
  double decay_C = 0.0;              // |a_k| <= decay_C * decay_rho^k
  double decay_rho = 0.5;
  double sum = 0.0;                  // = 1 after validation
  std::string id;

  int max_range() const { return static_cast<int>(coefficients.size()); }
  double a(int k) const { return coefficients[static_cast<std::size_t>(k - 1)]; }
};

namespace detail {

/// Evaluate a polynomial given by ascending coefficients.
inline double polyval(const std::vector<double>& c, double u) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * u + *it;
  return r;
}

inline std::vector<double> polyder(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

/// 4th-order central difference, used when a derivative oracle is missing.
inline RealFn central_difference(RealFn f, double step = 1e-4) {
  return [f = std::move(f), step](double u) {
    return (-f(u + 2 * step) + 8 * f(u + step) - 8 * f(u - step) + f(u - 2 * step)) / (12 * step);
  };
}

}  // namespace detail

/// Unvalidated bundle of callables describing a candidate reaction term.
struct NonlinearitySpec {
  RealFn g;
  RealFn dg;    // optional; central differences are substituted when absent
  RealFn d2g;
  RealFn d3g;
  std::string name = "custom";
};

inline NonlinearitySpec fisher_spec() {
  return {
      [](double u) { return u * (1.0 - u); },
      [](double u) { return 1.0 - 2.0 * u; },
      [](double) { return -2.0; },
      [](double) { return 0.0; },
      "fisher",
  };
}

/// g(u) = u - u^3, the other named concave monostable example.
inline NonlinearitySpec cubic_spec() {
  return {
      [](double u) { return u - u * u * u; },
      [](double u) { return 1.0 - 3.0 * u * u; },
      [](double u) { return -6.0 * u; },
      [](double) { return -6.0; },
      "cubic",
  };
}

/// Polynomial nonlinearity from ascending coefficients; derivatives are exact.
inline NonlinearitySpec polynomial_spec(std::vector<double> coeffs, std::string name = "poly") {
  auto d1 = detail::polyder(coeffs);
  auto d2 = detail::polyder(d1);
  auto d3 = detail::polyder(d2);
  return {
      [c = std::move(coeffs)](double u) { return detail::polyval(c, u); },
      [c = std::move(d1)](double u) { return detail::polyval(c, u); },
      [c = std::move(d2)](double u) { return detail::polyval(c, u); },
      [c = std::move(d3)](double u) { return detail::polyval(c, u); },
      std::move(name),
  };
}

/// Checks the rest states, the slope signs and concavity on [0,1].
///
/// Concavity is sampled on a fixed 10^4-point grid rather than proven
/// symbolically, so black-box reaction terms are accepted.
inline Nonlinearity validate_nonlinearity(const NonlinearitySpec& spec) {
  Nonlinearity g;
  g.evaluate = spec.g;
  g.derivative_1 = spec.dg ? spec.dg : detail::central_difference(spec.g);
  g.derivative_2 = spec.d2g ? spec.d2g : detail::central_difference(g.derivative_1);
  g.derivative_3 = spec.d3g ? spec.d3g : detail::central_difference(g.derivative_2);
  g.name = spec.name;

  const double g0 = g.evaluate(0.0);
  const double g1 = g.evaluate(1.0);
  if (std::abs(g0) > 1e-14 || std::abs(g1) > 1e-14)
    fail(ErrorCode::ZeroMismatch,
         "g(0)=" + std::to_string(g0) + ", g(1)=" + std::to_string(g1));

  g.gprime0 = g.derivative_1(0.0);
  g.gprime1 = g.derivative_1(1.0);
  if (!(g.gprime1 < 0.0 && 0.0 < g.gprime0))
    fail(ErrorCode::WrongSlopeSign,
         "need g'(1) < 0 < g'(0), got g'(0)=" + std::to_string(g.gprime0) +
             ", g'(1)=" + std::to_string(g.gprime1));

  constexpr int kConcavityPoints = 10000;
  for (int i = 0; i <= kConcavityPoints; ++i) {
    const double u = static_cast<double>(i) / kConcavityPoints;
    const double d2 = g.derivative_2(u);
    if (d2 > 1e-12)
      fail(ErrorCode::NotConcave, "g''(" + std::to_string(u) + ")=" + std::to_string(d2));
  }
  return g;
}

inline Nonlinearity make_nonlinearity(const std::string& name) {
  if (name == "fisher") return validate_nonlinearity(fisher_spec());
  if (name == "cubic") return validate_nonlinearity(cubic_spec());
  fail(ErrorCode::ConfigError, "unknown nonlinearity '" + name + "'");
}

/// Validates the coefficient sequence and fits the decay certificate.
///
/// (decay_C, decay_rho) come from a least-squares fit of log|a_k| over the
/// nonzero entries; the rate is clamped to (0,1) and C is inflated so that
/// |a_k| <= C rho^k holds for every k, also for sign-changing sequences whose
/// raw log-slope would exceed one.
inline Kernel validate_kernel(std::vector<double> coeffs, std::string id = "") {
  if (coeffs.empty()) fail(ErrorCode::EmptyKernel, "kernel has no coefficients");
  Kernel ker;
  ker.coefficients = std::move(coeffs);
  ker.sum = std::accumulate(ker.coefficients.begin(), ker.coefficients.end(), 0.0);
  if (std::abs(ker.sum - 1.0) > 1e-12)
    fail(ErrorCode::NotNormalized, "sum of coefficients is " + std::to_string(ker.sum));

  std::vector<std::pair<double, double>> pts;  // (k, log|a_k|)
  for (std::size_t i = 0; i < ker.coefficients.size(); ++i)
    if (ker.coefficients[i] != 0.0)
      pts.emplace_back(static_cast<double>(i + 1), std::log(std::abs(ker.coefficients[i])));

  double rho = 0.5;
  if (pts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rho = std::clamp(std::exp(slope), 0.05, 0.95);
  }
  ker.decay_rho = rho;
  double c_cert = 0.0;
  for (std::size_t i = 0; i < ker.coefficients.size(); ++i)
    c_cert = std::max(c_cert, std::abs(ker.coefficients[i]) /
                                  std::pow(rho, static_cast<double>(i + 1)));
  ker.decay_C = c_cert;
  if (ker.id.empty()) {
    ker.id = "a";
    for (double a : ker.coefficients) ker.id += "_" + std::to_string(a);
  }
  if (!id.empty()) ker.id = std::move(id);
  return ker;
}

/// Cuts a geometrically decaying sequence a_k = generator(k) at the first K
/// whose certified tail C rho^{K+1}/(1-rho) drops below 1e-14, then rescales
/// so the sum is exactly one.
inline Kernel truncate_geometric(const std::function<double(int)>& generator, double C,
                                 double rho, std::string id = "truncated") {
  if (!(C > 0.0) || !(rho > 0.0 && rho < 1.0))
    fail(ErrorCode::ConfigError, "need C > 0 and rho in (0,1)");
  std::vector<double> coeffs;
  int k = 1;
  while (C * std::pow(rho, k + 1) / (1.0 - rho) >= 1e-14) {
    coeffs.push_back(generator(k));
    if (std::abs(coeffs.back()) > C * std::pow(rho, k))
      fail(ErrorCode::ConfigError, "generator violates the decay certificate at k=" +
                                       std::to_string(k));
    ++k;
    if (k > 10000) fail(ErrorCode::ConfigError, "truncation did not terminate");
  }
  if (coeffs.empty()) fail(ErrorCode::EmptyKernel, "certificate truncates everything");
  const double s = std::accumulate(coeffs.begin(), coeffs.end(), 0.0);
  if (!(s > 0.0)) fail(ErrorCode::NotNormalized, "truncated sum is not positive");
  for (double& a : coeffs) a /= s;
  return validate_kernel(std::move(coeffs), std::move(id));
}

/// T_{j,f}(a,b) = f(a+b) - sum_{k<j} f^(k)(a) b^k / k!, evaluated directly.
/// Derivative oracles are taken positionally: d[0] = f', d[1] = f'', ...
inline double taylor_remainder(const RealFn& f, const std::vector<RealFn>& derivatives, int order,
                               double a, double b) {
  if (order < 1) fail(ErrorCode::ConfigError, "taylor_remainder needs order >= 1");
  double sum = f(a);
  double bk = 1.0;
  double factorial = 1.0;
  for (int k = 1; k < order; ++k) {
    bk *= b;
    factorial *= k;
    const auto& dk = derivatives[static_cast<std::size_t>(k - 1)];
    sum += dk(a) * bk / factorial;
  }
  return f(a + b) - sum;
}

inline double taylor_remainder(const Nonlinearity& g, int order, double a, double b) {
  return taylor_remainder(g.evaluate, {g.derivative_1, g.derivative_2, g.derivative_3}, order, a,
                          b);
}

/// Second-order remainder T_{2,g}(a,b) with a cancellation-free branch.
///
/// For |b| below a relative threshold the direct formula loses all digits to
/// rounding; the local expansion g''(a) b^2/2 + g'''(a) b^3/6 is then exact to
/// O(b^4), which keeps far-field residuals and Picard updates noise-free.
inline double t2_stable(const Nonlinearity& g, double a, double b) {
  if (std::abs(b) > 1e-4 * (1.0 + std::abs(a)))
    return g.evaluate(a + b) - g.evaluate(a) - g.derivative_1(a) * b;
  return 0.5 * g.derivative_2(a) * b * b + g.derivative_3(a) * b * b * b / 6.0;
}

}  // namespace kppfront
