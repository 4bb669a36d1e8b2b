// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <cmath>

namespace kppfront {

/// C-infinity step sigma(x) = 1/(1 + exp(2x/(1-x^2))) on (-1,1), extended by
/// 1 for x <= -1 and 0 for x >= 1. All derivatives vanish at the junctions.
/// Closed-form derivatives up to third order.
struct SmoothStep {
  struct Jet {
    double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  };

  /// Evaluates the step and its first three derivatives at x.
  static Jet jet(double x) {
    Jet j;
    if (x <= -1.0 + 1e-3) {
      j.v = 1.0;
      return j;
    }
    if (x >= 1.0 - 1e-3) {
      j.v = 0.0;
      return j;
    }
    const double x2 = x * x;
    const double om = 1.0 - x2;
    const double q = 2.0 * x / om;
    const double q1 = 2.0 * (1.0 + x2) / (om * om);
    const double q2 = 4.0 * x * (3.0 + x2) / (om * om * om);
    const double q3 = 12.0 * (1.0 + 6.0 * x2 + x2 * x2) / (om * om * om * om);
    // sigma = 1/(1+e^q); sigma' = -q' s(1-s); higher orders by the chain rule.
    const double s = 1.0 / (1.0 + std::exp(q));
    const double p = s * (1.0 - s);
    j.v = s;
    j.d1 = -q1 * p;
    const double dp = j.d1 * (1.0 - 2.0 * s);  // (s(1-s))' = s'(1-2s)
    j.d2 = -q2 * p - q1 * dp;
    const double ddp = j.d2 * (1.0 - 2.0 * s) - 2.0 * j.d1 * j.d1;
    j.d3 = -q3 * p - 2.0 * q2 * dp - q1 * ddp;
    return j;
  }

  static double value(double x) { return jet(x).v; }
  static double d1(double x) { return jet(x).d1; }
  static double d2(double x) { return jet(x).d2; }
  static double d3(double x) { return jet(x).d3; }
};

/// Partition of unity: indicator_minus = 1 on (-inf,-1], 0 on [1,inf),
/// indicator_plus = 1 - indicator_minus.
inline double indicator_minus(double x) { return SmoothStep::value(x); }
inline double indicator_plus(double x) { return 1.0 - SmoothStep::value(x); }

/// Symmetric cutoff: 1 on [-a, a], 0 outside (-b, b), smooth in between.
struct SmoothCutoff {
  double inner;
  double outer;

  SmoothStep::Jet jet(double x) const {
    const double ax = std::abs(x);
    if (ax <= inner) return {1.0, 0.0, 0.0, 0.0};
    if (ax >= outer) return {0.0, 0.0, 0.0, 0.0};
    // Map |x| in (inner, outer) onto (-1, 1) and apply the step downward.
    const double scale = 2.0 / (outer - inner);
    const double t = (2.0 * ax - inner - outer) / (outer - inner);
    SmoothStep::Jet base = SmoothStep::jet(t);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    SmoothStep::Jet j;
    j.v = base.v;
    j.d1 = sgn * base.d1 * scale;
    j.d2 = base.d2 * scale * scale;
    j.d3 = sgn * base.d3 * scale * scale * scale;
    return j;
  }

  double value(double x) const { return jet(x).v; }
};

}  // namespace kppfront
