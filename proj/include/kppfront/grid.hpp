// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "kppfront/errors.hpp"

namespace kppfront {

/// Uniform grid on [-L, L] refined so that every lattice shift kh is an exact
/// index offset k*m. x_i = -L + i*dx with dx = h/m; N*dx = 2L and x_{N/2} = 0.
struct Grid {
  double half_length = 0.0;  // L, snapped to a multiple of dx
  double lattice_step = 0.0; // h
  int refinement = 1;        // m
  long n = 0;                // number of intervals; samples live at i = 0..n

  double dx() const { return lattice_step / refinement; }
  long size() const { return n + 1; }
  double x(long i) const { return -half_length + static_cast<double>(i) * dx(); }

  bool operator==(const Grid& o) const {
    return lattice_step == o.lattice_step && refinement == o.refinement && n == o.n &&
           half_length == o.half_length;
  }

  /// Builds a grid whose half length is L rounded up to a multiple of dx.
  static Grid make(double target_half_length, double h, int m) {
    if (!(h > 0.0) || m < 1 || !(target_half_length > 0.0))
      fail(ErrorCode::ConfigError, "grid needs h > 0, m >= 1, L > 0");
    Grid g;
    g.lattice_step = h;
    g.refinement = m;
    const double dx = h / m;
    const long half_intervals = static_cast<long>(std::ceil(target_half_length / dx - 1e-9));
    g.n = 2 * half_intervals;
    g.half_length = static_cast<double>(half_intervals) * dx;
    return g;
  }
};

/// Analytic description of a function beyond the stored domain. On the left
/// the value is gamma * exp(rate * (x + L)); on the right it is
/// gamma * exp(-rate * (x - L)). rate > 0 therefore means decay away from the
/// domain on either side, and gamma is pinned to the boundary sample.
struct Tail {
  enum class Kind : std::uint8_t { Zero, Constant, Exponential };
  Kind kind = Kind::Zero;
  double gamma = 0.0;
  double rate = 0.0;

  static Tail zero() { return {Kind::Zero, 0.0, 0.0}; }
  static Tail constant(double gamma) { return {Kind::Constant, gamma, 0.0}; }
  static Tail exponential(double gamma, double rate) { return {Kind::Exponential, gamma, rate}; }

  /// Exponent of the tail in the outward direction: value = gamma * e^{s * d}
  /// where d is the signed distance past the boundary (d has the sign of x on
  /// the right and of -x on the left).
  double outward_exponent() const { return kind == Kind::Exponential ? -rate : 0.0; }

  double value_at_distance(double d) const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::Constant: return gamma;
      case Kind::Exponential: return gamma * std::exp(-rate * d);
    }
    return 0.0;
  }
};

/// Sampled real function on a Grid plus tails that make evaluation beyond
/// [-L, L] well defined. Immutable by convention: operators return new values.
struct GridFunction {
  Grid grid;
  std::vector<double> values;
  Tail left_tail = Tail::zero();
  Tail right_tail = Tail::zero();

  long size() const { return grid.size(); }
  double x(long i) const { return grid.x(i); }

  /// Value at grid index i, using the tails when i falls outside [0, n].
  double eval_index(long i) const {
    if (i >= 0 && i <= grid.n) return values[static_cast<std::size_t>(i)];
    if (i < 0) return left_tail.value_at_distance(-static_cast<double>(i) * grid.dx());
    return right_tail.value_at_distance(static_cast<double>(i - grid.n) * grid.dx());
  }

  /// Value at an arbitrary point: tails outside, 6-point Lagrange inside.
  double eval(double xq) const {
    const double dx = grid.dx();
    const double t = (xq + grid.half_length) / dx;
    const long i0 = static_cast<long>(std::floor(t));
    if (t == static_cast<double>(i0)) return eval_index(i0);
    if (xq < -grid.half_length)
      return left_tail.value_at_distance(-(xq + grid.half_length));
    if (xq > grid.half_length)
      return right_tail.value_at_distance(xq - grid.half_length);
    double result = 0.0;
    for (long j = i0 - 2; j <= i0 + 3; ++j) {
      double w = 1.0;
      for (long l = i0 - 2; l <= i0 + 3; ++l)
        if (l != j) w *= (t - static_cast<double>(l)) / static_cast<double>(j - l);
      result += w * eval_index(j);
    }
    return result;
  }

  /// 6th-order centered first derivative; out-of-range samples come from the
  /// tails, so no one-sided closure is needed. Tails are differentiated
  /// analytically.
  GridFunction derivative() const {
    GridFunction d;
    d.grid = grid;
    d.values.resize(values.size());
    const double inv = 1.0 / (60.0 * grid.dx());
    for (long i = 0; i <= grid.n; ++i) {
      d.values[static_cast<std::size_t>(i)] =
          (eval_index(i + 3) - eval_index(i - 3) - 9.0 * (eval_index(i + 2) - eval_index(i - 2)) +
           45.0 * (eval_index(i + 1) - eval_index(i - 1))) *
          inv;
    }
    // Left tail gamma e^{rate(x+L)} differentiates to rate * value; the right
    // tail gamma e^{-rate(x-L)} to -rate * value. Constants become zero.
    d.left_tail = left_tail.kind == Tail::Kind::Exponential
                      ? Tail::exponential(left_tail.rate * left_tail.gamma, left_tail.rate)
                      : Tail::zero();
    d.right_tail = right_tail.kind == Tail::Kind::Exponential
                       ? Tail::exponential(-right_tail.rate * right_tail.gamma, right_tail.rate)
                       : Tail::zero();
    return d;
  }

  /// Trapezoidal L2 norm over the stored domain.
  double norm_l2() const {
    double s = 0.0;
    for (long i = 0; i <= grid.n; ++i) {
      const double w = (i == 0 || i == grid.n) ? 0.5 : 1.0;
      const double v = values[static_cast<std::size_t>(i)];
      s += w * v * v;
    }
    return std::sqrt(s * grid.dx());
  }

  double norm_linf() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }

  static GridFunction sample(const Grid& grid, const std::function<double(double)>& f,
                             Tail left = Tail::zero(), Tail right = Tail::zero()) {
    GridFunction gf;
    gf.grid = grid;
    gf.values.resize(static_cast<std::size_t>(grid.size()));
    for (long i = 0; i <= grid.n; ++i) gf.values[static_cast<std::size_t>(i)] = f(grid.x(i));
    gf.left_tail = left;
    gf.right_tail = right;
    return gf;
  }

  static GridFunction constant(const Grid& grid, double value) {
    GridFunction gf;
    gf.grid = grid;
    gf.values.assign(static_cast<std::size_t>(grid.size()), value);
    gf.left_tail = Tail::constant(value);
    gf.right_tail = Tail::constant(value);
    return gf;
  }

  static GridFunction zeros(const Grid& grid) { return constant(grid, 0.0); }

  /// Anchors exponential tails to the boundary samples so the splice is
  /// continuous by construction (the stored gamma equals the end sample).
  void anchor_exponential_tails(double left_rate, double right_rate) {
    left_tail = Tail::exponential(values.front(), left_rate);
    right_tail = Tail::exponential(values.back(), right_rate);
  }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) fail(ErrorCode::GridMismatch, where);
}

/// Trapezoidal inner product <f, g> over the stored domain.
inline double inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f.grid, g.grid, "inner_product");
  double s = 0.0;
  for (long i = 0; i <= f.grid.n; ++i) {
    const double w = (i == 0 || i == f.grid.n) ? 0.5 : 1.0;
    s += w * f.values[static_cast<std::size_t>(i)] * g.values[static_cast<std::size_t>(i)];
  }
  return s * f.grid.dx();
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid, b.grid, "operator+");
  GridFunction r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  r.left_tail = Tail::zero();
  r.right_tail = Tail::zero();
  if (a.left_tail.kind == Tail::Kind::Zero) r.left_tail = b.left_tail;
  if (b.left_tail.kind == Tail::Kind::Zero) r.left_tail = a.left_tail;
  if (a.right_tail.kind == Tail::Kind::Zero) r.right_tail = b.right_tail;
  if (b.right_tail.kind == Tail::Kind::Zero) r.right_tail = a.right_tail;
  return r;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid, b.grid, "operator-");
  GridFunction r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
  r.left_tail = Tail::zero();
  r.right_tail = Tail::zero();
  return r;
}

inline GridFunction operator*(double s, const GridFunction& a) {
  GridFunction r = a;
  for (double& v : r.values) v *= s;
  if (r.left_tail.kind != Tail::Kind::Zero) r.left_tail.gamma *= s;
  if (r.right_tail.kind != Tail::Kind::Zero) r.right_tail.gamma *= s;
  return r;
}

}  // namespace kppfront
