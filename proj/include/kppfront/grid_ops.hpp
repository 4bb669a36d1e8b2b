// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <cmath>
#include <cstdlib>

#include "kppfront/grid.hpp"
#include "kppfront/model.hpp"

namespace kppfront {

enum class Side { Up, Down };

/// Action of the infinite-range operators on a pure exponential e^{s x}.
/// Each operator maps gamma e^{s x} to multiplier(s) * gamma e^{s x}.
namespace exp_symbol {

inline double diffusion(const Kernel& ker, double h, double s) {
  double r = 0.0;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double kh = k * h;
    r += ker.a(k) * 2.0 * (std::cosh(s * kh) - 1.0) / (kh * kh);
  }
  return r;
}

inline double transport(const Kernel& ker, double h, double s) {
  double r = 0.0;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double kh = k * h;
    r += ker.a(k) * std::sinh(s * kh) / kh;
  }
  return r;
}

inline double mean(const Kernel& ker, double h, double s) {
  double r = 0.0;
  for (int k = 1; k <= ker.max_range(); ++k) r += ker.a(k) * std::cosh(s * k * h);
  return r;
}

}  // namespace exp_symbol

namespace detail {

/// Outward exponent of a tail (s such that tail = gamma e^{s d} with d the
/// outward distance), or 0 for constant/zero tails.
inline double tail_exponent(const Tail& t) { return t.kind == Tail::Kind::Exponential ? -t.rate : 0.0; }

/// Maps both tails through an operator whose action on e^{s x} is mult(s).
/// The exponent is preserved; only gamma scales. Constant tails with a zero
/// multiplier collapse to the zero tail.
template <typename Mult>
inline void map_tails(const GridFunction& in, GridFunction& out, Mult mult) {
  auto apply = [&](const Tail& t, bool left) {
    if (t.kind == Tail::Kind::Zero) return Tail::zero();
    // Inward exponent in x: left tail grows like e^{rate x}, right like e^{-rate x}.
    const double s = left ? t.rate : -t.rate;
    const double m = mult(s);
    if (t.kind == Tail::Kind::Constant)
      return m == 0.0 ? Tail::zero() : Tail::constant(m * t.gamma);
    return Tail::exponential(m * t.gamma, t.rate);
  };
  out.left_tail = apply(in.left_tail, true);
  out.right_tail = apply(in.right_tail, false);
}

}  // namespace detail

/// Exact shift by a signed number of fine-grid steps: result(x) = f(x + steps*dx).
/// Out-of-domain samples are filled from the analytic tails.
inline GridFunction shift(const GridFunction& f, long steps) {
  GridFunction r;
  r.grid = f.grid;
  r.values.resize(f.values.size());
  for (long i = 0; i <= f.grid.n; ++i)
    r.values[static_cast<std::size_t>(i)] = f.eval_index(i + steps);
  const double d = static_cast<double>(steps) * f.grid.dx();
  detail::map_tails(f, r, [d](double s) { return std::exp(s * d); });
  return r;
}

/// Delta_{a,h} f = sum_k a_k (f(.+kh) - 2f + f(.-kh)) / (k^2 h^2), with exact
/// index shifts (kh = k*m steps of dx).
inline GridFunction discrete_diffusion(const Kernel& ker, double h, const GridFunction& f) {
  if (f.grid.lattice_step != h)
    fail(ErrorCode::GridMismatch, "discrete_diffusion: grid lattice step differs from h");
  GridFunction r;
  r.grid = f.grid;
  r.values.assign(f.values.size(), 0.0);
  const long m = f.grid.refinement;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double w = ker.a(k) / (k * h * k * h);
    const long o = static_cast<long>(k) * m;
    for (long i = 0; i <= f.grid.n; ++i)
      r.values[static_cast<std::size_t>(i)] +=
          w * (f.eval_index(i + o) - 2.0 * f.eval_index(i) + f.eval_index(i - o));
  }
  detail::map_tails(f, r, [&](double s) { return exp_symbol::diffusion(ker, h, s); });
  return r;
}

/// Centered infinite-range transport sum_k a_k (f(.+kh) - f(.-kh)) / (2kh).
inline GridFunction centered_transport(const Kernel& ker, double h, const GridFunction& f) {
  if (f.grid.lattice_step != h)
    fail(ErrorCode::GridMismatch, "centered_transport: grid lattice step differs from h");
  GridFunction r;
  r.grid = f.grid;
  r.values.assign(f.values.size(), 0.0);
  const long m = f.grid.refinement;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double w = ker.a(k) / (2.0 * k * h);
    const long o = static_cast<long>(k) * m;
    for (long i = 0; i <= f.grid.n; ++i)
      r.values[static_cast<std::size_t>(i)] += w * (f.eval_index(i + o) - f.eval_index(i - o));
  }
  detail::map_tails(f, r, [&](double s) { return exp_symbol::transport(ker, h, s); });
  return r;
}

/// Centered infinite-range mean sum_k a_k (f(.+kh) + f(.-kh)) / 2.
inline GridFunction centered_mean(const Kernel& ker, double h, const GridFunction& f) {
  if (f.grid.lattice_step != h)
    fail(ErrorCode::GridMismatch, "centered_mean: grid lattice step differs from h");
  GridFunction r;
  r.grid = f.grid;
  r.values.assign(f.values.size(), 0.0);
  const long m = f.grid.refinement;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double w = 0.5 * ker.a(k);
    const long o = static_cast<long>(k) * m;
    for (long i = 0; i <= f.grid.n; ++i)
      r.values[static_cast<std::size_t>(i)] += w * (f.eval_index(i + o) + f.eval_index(i - o));
  }
  detail::map_tails(f, r, [&](double s) { return exp_symbol::mean(ker, h, s); });
  return r;
}

/// Upwind (f(.+kh) - f)/kh or downwind (f - f(.-kh))/kh difference for the
/// single-shift distance kh.
inline GridFunction one_sided_difference(const GridFunction& f, int k, Side side) {
  GridFunction r;
  r.grid = f.grid;
  r.values.resize(f.values.size());
  const double kh = k * f.grid.lattice_step;
  const long o = static_cast<long>(k) * f.grid.refinement;
  for (long i = 0; i <= f.grid.n; ++i) {
    const double up = f.eval_index(i + (side == Side::Up ? o : 0));
    const double dn = f.eval_index(i - (side == Side::Down ? o : 0));
    r.values[static_cast<std::size_t>(i)] = (up - dn) / kh;
  }
  detail::map_tails(f, r, [&](double s) {
    return side == Side::Up ? (std::exp(s * kh) - 1.0) / kh : (1.0 - std::exp(-s * kh)) / kh;
  });
  return r;
}

/// Single-shift second difference (f(.+kh) - 2f + f(.-kh)) / (kh)^2.
inline GridFunction second_difference(const GridFunction& f, int k) {
  GridFunction r;
  r.grid = f.grid;
  r.values.resize(f.values.size());
  const double kh = k * f.grid.lattice_step;
  const long o = static_cast<long>(k) * f.grid.refinement;
  for (long i = 0; i <= f.grid.n; ++i)
    r.values[static_cast<std::size_t>(i)] =
        (f.eval_index(i + o) - 2.0 * f.eval_index(i) + f.eval_index(i - o)) / (kh * kh);
  detail::map_tails(f, r, [&](double s) { return 2.0 * (std::cosh(s * kh) - 1.0) / (kh * kh); });
  return r;
}

/// Fourier symbol of Delta_{a,h} at frequency xi: sum_k a_k 2(cos(kh xi)-1)/(k^2 h^2).
inline double diffusion_symbol(const Kernel& ker, double h, double xi) {
  double r = 0.0;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double kh = k * h;
    r += ker.a(k) * 2.0 * (std::cos(kh * xi) - 1.0) / (kh * kh);
  }
  return r;
}

/// Most negative value of the diffusion symbol over one period, sampled.
/// Used for the explicit time-stepping stability cap.
inline double diffusion_symbol_floor(const Kernel& ker, double h, int samples = 4096) {
  double floor = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double xi = M_PI / h * static_cast<double>(i) / samples;
    floor = std::min(floor, diffusion_symbol(ker, h, xi));
  }
  return floor;
}

/// A_h(0) f = Delta_{a,h} f + c f' + g'(0) f, evaluated at function level with
/// tail-aware shifts and derivative. This is the diagnostic form whose kernel
/// contains the pure exponential e^{-kappa(h) x}.
inline GridFunction apply_linearization_at_zero(const Kernel& ker, double h, double c,
                                                double gprime0, const GridFunction& f) {
  GridFunction r = discrete_diffusion(ker, h, f);
  GridFunction df = f.derivative();
  for (long i = 0; i <= f.grid.n; ++i) {
    const std::size_t j = static_cast<std::size_t>(i);
    r.values[j] += c * df.values[j] + gprime0 * f.values[j];
  }
  r.left_tail = Tail::zero();
  r.right_tail = Tail::zero();
  return r;
}

}  // namespace kppfront
