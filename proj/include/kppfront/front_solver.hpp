// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "kppfront/continuum.hpp"
#include "kppfront/grid_ops.hpp"
#include "kppfront/linear_theory.hpp"
#include "kppfront/weight.hpp"

namespace kppfront {

/// Root of the discrete dispersion relation G(h, kappa) = 0 that pins the
/// exact exponential tail rate of the discrete front.
struct DecayRateSolution {
  double h = 0.0;
  double kappa_h = 0.0;
  double residual_G = 0.0;
  int newton_iterations = 0;
};

/// G(h, kappa) = g'(0) - c kappa + sum_k a_k (e^{-kappa kh} - 2 + e^{kappa kh})/(k^2 h^2).
inline double dispersion_G(const Kernel& ker, double h, double c, double gprime0, double kappa) {
  return gprime0 - c * kappa + exp_symbol::diffusion(ker, h, kappa);
}

inline double dispersion_dG(const Kernel& ker, double h, double c, double kappa) {
  double s = 0.0;
  for (int k = 1; k <= ker.max_range(); ++k) {
    const double kh = k * h;
    s += ker.a(k) * 2.0 * std::sinh(kappa * kh) / kh;
  }
  return -c + s;
}

/// Newton iteration on kappa -> G(h, kappa) from kappa0, with a bisection
/// fallback on [kappa0/2, min(2 kappa0, c/2)] when Newton wanders.
inline DecayRateSolution solve_decay_rate(const Kernel& ker, double h, double c,
                                          double gprime0) {
  const double kappa0 = spatial_decay_rate(c, gprime0);
  DecayRateSolution sol;
  sol.h = h;

  double kappa = kappa0;
  for (int it = 0; it < 60; ++it) {
    const double gval = dispersion_G(ker, h, c, gprime0, kappa);
    if (std::abs(gval) <= 1e-13) {
      sol.kappa_h = kappa;
      sol.residual_G = gval;
      sol.newton_iterations = it;
      return sol;
    }
    const double dg = dispersion_dG(ker, h, c, kappa);
    if (std::abs(dg) < 1e-8)
      fail(ErrorCode::DerivativeNearZero,
           "dG/dkappa = " + std::to_string(dg) + " near kappa = " + std::to_string(kappa));
    kappa -= gval / dg;
    if (!std::isfinite(kappa) || kappa <= 0.0) break;
  }

  // Bisection fallback on the admissible bracket.
  double lo = kappa0 / 2.0, hi = std::min(2.0 * kappa0, c / 2.0);
  double glo = dispersion_G(ker, h, c, gprime0, lo);
  double ghi = dispersion_G(ker, h, c, gprime0, hi);
  if (glo * ghi > 0.0)
    fail(ErrorCode::NewtonDiverged, "no sign change in the fallback bracket; last kappa = " +
                                        std::to_string(kappa));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = dispersion_G(ker, h, c, gprime0, mid);
    if (std::abs(gm) <= 1e-13) {
      sol.kappa_h = mid;
      sol.residual_G = gm;
      sol.newton_iterations = it + 60;
      return sol;
    }
    if (gm * glo <= 0.0) {
      hi = mid;
      ghi = gm;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  fail(ErrorCode::NewtonDiverged, "bisection exhausted; |G| still above 1e-13");
}

/// Far-field ansatz phi_inf = 1_- + w0 + 1_+ A e^{-kappa_h x} sampled on the
/// target grid. The right tail carries the exact rate kappa_h.
inline GridFunction build_far_field(const FarFieldDecomposition& dec, double kappa_h,
                                    const Grid& grid) {
  GridFunction f;
  f.grid = grid;
  f.values.resize(static_cast<std::size_t>(grid.size()));
  for (long i = 0; i <= grid.n; ++i) {
    const double x = grid.x(i);
    f.values[static_cast<std::size_t>(i)] =
        indicator_minus(x) + dec.w0.eval(x) +
        indicator_plus(x) * dec.amplitude * std::exp(-kappa_h * x);
  }
  f.left_tail = Tail::constant(f.values.front());
  f.right_tail = Tail::exponential(f.values.back(), kappa_h);
  return f;
}

/// Weighted residual R = omega^{-1} (Delta_{a,h} phi_inf + c phi_inf' + g(phi_inf)).
/// This equals omega^{-1} A_h(0) phi_inf + omega^{-1} T_{2,g}(0, phi_inf).
///
/// The ansatz rate must satisfy the dispersion relation, otherwise the
/// leading tail no longer cancels and the weighted residual grows toward +L.
inline GridFunction residual(const GridFunction& phi_inf, const WeightProfile& w,
                             const Kernel& ker, double h, double c, const Nonlinearity& g) {
  if (phi_inf.right_tail.kind != Tail::Kind::Exponential)
    fail(ErrorCode::ConfigError, "phi_inf needs an exponential right tail");
  const double kappa_tail = phi_inf.right_tail.rate;
  const double gk = dispersion_G(ker, h, c, g.gprime0, kappa_tail);
  if (std::abs(gk) > 1e-8)
    fail(ErrorCode::ResidualGrowth,
         "ansatz rate violates the dispersion relation: G = " + std::to_string(gk));

  const Grid& grid = phi_inf.grid;
  GridFunction r = discrete_diffusion(ker, h, phi_inf);
  const GridFunction d = phi_inf.derivative();
  for (long i = 0; i <= grid.n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double unweighted = r.values[k] + c * d.values[k] + g.evaluate(phi_inf.values[k]);
    r.values[k] = unweighted * std::exp(-w.log_omega(grid.x(i)));
  }
  r.left_tail = Tail::zero();
  r.right_tail = Tail::zero();

  // Growth guard: the weighted residual of a consistent ansatz decays on the
  // right; compare the outer 10% against the core.
  double core = 0.0, outer = 0.0;
  for (long i = 0; i <= grid.n; ++i) {
    const double x = grid.x(i);
    const double v = std::abs(r.values[static_cast<std::size_t>(i)]);
    if (x > 0.9 * grid.half_length)
      outer = std::max(outer, v);
    else if (x >= 0.0)
      core = std::max(core, v);
  }
  if (outer > 3.0 * std::max(core, 1e-12))
    fail(ErrorCode::ResidualGrowth, "weighted residual increases toward +L");
  return r;
}

/// Q(v) = omega^{-1} T_{2,g}(phi_inf, omega v), evaluated pointwise. Below a
/// relative threshold the direct remainder has no correct digits, so the
/// local expansion in (omega, v) takes over; for concave quadratic g the two
/// branches coincide exactly.
inline GridFunction quadratic_term(const GridFunction& v, const GridFunction& phi_inf,
                                   const WeightProfile& w, const Nonlinearity& g) {
  require_same_grid(v.grid, phi_inf.grid, "quadratic_term");
  if (v.norm_linf() > 1.0)
    fail(ErrorCode::AmplitudeTooLarge, "quadratic term needs |v| <= 1");
  GridFunction q = GridFunction::zeros(v.grid);
  for (long i = 0; i <= v.grid.n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double a = phi_inf.values[k];
    const double vi = v.values[k];
    const double x = v.grid.x(i);
    const double om = w.omega(x);
    const double b = om * vi;
    if (std::abs(b) > 1e-4 * (1.0 + std::abs(a))) {
      const double t2 = g.evaluate(a + b) - g.evaluate(a) - g.derivative_1(a) * b;
      q.values[k] = t2 * std::exp(-w.log_omega(x));
    } else {
      q.values[k] = 0.5 * g.derivative_2(a) * om * vi * vi +
                    g.derivative_3(a) * om * om * vi * vi * vi / 6.0;
    }
  }
  return q;
}

struct PicardResult {
  GridFunction v;
  int iterations = 0;
  double contraction_ratio = 0.0;
};

/// Picard iteration v_{n+1} = L_h^{-1}(R + Q(v_n)) from v_0 = 0 in the ball
/// {|v|_inf <= ball_radius}, stopping when the combined L2 + Linf step norm
/// drops below tol.
inline PicardResult picard_solve(const OperatorAssembly& op, const GridFunction& r_term,
                                 const std::function<GridFunction(const GridFunction&)>& q_term,
                                 int max_iter = 50, double tol = 1e-12,
                                 double ball_radius = 0.1) {
  require_same_grid(op.grid, r_term.grid, "picard_solve");
  for (int attempt = 0; attempt < 5; ++attempt) {
    GridFunction v = GridFunction::zeros(op.grid);
    std::vector<double> ratios;
    double prev_step = -1.0;
    bool left_ball = false;
    int n = 0;
    for (; n < max_iter; ++n) {
      GridFunction rhs = r_term + q_term(v);
      // The minus sign: the profile equation reads 0 = R + L v + Q(v), so the
      // fixed point is v = -L^{-1}(R + Q(v)).
      GridFunction next = -1.0 * solve_linear(op, rhs);
      if (next.norm_linf() > ball_radius) {
        left_ball = true;
        break;
      }
      const GridFunction diff = next - v;
      const double step = diff.norm_l2() + diff.norm_linf();
      if (prev_step > 0.0) {
        const double ratio = step / prev_step;
        ratios.push_back(ratio);
        if (ratios.size() >= 3 && ratio >= 1.0 && ratios.end()[-2] >= 1.0 &&
            ratios.end()[-3] >= 1.0)
          fail(ErrorCode::NotContracting, "step norms grew three times in a row");
      }
      v = next;
      prev_step = step;
      if (step <= tol) {
        PicardResult res;
        res.v = v;
        res.iterations = n + 1;
        if (!ratios.empty()) {
          std::vector<double> sorted = ratios;
          std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
          res.contraction_ratio = sorted[sorted.size() / 2];
        }
        return res;
      }
    }
    if (left_ball) {
      ball_radius *= 0.5;
      continue;
    }
    fail(ErrorCode::NotContracting,
         "no convergence to tol within max_iter = " + std::to_string(max_iter));
  }
  fail(ErrorCode::LeftBall, "iterate exits the ball even after 4 radius halvings");
}

/// Assembled discrete front with its diagnostics.
struct FrontSolution {
  GridFunction phi_h;
  GridFunction v;
  GridFunction phi_infinity;
  double kappa_h = 0.0;
  double c = 0.0;
  double h = 0.0;
  int picard_iterations = 0;
  double contraction_ratio = 0.0;
  double profile_residual_norm = 0.0;
  double residual_l2 = 0.0;   // |R|_L2 of the ansatz residual
  double residual_linf = 0.0;
};

/// Profile-equation defect |Delta_{a,h} phi + c phi' + g(phi)|_{L2}, with
/// tail-aware shifts and derivative.
inline double profile_residual_norm(const GridFunction& phi, const Kernel& ker, double h,
                                    double c, const Nonlinearity& g) {
  GridFunction r = discrete_diffusion(ker, h, phi);
  const GridFunction d = phi.derivative();
  for (long i = 0; i <= phi.grid.n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    r.values[k] += c * d.values[k] + g.evaluate(phi.values[k]);
  }
  return r.norm_l2();
}

/// phi_h = phi_inf + omega v, plus the heteroclinic limit checks and the
/// final profile-equation verification.
inline FrontSolution reconstruct_and_verify(const GridFunction& phi_inf, const WeightProfile& w,
                                            const GridFunction& v, const Kernel& ker, double h,
                                            double c, const Nonlinearity& g,
                                            double verify_threshold = 1e-7) {
  require_same_grid(phi_inf.grid, v.grid, "reconstruct_and_verify");
  FrontSolution sol;
  sol.phi_infinity = phi_inf;
  sol.v = v;
  sol.c = c;
  sol.h = h;
  if (phi_inf.right_tail.kind == Tail::Kind::Exponential)
    sol.kappa_h = phi_inf.right_tail.rate;

  sol.phi_h = phi_inf;
  for (long i = 0; i <= phi_inf.grid.n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    sol.phi_h.values[k] += w.omega(phi_inf.grid.x(i)) * v.values[k];
  }
  sol.phi_h.left_tail = Tail::constant(sol.phi_h.values.front());
  sol.phi_h.right_tail = Tail::exponential(sol.phi_h.values.back(), sol.kappa_h);

  if (std::abs(sol.phi_h.values.front() - 1.0) > 1e-6 ||
      std::abs(sol.phi_h.values.back()) > 1e-6)
    fail(ErrorCode::VerificationFailure, "heteroclinic limits missed at the domain ends");

  sol.profile_residual_norm = profile_residual_norm(sol.phi_h, ker, h, c, g);
  if (sol.profile_residual_norm > verify_threshold)
    fail(ErrorCode::VerificationFailure,
         "profile residual " + std::to_string(sol.profile_residual_norm) +
             " above the discretization floor");
  return sol;
}

}  // namespace kppfront
