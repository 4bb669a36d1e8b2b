// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <algorithm>
#include <cmath>

#include "kppfront/front_solver.hpp"
#include "kppfront/lattice_sim.hpp"

namespace kppfront {

/// Knobs of one front construction. Everything has a default; the CLI
/// materializes the resolved values into the run summary.
struct PipelineOptions {
  int refinement = 2;               // fine-grid refinement m (dx = h/m)
  double half_length = 0.0;         // 0 = auto: max(40/kappa0, 40/delta, 40)
  double weight_epsilon = 0.05;     // smoothing tolerance of the C-inf weight
  double picard_tol = 1e-12;
  int picard_max_iter = 50;
  double ball_radius = 0.1;
  double verify_threshold = 1e-7;
  double probe_half_length = 25.0;  // spectral probes run on this window
  unsigned seed = 0;
};

/// Everything one (g, kernel, c, h) construction produces.
struct PipelineResult {
  Grid grid;
  ContinuousFront continuum;
  FarFieldDecomposition decomposition;
  ThetaChoice theta;
  WeightProfile weight;
  DecayRateSolution decay;
  GridFunction phi_inf;
  GridFunction weighted_residual;
  FrontSolution front;
};

inline double auto_half_length(double kappa0, double delta) {
  return std::max({40.0 / kappa0, 40.0 / delta, 40.0});
}

/// Runs the constructive pipeline: continuum front, far-field decomposition,
/// weight selection, discrete decay rate, ansatz, residual, Picard solve,
/// reconstruction and verification.
inline PipelineResult solve_front(const Nonlinearity& g, const Kernel& ker, double c, double h,
                                  const PipelineOptions& opts = {}) {
  PipelineResult out;
  const double kappa0 = spatial_decay_rate(c, g.gprime0);
  const double target_L =
      opts.half_length > 0.0 ? opts.half_length : auto_half_length(kappa0, kappa0 / 2.0);
  out.grid = Grid::make(target_L, h, opts.refinement);

  out.continuum = solve_continuous_front(g, c, out.grid);
  out.decomposition = decompose_front(out.continuum);
  out.theta = choose_theta(c, g.gprime0, out.continuum.kappa0, out.continuum.delta);
  out.weight = build_weight(out.theta.theta, opts.weight_epsilon);
  out.decay = solve_decay_rate(ker, h, c, g.gprime0);
  out.phi_inf = build_far_field(out.decomposition, out.decay.kappa_h, out.grid);
  out.weighted_residual = residual(out.phi_inf, out.weight, ker, h, c, g);

  OperatorAssembly op = assemble_direct(out.phi_inf, out.weight, ker, h, c, g);
  auto q_closure = [&](const GridFunction& v) {
    return quadratic_term(v, out.phi_inf, out.weight, g);
  };
  PicardResult picard = picard_solve(op, out.weighted_residual, q_closure,
                                     opts.picard_max_iter, opts.picard_tol, opts.ball_radius);

  out.front = reconstruct_and_verify(out.phi_inf, out.weight, picard.v, ker, h, c, g,
                                     opts.verify_threshold);
  out.front.picard_iterations = picard.iterations;
  out.front.contraction_ratio = picard.contraction_ratio;
  out.front.residual_l2 = out.weighted_residual.norm_l2();
  out.front.residual_linf = out.weighted_residual.norm_linf();
  return out;
}

/// Spectral probes on a reduced window (the diagnostics do not need the full
/// front domain). Reuses the decomposition of a finished pipeline run.
inline SpectralReport probe_spectrum(const PipelineResult& pipe, const Nonlinearity& g,
                                     const Kernel& ker, double c, double h,
                                     const PipelineOptions& opts = {}) {
  Grid probe_grid = Grid::make(opts.probe_half_length, h, opts.refinement);
  GridFunction phi_inf = build_far_field(pipe.decomposition, pipe.decay.kappa_h, probe_grid);
  SpectralReport rep;
  rep.h = h;
  rep.c = c;
  rep.kernel_id = ker.id;
  OperatorAssembly direct = assemble_direct(phi_inf, pipe.weight, ker, h, c, g);
  OperatorAssembly adjoint = assemble_adjoint_expanded(phi_inf, pipe.weight, ker, h, c, g);
  OperatorAssembly continuous = assemble_continuous(phi_inf, pipe.weight, c, g);
  rep.lambda_h = lambda_probe(direct, opts.seed);
  rep.lambda_h_adjoint = lambda_probe(adjoint, opts.seed);
  rep.numerical_range_margin = numerical_range_margin(continuous, opts.seed);
  return rep;
}

/// Lattice verification: seed the lattice with phi_h samples, integrate, and
/// fit the crossing speed. Returns the fit plus the sup-norm shape drift
/// max_j |u_j(T) - phi_h(j h - c T)| over sites 5 K_max away from the ends.
struct WaveVerification {
  SpeedFit fit;
  double shape_drift = 0.0;
  double dt = 0.0;
};

inline WaveVerification verify_wave(const FrontSolution& front, const Kernel& ker,
                                    const Nonlinearity& g, double t_final, long j_max = 0,
                                    double dt = 0.0) {
  const double h = front.h;
  const double span_needed = front.c * t_final + 30.0;
  if (j_max <= 0) j_max = static_cast<long>(std::ceil(2.0 * span_needed / h));
  LatticeState state;
  state.h = h;
  state.u.resize(static_cast<std::size_t>(2 * j_max + 1));
  for (long j = -j_max; j <= j_max; ++j)
    state.u[static_cast<std::size_t>(j + j_max)] = front.phi_h.eval(j * h);

  const double cap = stability_cap(ker, g, h);
  if (dt <= 0.0) dt = 0.9 * cap;

  WaveVerification out;
  out.dt = dt;
  TrajectorySummary traj = integrate(state, ker, g, dt, t_final);
  out.fit = measure_speed(traj.track, t_final);

  const long guard = 5 * ker.max_range();
  for (long j = -j_max + guard; j <= j_max - guard; ++j) {
    const double expected = front.phi_h.eval(j * h - front.c * t_final);
    const double got = traj.final_state[static_cast<std::size_t>(j + j_max)];
    out.shape_drift = std::max(out.shape_drift, std::abs(got - expected));
  }
  return out;
}

}  // namespace kppfront
