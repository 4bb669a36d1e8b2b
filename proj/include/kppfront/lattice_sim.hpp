// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "kppfront/grid_ops.hpp"
#include "kppfront/model.hpp"

namespace kppfront {

/// State of the lattice ODE system on sites j = -J..J.
struct LatticeState {
  std::vector<double> u;  // size 2J+1
  double h = 0.0;
  double time = 0.0;

  long sites() const { return static_cast<long>(u.size()); }
  long j_max() const { return (sites() - 1) / 2; }
  double x(long idx) const { return (static_cast<double>(idx) - j_max()) * h; }
};

/// u_dot_j = sum_k a_k (u_{j+k} - 2 u_j + u_{j-k})/(k^2 h^2) + g(u_j), with
/// clamped extension at both ends (fronts connect distinct states, so a
/// periodic closure would be inconsistent).
inline std::vector<double> lattice_rhs(const LatticeState& s, const Kernel& ker,
                                       const Nonlinearity& g) {
  const long n = s.sites();
  if (n <= 2 * ker.max_range())
    fail(ErrorCode::ConfigError, "lattice needs J > K_max");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double h2inv = 1.0 / (s.h * s.h);
  auto at = [&](long j) {
    if (j < 0) return s.u.front();
    if (j >= n) return s.u.back();
    return s.u[static_cast<std::size_t>(j)];
  };
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int k = 1; k <= ker.max_range(); ++k)
      acc += ker.a(k) * (at(j + k) - 2.0 * at(j) + at(j - k)) / (k * k);
    out[static_cast<std::size_t>(j)] =
        acc * h2inv + g.evaluate(s.u[static_cast<std::size_t>(j)]);
  }
  return out;
}

/// Explicit time-stepping cap: a fixed fraction of the inverse modulus of the
/// most negative diffusion symbol value plus the reaction slope.
inline double stability_cap(const Kernel& ker, const Nonlinearity& g, double h) {
  const double diffusion = std::abs(diffusion_symbol_floor(ker, h));
  const double reaction = std::max(std::abs(g.gprime0), std::abs(g.gprime1));
  return 0.2 / (diffusion + reaction);
}

/// One tracked point of the front: where linear interpolation of u crosses 1/2.
struct LevelCrossing {
  double t = 0.0;
  double x = 0.0;
};

/// Trajectory summary of a lattice integration.
struct TrajectorySummary {
  std::vector<LevelCrossing> track;         // x_{1/2}(t), sampled
  std::vector<double> final_state;          // u at t = T
  std::vector<std::pair<double, std::vector<double>>> snapshots;
  double h = 0.0;
  double dt = 0.0;
  double T = 0.0;
};

namespace detail {

inline void rk4_step(LatticeState& s, const Kernel& ker, const Nonlinearity& g, double dt) {
  const long n = s.sites();
  const std::vector<double> k1 = lattice_rhs(s, ker, g);
  LatticeState tmp = s;
  for (long j = 0; j < n; ++j) tmp.u[j] = s.u[j] + 0.5 * dt * k1[j];
  const std::vector<double> k2 = lattice_rhs(tmp, ker, g);
  for (long j = 0; j < n; ++j) tmp.u[j] = s.u[j] + 0.5 * dt * k2[j];
  const std::vector<double> k3 = lattice_rhs(tmp, ker, g);
  for (long j = 0; j < n; ++j) tmp.u[j] = s.u[j] + dt * k3[j];
  const std::vector<double> k4 = lattice_rhs(tmp, ker, g);
  for (long j = 0; j < n; ++j)
    s.u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  s.time += dt;
}

/// First downward crossing of 1/2, linearly interpolated; NaN if none.
inline double half_crossing(const LatticeState& s) {
  for (long j = 0; j + 1 < s.sites(); ++j) {
    const double a = s.u[static_cast<std::size_t>(j)];
    const double b = s.u[static_cast<std::size_t>(j + 1)];
    if (a >= 0.5 && b < 0.5) return s.x(j) + s.h * (a - 0.5) / (a - b);
  }
  return std::nan("");
}

}  // namespace detail

/// Classical RK4 with fixed step. Tracks the half-level crossing and guards
/// against blow-up; values must stay in [-0.1, 1.1] for front data.
inline TrajectorySummary integrate(LatticeState state, const Kernel& ker,
                                   const Nonlinearity& g, double dt, double t_final,
                                   int snapshot_count = 0) {
  if (!(dt > 0.0) || !(t_final > 0.0))
    fail(ErrorCode::ConfigError, "integrate needs dt > 0 and T > 0");
  const double cap = stability_cap(ker, g, state.h);
  if (dt > cap)
    fail(ErrorCode::StabilityCapViolated,
         "dt = " + std::to_string(dt) + " above cap " + std::to_string(cap));

  TrajectorySummary out;
  out.h = state.h;
  out.dt = dt;
  out.T = t_final;
  const long steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
  const long track_every = std::max<long>(1, steps / 400);
  const long snap_every = snapshot_count > 0 ? std::max<long>(1, steps / snapshot_count) : 0;

  auto record = [&]() {
    const double xc = detail::half_crossing(state);
    if (std::isfinite(xc)) out.track.push_back({state.time, xc});
  };
  record();
  for (long s = 0; s < steps; ++s) {
    const double step_dt = std::min(dt, t_final - state.time);
    detail::rk4_step(state, ker, g, step_dt);
    if (s % track_every == 0 || s == steps - 1) record();
    if (snap_every > 0 && (s % snap_every == 0 || s == steps - 1))
      out.snapshots.emplace_back(state.time, state.u);
    for (double v : state.u)
      if (!(v > -0.1 && v < 1.1))
        fail(ErrorCode::BlowUp, "state left [-0.1, 1.1] at t = " + std::to_string(state.time));
  }
  out.final_state = std::move(state.u);
  return out;
}

struct SpeedFit {
  double speed = 0.0;
  double r_squared = 1.0;
  long samples = 0;
};

/// Least-squares slope of the level-crossing track after a burn-in of T/5.
inline SpeedFit measure_speed(const std::vector<LevelCrossing>& track, double t_final) {
  std::vector<double> ts, xs;
  for (const auto& p : track)
    if (p.t >= t_final / 5.0) {
      ts.push_back(p.t);
      xs.push_back(p.x);
    }
  if (ts.size() < 50)
    fail(ErrorCode::PoorFit, "only " + std::to_string(ts.size()) + " samples after burn-in");
  const double n = static_cast<double>(ts.size());
  double st = 0, sx = 0, stt = 0, stx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sx += xs[i];
    stt += ts[i] * ts[i];
    stx += ts[i] * xs[i];
  }
  SpeedFit fit;
  fit.samples = static_cast<long>(ts.size());
  fit.speed = (n * stx - st * sx) / (n * stt - st * st);
  const double mean_x = sx / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double pred = mean_x + fit.speed * (ts[i] - st / n);
    ss_res += (xs[i] - pred) * (xs[i] - pred);
    ss_tot += (xs[i] - mean_x) * (xs[i] - mean_x);
  }
  fit.r_squared = ss_tot > 1e-300 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-20 ? 1.0 : 0.0);
  if (fit.r_squared < 0.999)
    fail(ErrorCode::PoorFit, "r^2 = " + std::to_string(fit.r_squared));
  return fit;
}

}  // namespace kppfront
