// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <array>

#include "kppfront/grid.hpp"
#include "kppfront/model.hpp"
#include "kppfront/smooth_step.hpp"

namespace kppfront {

/// Wave profile of the continuous problem, normalized by phi0(0) = 1/2,
/// with its tail data. kappa0 is the analytic decay rate (smaller root of
/// kappa^2 - c kappa + g'(0) = 0); kappa0_fitted is the log-slope measured
/// from the computed tail and serves as a cross check.
struct ContinuousFront {
  GridFunction profile;     // phi0
  GridFunction dprofile;    // phi0'
  GridFunction deviation;   // phi0 - 1, exact near the left rest state where
                            // the stored profile quantizes at one ulp of 1
  double speed = 0.0;       // c
  double kappa0 = 0.0;
  double kappa0_fitted = 0.0;
  double amplitude = 0.0;   // coefficient of e^{-kappa0 x} in the right tail
  double delta = 0.0;       // secondary decay margin
  double mu_left = 0.0;     // decay rate of 1 - phi0 at -infinity
};

/// phi0 = indicator_minus + w0 + indicator_plus * amplitude * e^{-kappa0 x}.
struct FarFieldDecomposition {
  GridFunction w0;
  double kappa0 = 0.0;
  double delta = 0.0;
  double amplitude = 0.0;
  // Weighted sup norms certifying the decay rates of w0, its first and
  // second derivative: e^{-delta x} on x < 0 and e^{(kappa0+delta) x} on x > 0.
  double cert_left = 0.0;
  double cert_right = 0.0;
};

/// Weight rate selection of the over-localization step.
struct ThetaChoice {
  double theta = 0.0;
  double margin_spectral = 0.0;   // -(theta^2 - c theta + g'(0)) > 0
  double margin_transport = 0.0;  // c - 2 theta > 0 (the proof's sign)
};

/// Smaller root kappa0 of kappa^2 - c kappa + g'(0) = 0.
inline double spatial_decay_rate(double c, double gprime0) {
  const double disc = c * c - 4.0 * gprime0;
  if (disc <= 1e-12)
    fail(ErrorCode::CriticalOrSubcriticalSpeed,
         "need c > 2 sqrt(g'(0)); discriminant = " + std::to_string(disc));
  return 0.5 * (c - std::sqrt(disc));
}

namespace detail {

/// Least-squares line y = intercept + slope * x.
inline std::pair<double, double> fit_line(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return {slope, intercept};
}

/// Fits log|f| = intercept + slope * x over samples whose magnitude lies in
/// [lo, hi] and whose abscissa is at least xmin. Returns false when the
/// window holds fewer than min_points samples.
inline bool fit_log_tail(const GridFunction& f, double xmin, double lo, double hi,
                         double& slope, double& intercept, int min_points = 20) {
  std::vector<double> xs, ys;
  for (long i = 0; i <= f.grid.n; ++i) {
    const double a = std::abs(f.values[static_cast<std::size_t>(i)]);
    if (f.x(i) >= xmin && a > lo && a < hi) {
      xs.push_back(f.x(i));
      ys.push_back(std::log(a));
    }
  }
  if (static_cast<int>(xs.size()) < min_points) return false;
  std::tie(slope, intercept) = fit_line(xs, ys);
  return true;
}

}  // namespace detail

/// Integrates the profile ODE -c phi' = phi'' + g(phi) from the unstable
/// manifold of (1,0) and normalizes phi(0) = 1/2.
///
/// The state is the deviation (p, q) = (phi - 1, phi'), which keeps relative
/// precision near the rest state where absolute coordinates would round the
/// unstable direction away. Pass one locates the half crossing by marching
/// and bisecting; pass two re-integrates with fixed Runge-Kutta substeps
/// aligned to the output grid. Both passes share the same integrator, so the
/// located crossing agrees with the sampled trajectory. Grid points left of
/// the integration start are filled from the linearized flow, which is exact
/// there to quadratic order in the 1e-8 manifold offset.
inline ContinuousFront solve_continuous_front(const Nonlinearity& g, double c, const Grid& grid) {
  using State = std::array<double, 2>;

  const double kappa0 = spatial_decay_rate(c, g.gprime0);
  if (std::exp(-kappa0 * grid.half_length) >= 1e-12)
    fail(ErrorCode::ConfigError, "domain too short: e^{-kappa0 L} >= 1e-12");
  const double mu_left = 0.5 * (-c + std::sqrt(c * c - 4.0 * g.gprime1));

  // Two charts of the same trajectory: the deviation (p, q) = (phi - 1, phi')
  // keeps relative precision near the rest state 1; absolute (phi, phi') does
  // near 0. Integration switches charts at the half crossing, where both are
  // well conditioned.
  auto rhs_dev = [&](const State& y, State& dy) {
    dy[0] = y[1];
    dy[1] = -c * y[1] - g.evaluate(1.0 + y[0]);
  };
  auto rhs_abs = [&](const State& y, State& dy) {
    dy[0] = y[1];
    dy[1] = -c * y[1] - g.evaluate(y[0]);
  };

  auto rk4_span = [&](State y, double span, int steps, auto&& rhs) {
    const double dt = span / steps;
    for (int s = 0; s < steps; ++s) {
      State k1, k2, k3, k4, tmp;
      rhs(y, k1);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
      rhs(tmp, k2);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
      rhs(tmp, k3);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + dt * k3[j];
      rhs(tmp, k4);
      for (int j = 0; j < 2; ++j) y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
  };

  constexpr double kOffset = 1e-8;
  const State y_start = {-kOffset, -kOffset * mu_left};

  // Pass 1: march in chunks until phi crosses 1/2, then bisect inside the
  // bracketing chunk by re-integration from its checkpoint.
  double xi_half = -1.0;
  {
    constexpr double kChunk = 0.25;
    constexpr int kChunkSteps = 125;  // dt = 0.002
    const double xi_limit = 2.0 * grid.half_length + 400.0;
    State y = y_start;
    double xi = 0.0;
    while (xi < xi_limit) {
      const State y_next = rk4_span(y, kChunk, kChunkSteps, rhs_dev);
      if (y_next[0] <= -0.5) {
        double lo = 0.0, hi = kChunk;
        for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
          const double mid = 0.5 * (lo + hi);
          const State ym = rk4_span(y, mid, 64, rhs_dev);
          (ym[0] > -0.5 ? lo : hi) = mid;
        }
        xi_half = xi + 0.5 * (lo + hi);
        break;
      }
      if (y_next[0] < -1.5) fail(ErrorCode::NonMonotoneProfile, "trajectory overshoots");
      y = y_next;
      xi += kChunk;
    }
  }
  if (xi_half < 0.0) fail(ErrorCode::NonMonotoneProfile, "no half crossing before the cutoff");

  // Pass 2: fixed-substep RK4 through the grid points xi_i = x_i + xi_half.
  ContinuousFront front;
  front.speed = c;
  front.kappa0 = kappa0;
  front.mu_left = mu_left;
  front.profile.grid = grid;
  front.profile.values.resize(static_cast<std::size_t>(grid.size()));
  front.dprofile.grid = grid;
  front.dprofile.values.resize(static_cast<std::size_t>(grid.size()));
  front.deviation.grid = grid;
  front.deviation.values.resize(static_cast<std::size_t>(grid.size()));

  auto store_dev = [&](long i, const State& y) {
    front.profile.values[static_cast<std::size_t>(i)] = 1.0 + y[0];
    front.dprofile.values[static_cast<std::size_t>(i)] = y[1];
    front.deviation.values[static_cast<std::size_t>(i)] = y[0];
  };
  auto store_abs = [&](long i, const State& y) {
    front.profile.values[static_cast<std::size_t>(i)] = y[0];
    front.dprofile.values[static_cast<std::size_t>(i)] = y[1];
    front.deviation.values[static_cast<std::size_t>(i)] = y[0] - 1.0;
  };

  const double dx = grid.dx();
  const int n_sub = std::max(4, static_cast<int>(std::ceil(dx / 0.002)));

  State y = y_start;
  double xi_prev = 0.0;
  bool dev_chart = true;
  for (long i = 0; i <= grid.n; ++i) {
    const double xi = grid.x(i) + xi_half;
    if (xi <= 0.0) {
      const double dev = kOffset * std::exp(mu_left * xi);
      store_dev(i, {-dev, -mu_left * dev});
      continue;
    }
    if (dev_chart && xi >= xi_half) {
      // Advance to the crossing in the deviation chart, then switch.
      y = rk4_span(y, xi_half - xi_prev, n_sub, rhs_dev);
      y[0] += 1.0;
      xi_prev = xi_half;
      dev_chart = false;
    }
    if (dev_chart) {
      y = rk4_span(y, xi - xi_prev, n_sub, rhs_dev);
      xi_prev = xi;
      store_dev(i, y);
    } else {
      y = rk4_span(y, xi - xi_prev, n_sub, rhs_abs);
      xi_prev = xi;
      store_abs(i, y);
    }
  }

  for (long i = 0; i <= grid.n; ++i) {
    const double phi = front.profile.values[static_cast<std::size_t>(i)];
    if (phi < -1e-9) fail(ErrorCode::NonMonotoneProfile, "profile overshoots below zero");
    if (i > 0 && phi > front.profile.values[static_cast<std::size_t>(i - 1)] + 1e-13)
      fail(ErrorCode::NonMonotoneProfile, "profile is not decreasing");
  }

  // Tail fit on the right: slope cross-check and the e^{-kappa0 x} amplitude.
  double slope = 0.0, intercept = 0.0;
  if (!detail::fit_log_tail(front.profile, 2.0, 1e-24, 1e-14, slope, intercept))
    fail(ErrorCode::TailFitFailure, "no usable window for the decay-rate fit");
  front.kappa0_fitted = -slope;
  // Amplitude with the analytic rate frozen: log A = mean(log phi + kappa0 x).
  {
    double acc = 0.0;
    long cnt = 0;
    for (long i = 0; i <= grid.n; ++i) {
      const double v = front.profile.values[static_cast<std::size_t>(i)];
      if (front.profile.x(i) >= 2.0 && v > 1e-24 && v < 1e-14) {
        acc += std::log(v) + kappa0 * front.profile.x(i);
        ++cnt;
      }
    }
    front.amplitude = std::exp(acc / static_cast<double>(cnt));
  }

  // Secondary margin delta: next-order tail exponent of phi0 - A e^{-kappa0 x},
  // capped by kappa0/2 and by the left rate so both certificates can hold.
  {
    GridFunction resid = front.profile;
    for (long i = 0; i <= grid.n; ++i)
      resid.values[static_cast<std::size_t>(i)] -=
          front.amplitude * std::exp(-kappa0 * resid.x(i));
    double rs = 0.0, ri = 0.0;
    double cap = mu_left;  // fallback when the correction tail is below noise
    if (detail::fit_log_tail(resid, 3.0, 1e-13, 1e-5, rs, ri) && -rs > kappa0)
      cap = std::min(cap, 0.95 * (-rs - kappa0));
    front.delta = std::min(0.5 * kappa0, cap);
    if (!(front.delta > 0.0)) fail(ErrorCode::TailFitFailure, "non-positive delta margin");
  }

  front.profile.left_tail = Tail::constant(front.profile.values.front());
  front.profile.right_tail = Tail::exponential(front.profile.values.back(), kappa0);
  front.dprofile.left_tail = Tail::zero();
  front.dprofile.right_tail =
      Tail::exponential(front.dprofile.values.back(), kappa0);
  front.deviation.left_tail = Tail::exponential(front.deviation.values.front(), mu_left);
  front.deviation.right_tail = Tail::constant(front.deviation.values.back());
  return front;
}

inline ContinuousFront solve_continuous_front(const Nonlinearity& g, double c,
                                              double half_length, double step) {
  return solve_continuous_front(g, c, Grid::make(half_length, step, 1));
}

/// Splits the profile into the far-field pieces and certifies the decay of
/// the localized remainder w0 = phi0 - 1_- - 1_+ A e^{-kappa0 x}.
///
/// Beyond the point where the raw subtraction is dominated by rounding in
/// phi0, the samples are replaced by the fitted exponential tail; the stored
/// tail descriptors then extend w0 smoothly past the domain.
inline FarFieldDecomposition decompose_front(const ContinuousFront& front) {
  FarFieldDecomposition dec;
  dec.kappa0 = front.kappa0;
  dec.delta = front.delta;
  dec.amplitude = front.amplitude;

  // w0 = phi0 - 1_- - 1_+ A e^{-kappa0 x} = (phi0 - 1) + 1_+ (1 - A e^{-kappa0 x}).
  // Built from the stored deviation so the left side never touches the
  // one-ulp quantization of phi0 near 1.
  const Grid& grid = front.profile.grid;
  dec.w0.grid = grid;
  dec.w0.values.resize(static_cast<std::size_t>(grid.size()));
  for (long i = 0; i <= grid.n; ++i) {
    const double x = grid.x(i);
    const double dev = front.deviation.values[static_cast<std::size_t>(i)];
    dec.w0.values[static_cast<std::size_t>(i)] =
        dev + indicator_plus(x) * (1.0 - front.amplitude * std::exp(-front.kappa0 * x));
  }

  // Right-tail splice: the subtraction loses all digits once the correction
  // falls below ~1e-16 * leading tail. Beyond the anchor index the samples
  // continue the last clean value with the fitted rate, so the extension is
  // continuous and the stored derivative sees no jump.
  double slope = 0.0, intercept = 0.0;
  if (detail::fit_log_tail(dec.w0, 2.0, 1e-12, 1e-6, slope, intercept) && slope < 0.0) {
    const double x_splice = (std::log(1e-10) - intercept) / slope;
    long anchor = -1;
    for (long i = 0; i <= grid.n; ++i)
      if (grid.x(i) <= x_splice) anchor = i;
    if (anchor > 0 && anchor < grid.n) {
      const double base = dec.w0.values[static_cast<std::size_t>(anchor)];
      for (long i = anchor + 1; i <= grid.n; ++i)
        dec.w0.values[static_cast<std::size_t>(i)] =
            base * std::exp(slope * (grid.x(i) - grid.x(anchor)));
    }
    dec.w0.right_tail = Tail::exponential(dec.w0.values.back(), -slope);
  } else {
    dec.w0.right_tail = Tail::exponential(dec.w0.values.back(), front.kappa0 + front.delta);
  }
  dec.w0.left_tail = Tail::exponential(dec.w0.values.front(), front.mu_left);

  // Decay certificates for w0, w0', w0''; failure = the weighted sup is
  // carried by the domain ends instead of the core.
  const GridFunction d1 = dec.w0.derivative();
  const GridFunction d2 = d1.derivative();
  double left = 0.0, right = 0.0, left_end = 0.0, right_end = 0.0;
  const std::array<const GridFunction*, 3> pieces = {&dec.w0, &d1, &d2};
  for (const GridFunction* f : pieces) {
    for (long i = 0; i <= grid.n; ++i) {
      const double x = grid.x(i);
      const double v = std::abs(f->values[static_cast<std::size_t>(i)]);
      if (x < 0.0) {
        const double wl = v * std::exp(-front.delta * x);
        left = std::max(left, wl);
        if (x < -0.9 * grid.half_length) left_end = std::max(left_end, wl);
      } else {
        const double wr = v * std::exp((front.kappa0 + front.delta) * x);
        right = std::max(right, wr);
        if (x > 0.9 * grid.half_length) right_end = std::max(right_end, wr);
      }
    }
  }
  dec.cert_left = left;
  dec.cert_right = right;
  if (!(std::isfinite(left) && std::isfinite(right)))
    fail(ErrorCode::DecayCertificateFailure, "weighted sup norm is not finite");
  if (left_end > 0.5 * left || right_end > 0.5 * right)
    fail(ErrorCode::DecayCertificateFailure,
         "weighted sup norm grows toward the domain ends");
  return dec;
}

/// theta = kappa0 + min(delta/4, (c/2 - kappa0)/2, (kappa_plus - kappa0)/2),
/// one concrete choice in the admissible window. Lies strictly between
/// kappa0 and both c/2 and kappa_plus, so the spectral inequality
/// theta^2 - c theta + g'(0) < 0 and the transport sign c - 2 theta > 0 hold.
inline ThetaChoice choose_theta(double c, double gprime0, double kappa0, double delta) {
  const double disc = c * c - 4.0 * gprime0;
  if (disc <= 1e-12) fail(ErrorCode::CriticalOrSubcriticalSpeed, "choose_theta: c too small");
  const double kappa_plus = 0.5 * (c + std::sqrt(disc));
  ThetaChoice t;
  t.theta = kappa0 + std::min({delta / 4.0, (c / 2.0 - kappa0) / 2.0, (kappa_plus - kappa0) / 2.0});
  t.margin_spectral = -(t.theta * t.theta - c * t.theta + gprime0);
  t.margin_transport = c - 2.0 * t.theta;
  if (!(t.theta > kappa0 && t.theta < kappa0 + delta / 2.0 && t.margin_spectral > 0.0 &&
        t.margin_transport > 0.0))
    fail(ErrorCode::NoAdmissibleTheta, "theta certificates failed");
  return t;
}

}  // namespace kppfront
