// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "kppfront/errors.hpp"
#include "kppfront/grid.hpp"
#include "kppfront/smooth_step.hpp"

namespace kppfront {

namespace detail {

/// Nodes and weights of 20-point Gauss-Legendre on [-1, 1].
struct GaussLegendre20 {
  static constexpr std::array<double, 10> nodes = {
      0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
      0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
      0.9639719272779138, 0.9931285991850949};
  static constexpr std::array<double, 10> weights = {
      0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
      0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
      0.0406014298003869, 0.0176140071391521};

  template <typename F>
  static double integrate(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * (f(mid + half * nodes[i]) + f(mid - half * nodes[i]));
    return s * half;
  }
};

/// Composite quadrature over [a, b] with splits at interior kink points and
/// four panels per analytic piece.
template <typename F>
inline double integrate_piecewise(F&& f, double a, double b, const std::vector<double>& kinks) {
  std::vector<double> cuts = {a, b};
  for (double k : kinks)
    if (k > a + 1e-300 && k < b - 1e-300) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    for (int p = 0; p < 4; ++p) {
      const double pa = lo + (hi - lo) * p / 4.0;
      const double pb = lo + (hi - lo) * (p + 1) / 4.0;
      s += GaussLegendre20::integrate(f, pa, pb);
    }
  }
  return s;
}

}  // namespace detail

/// Piecewise definition of the initial over-localized weight: 1 on the left,
/// a Gaussian bridge on (-1,1), then the pure exponential e^{-theta x}.
/// The second derivative jumps at the junctions; the mollified profile below
/// smooths that on a macroscopic window.
struct TildeWeight {
  double theta = 0.0;

  struct Jet {
    double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  };

  Jet jet(double x) const {
    Jet j;
    if (x <= -1.0) {
      j.v = 1.0;
      return j;
    }
    if (x >= 1.0) {
      j.v = std::exp(-theta * x);
      j.d1 = -theta * j.v;
      j.d2 = theta * theta * j.v;
      j.d3 = -theta * theta * theta * j.v;
      return j;
    }
    const double u = x + 1.0;
    const double e = std::exp(-theta * u * u / 4.0);
    const double a1 = -theta * u / 2.0;  // (log e)'
    j.v = e;
    j.d1 = a1 * e;
    j.d2 = (a1 * a1 - theta / 2.0) * e;
    j.d3 = (a1 * a1 * a1 - 1.5 * theta * a1) * e;
    return j;
  }

  double value(double x) const { return jet(x).v; }
};

/// The smoothed weight omega = chi * varpi + (1 - chi) * tilde, where varpi
/// is the mollification of tilde with a compactly supported bump of width
/// `width` and chi is 1 on (-3/2,3/2), 0 outside (-2,2).
///
/// Derivatives: varpi^(j) = tilde^(j) * psi for j <= 2 and
/// varpi''' = tilde'' * psi', so the delta parts of tilde''' at the junctions
/// are never touched. Mollification preserves |varpi'/varpi| <= theta because
/// |tilde'| <= theta * tilde pointwise.
class WeightProfile {
 public:
  WeightProfile() = default;

  static WeightProfile identity() {
    WeightProfile w;
    w.identity_ = true;
    w.theta_ = 0.0;
    w.epsilon_ = 0.0;
    return w;
  }

  double theta() const { return theta_; }
  /// Reported smoothing tolerance: the measured W^{1,inf} grid distance to
  /// the tilde weight (at least the requested one).
  double epsilon() const { return epsilon_; }
  double width() const { return width_; }
  bool is_identity() const { return identity_; }

  struct Jet {
    double v = 1.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  };

  Jet jet(double x) const {
    if (identity_) return {1.0, 0.0, 0.0, 0.0};
    const TildeWeight tw{theta_};
    if (x <= -2.0 || x >= 2.0) {
      const auto t = tw.jet(x);
      return {t.v, t.d1, t.d2, t.d3};
    }
    const auto t = tw.jet(x);
    const auto c = chi_.jet(x);
    if (c.v == 0.0) return {t.v, t.d1, t.d2, t.d3};
    const Jet p = mollified(x);
    // omega = tilde + chi (varpi - tilde); Leibniz up to third order.
    const double d0 = p.v - t.v;
    const double d1 = p.d1 - t.d1;
    const double d2 = p.d2 - t.d2;
    const double d3 = p.d3 - t.d3;
    Jet j;
    j.v = t.v + c.v * d0;
    j.d1 = t.d1 + c.d1 * d0 + c.v * d1;
    j.d2 = t.d2 + c.d2 * d0 + 2.0 * c.d1 * d1 + c.v * d2;
    j.d3 = t.d3 + c.d3 * d0 + 3.0 * c.d2 * d1 + 3.0 * c.d1 * d2 + c.v * d3;
    return j;
  }

  double omega(double x) const { return jet(x).v; }
  double domega(double x) const { return jet(x).d1; }
  double d2omega(double x) const { return jet(x).d2; }
  double d3omega(double x) const { return jet(x).d3; }

  double log_omega(double x) const {
    if (identity_) return 0.0;
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return -theta_ * x;
    return std::log(jet(x).v);
  }

  /// omega(y) / omega(x), stable for arguments deep in the exponential region.
  double ratio(double x, double y) const { return std::exp(log_omega(y) - log_omega(x)); }

  /// sup_x sup_{|y-x| <= span} omega(y)/omega(x). Analytic on the pure
  /// exponential pieces, swept numerically across the transition zone.
  double ratio_bound(double span) const {
    if (span < 0.0) fail(ErrorCode::ConfigError, "ratio_bound needs span >= 0");
    if (identity_ || span == 0.0) return 1.0;
    double best = std::exp(theta_ * span);  // attained on x >= 2
    const double lo = -2.0 - span, hi = 2.0 + span;
    const int nx = 800, ny = 160;
    for (int i = 0; i <= nx; ++i) {
      const double x = lo + (hi - lo) * i / nx;
      const double lwx = log_omega(x);
      for (int j = 0; j <= ny; ++j) {
        const double y = x - span + 2.0 * span * j / ny;
        best = std::max(best, std::exp(log_omega(y) - lwx));
      }
    }
    return best;
  }

  friend WeightProfile build_weight(double theta, double epsilon);

 private:
  Jet mollified(double x) const {
    const TildeWeight tw{theta_};
    const std::vector<double> kinks = {x - 1.0, x + 1.0};
    auto psi = [&](double s) {
      const double t = s / width_;
      if (std::abs(t) >= 1.0) return 0.0;
      return std::exp(-1.0 / (1.0 - t * t)) / (width_ * bump_mass_);
    };
    auto dpsi = [&](double s) {
      const double t = s / width_;
      if (std::abs(t) >= 1.0) return 0.0;
      const double q = 1.0 - t * t;
      return std::exp(-1.0 / q) * (-2.0 * t / (q * q)) / (width_ * width_ * bump_mass_);
    };
    Jet j;
    j.v = detail::integrate_piecewise(
        [&](double s) { return tw.value(x - s) * psi(s); }, -width_, width_, kinks);
    j.d1 = detail::integrate_piecewise(
        [&](double s) { return tw.jet(x - s).d1 * psi(s); }, -width_, width_, kinks);
    j.d2 = detail::integrate_piecewise(
        [&](double s) { return tw.jet(x - s).d2 * psi(s); }, -width_, width_, kinks);
    j.d3 = detail::integrate_piecewise(
        [&](double s) { return tw.jet(x - s).d2 * dpsi(s); }, -width_, width_, kinks);
    return j;
  }

  double theta_ = 0.0;
  double epsilon_ = 0.0;
  double width_ = 0.5;
  bool identity_ = false;
  SmoothCutoff chi_{1.5, 2.0};
  // mass of exp(-1/(1-t^2)) on (-1,1); fixed by quadrature at construction
  double bump_mass_ = 0.0;
};

/// Sampled weight data on a grid, shared by the operator assemblies.
struct WeightSamples {
  std::vector<double> log_omega;     // log of the weight
  std::vector<double> ratio1;        // omega'/omega
  std::vector<double> ratio2;        // omega''/omega
};

inline WeightSamples sample_weight(const WeightProfile& w, const Grid& grid) {
  WeightSamples s;
  const std::size_t n = static_cast<std::size_t>(grid.size());
  s.log_omega.resize(n);
  s.ratio1.resize(n);
  s.ratio2.resize(n);
  for (long i = 0; i <= grid.n; ++i) {
    const auto j = w.jet(grid.x(i));
    const std::size_t k = static_cast<std::size_t>(i);
    s.log_omega[k] = w.log_omega(grid.x(i));
    s.ratio1[k] = j.d1 / j.v;
    s.ratio2[k] = j.d2 / j.v;
  }
  return s;
}

/// Builds the C-infinity weight for the rate theta.
///
/// The mollifier width starts at 1/2 and is halved (at most 50 times) until
/// the W^{1,inf} distance to the tilde weight, measured on a fine grid, drops
/// below epsilon. The second-derivative distance cannot be driven below half
/// the junction jump of tilde'' by any smooth profile, so it is reported, not
/// enforced. Widths much below the lattice shifts would also re-introduce an
/// O(1) second-difference defect into the weighted operator expansion, which
/// is why epsilon defaults to a few percent rather than to spectral-margin
/// scale; the sign certificates downstream hold with slack at that size.
inline WeightProfile build_weight(double theta, double epsilon = 0.05) {
  if (!(theta > 0.0) || !(epsilon > 0.0))
    fail(ErrorCode::ConfigError, "build_weight needs theta > 0 and epsilon > 0");
  WeightProfile w;
  w.theta_ = theta;
  w.bump_mass_ = detail::integrate_piecewise(
      [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }, -1.0,
      1.0, {-0.5, 0.0, 0.5});

  const TildeWeight tw{theta};
  const int n_check = 2000;
  double width = 0.5;
  for (int attempt = 0; attempt <= 50; ++attempt) {
    w.width_ = width;
    double d01 = 0.0;
    for (int i = 0; i <= n_check; ++i) {
      const double x = -2.0 + 4.0 * i / n_check;
      const auto a = w.jet(x);
      const auto b = tw.jet(x);
      d01 = std::max(d01, std::max(std::abs(a.v - b.v), std::abs(a.d1 - b.d1)));
    }
    if (d01 <= epsilon) {
      w.epsilon_ = std::max(d01, 1e-15);
      return w;
    }
    width *= 0.5;
  }
  fail(ErrorCode::SmoothingFailure, "width search exhausted 50 halvings");
}

/// W^{2,inf} grid distances between omega and the tilde weight, for the
/// smoothing report: {sup|d0|, sup|d1|, sup|d2|} on a uniform grid of [-2,2].
inline std::array<double, 3> smoothing_distances(const WeightProfile& w, int points = 100000) {
  const TildeWeight tw{w.theta()};
  std::array<double, 3> d = {0.0, 0.0, 0.0};
  for (int i = 0; i <= points; ++i) {
    const double x = -2.0 + 4.0 * i / points;
    const auto a = w.jet(x);
    const auto b = tw.jet(x);
    d[0] = std::max(d[0], std::abs(a.v - b.v));
    d[1] = std::max(d[1], std::abs(a.d1 - b.d1));
    d[2] = std::max(d[2], std::abs(a.d2 - b.d2));
  }
  return d;
}

}  // namespace kppfront
