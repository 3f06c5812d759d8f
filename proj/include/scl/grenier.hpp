#pragma once

// Phase-amplitude formulation of the semiclassical equation: writing
// psi = a exp(i S / hbar) with a complex amplitude turns the equation into
//
//   d_t a + u d_x a + (a/2) d_x u = i (hbar/2) d_xx a,
//   d_t u + d_x( u^2/2 + F + |a|^2 ) = 0,          u = d_x S,
//
// which is hyperbolic plus an O(hbar) rotation term. The solver splits them:
// the rotation is exact in Fourier space, the hyperbolic part takes RK4
// steps under a CFL bound that does not shrink with hbar. Setting hbar = 0
// gives the leading-order system of the slow-scale expansion; the order-one
// correction (a1, u1, S1) solves the linearisation around it driven by the
// i/2 d_xx a0 source, and both orders are co-integrated so the correction
// sees the leading fields at every stage.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "scl/errors.hpp"
#include "scl/fft.hpp"
#include "scl/field.hpp"
#include "scl/nls.hpp"
#include "scl/signals.hpp"

namespace scl {

struct GrenierState {
  ComplexField a;
  PeriodicField u;
  double S_mean = 0.0;

  explicit GrenierState(int n) : a(n), u(n) {}
  GrenierState(ComplexField a_, PeriodicField u_, double s) : a(std::move(a_)), u(std::move(u_)), S_mean(s) {}
  int n() const { return a.n; }
};

struct GrenierTrajectory {
  std::vector<double> times;
  std::vector<GrenierState> states;
  long long steps = 0;

  const GrenierState& terminal() const { return states.back(); }
};

inline ComplexField grenier_wavefunction(const GrenierState& s, double hbar) {
  const PeriodicField S = zero_mean_antiderivative(s.u);
  ComplexField psi(s.n());
  for (int j = 0; j < s.n(); ++j)
    psi.v[static_cast<std::size_t>(j)] =
        s.a.v[static_cast<std::size_t>(j)] *
        std::exp(std::complex<double>(0.0, (S.v[j] + s.S_mean) / hbar));
  return psi;
}

namespace detail {

// Spectral utilities on complex fields with the 2/3 dealiasing cut.
class ComplexOps {
 public:
  explicit ComplexOps(int n) : n_(n), cut_(n / 3), buf_(static_cast<std::size_t>(n)) {}

  void deriv23(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
    buf_ = in;
    fft_inplace(buf_, false);
    apply_ik(true);
    out = buf_;
    fft_inplace(out, true);
  }
  void second_deriv(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
    buf_ = in;
    fft_inplace(buf_, false);
    for (int j = 0; j < n_; ++j) {
      const double k = (j <= n_ / 2) ? j : j - n_;
      buf_[static_cast<std::size_t>(j)] *= -k * k;
    }
    buf_[static_cast<std::size_t>(n_ / 2)] = 0.0;
    out = buf_;
    fft_inplace(out, true);
  }
  void filter23(std::vector<std::complex<double>>& f) {
    fft_inplace(f, false);
    for (int j = 0; j < n_; ++j) {
      const int k = (j <= n_ / 2) ? j : n_ - j;
      if (k > cut_) f[static_cast<std::size_t>(j)] = 0.0;
    }
    fft_inplace(f, true);
  }
  void rotate(std::vector<std::complex<double>>& f, const std::vector<std::complex<double>>& phase) {
    fft_inplace(f, false);
    for (int j = 0; j < n_; ++j) f[static_cast<std::size_t>(j)] *= phase[static_cast<std::size_t>(j)];
    fft_inplace(f, true);
  }

 private:
  void apply_ik(bool dealias) {
    for (int j = 0; j < n_; ++j) {
      const double k = (j <= n_ / 2) ? j : j - n_;
      const int ka = (j <= n_ / 2) ? j : n_ - j;
      if (dealias && ka > cut_)
        buf_[static_cast<std::size_t>(j)] = 0.0;
      else
        buf_[static_cast<std::size_t>(j)] *= std::complex<double>(0.0, k);
    }
    buf_[static_cast<std::size_t>(n_ / 2)] = 0.0;
  }

  int n_;
  int cut_;
  std::vector<std::complex<double>> buf_;
};

}  // namespace detail

inline GrenierTrajectory solve_grenier(const GrenierState& init, SignalPtr control, double hbar,
                                       const NlsConfig& cfg) {
  const int n = init.n();
  const PeriodicGrid grid(n);
  FieldOps rops(n);
  detail::ComplexOps cops(n);

  GrenierState y = init;
  cops.filter23(y.a.v);
  rops.filter23(y.u.v);

  const PairSignal* sig = control.get();
  const bool frozen = !sig || sig->piecewise_constant();

  GrenierTrajectory traj;
  const double store_dt = cfg.T / std::max(1, cfg.store_target - 1);
  double next_store = 0.0;
  auto store = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  };
  store(0.0);
  next_store = store_dt;

  // Scratch for the hyperbolic right-hand side.
  std::vector<std::complex<double>> da(static_cast<std::size_t>(n));
  PeriodicField du(n), flux(n), dflux(n);
  FieldPair eta_val(n);
  auto rhs = [&](const GrenierState& s, const FieldPair* eta, GrenierState& out) {
    cops.deriv23(s.a.v, da);
    rops.deriv23(s.u.v, du.v);
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      out.a.v[js] = -(s.u.v[j] * da[js] + 0.5 * s.a.v[js] * du.v[j]);
      flux.v[j] = 0.5 * s.u.v[j] * s.u.v[j] + std::norm(s.a.v[js]);
    }
    rops.deriv23(flux.v, dflux.v);
    double m = 0.0;
    for (int j = 0; j < n; ++j) {
      out.u.v[j] = -dflux.v[j];
      if (eta) out.u.v[j] += eta->a.v[j] + hbar * eta->b.v[j];
      m += flux.v[j] - 1.0;
    }
    out.S_mean = -m / n;
  };

  auto axpy = [&](const GrenierState& s, double h, const GrenierState& k, GrenierState& out) {
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      out.a.v[js] = s.a.v[js] + h * k.a.v[js];
      out.u.v[j] = s.u.v[j] + h * k.u.v[j];
    }
    out.S_mean = s.S_mean + h * k.S_mean;
  };

  std::vector<std::complex<double>> rot(static_cast<std::size_t>(n));
  double rot_dt = -1.0;
  auto rotation_table = [&](double dt) {
    if (dt == rot_dt) return;
    rot_dt = dt;
    for (int j = 0; j < n; ++j) {
      const double k = (j <= n / 2) ? j : j - n;
      rot[static_cast<std::size_t>(j)] = std::exp(std::complex<double>(0.0, -hbar * k * k * dt / 4.0));
    }
  };

  GrenierState k1(n), k2(n), k3(n), k4(n), stage(n);
  const std::vector<double> seg = detail::signal_segments(sig, cfg.T);
  for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
    const double t0 = seg[s], t1 = seg[s + 1];
    double speed = 0.0;
    for (int j = 0; j < n; ++j)
      speed = std::max(speed, std::abs(y.u.v[j]) + std::sqrt(std::norm(y.a.v[static_cast<std::size_t>(j)])));
    double dt = std::min(cfg.cfl * grid.dx() / std::max(speed, 0.1), cfg.dt_max) * cfg.dt_scale;
    const double finest =
        sig ? sig->local_timescale(t0, t1) : std::numeric_limits<double>::infinity();
    if (std::isfinite(finest)) dt = std::min(dt, finest / 8.0);
    const long long steps = std::max<long long>(static_cast<long long>(std::ceil((t1 - t0) / dt)),
                                                cfg.min_steps_per_segment);
    if (traj.steps + steps > cfg.max_steps) throw ConfigError("grenier: step budget exceeded");
    const double h = (t1 - t0) / static_cast<double>(steps);
    rotation_table(h);
    if (frozen && sig) eta_val = sig->at(0.5 * (t0 + t1));
    const FieldPair* eta = sig ? &eta_val : nullptr;
    for (long long i = 0; i < steps; ++i) {
      const double ta = t0 + static_cast<double>(i) * h;
      if (hbar != 0.0) cops.rotate(y.a.v, rot);
      if (!frozen) eta_val = sig->at(ta + 0.5 * h);
      rhs(y, eta, k1);
      axpy(y, 0.5 * h, k1, stage);
      rhs(stage, eta, k2);
      axpy(y, 0.5 * h, k2, stage);
      rhs(stage, eta, k3);
      axpy(y, h, k3, stage);
      rhs(stage, eta, k4);
      for (int j = 0; j < n; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        y.a.v[js] += h / 6.0 * (k1.a.v[js] + 2.0 * k2.a.v[js] + 2.0 * k3.a.v[js] + k4.a.v[js]);
        y.u.v[j] += h / 6.0 * (k1.u.v[j] + 2.0 * k2.u.v[j] + 2.0 * k3.u.v[j] + k4.u.v[j]);
      }
      y.S_mean += h / 6.0 * (k1.S_mean + 2.0 * k2.S_mean + 2.0 * k3.S_mean + k4.S_mean);
      if (hbar != 0.0) cops.rotate(y.a.v, rot);
      cops.filter23(y.a.v);
      ++traj.steps;
      const double tb = (i + 1 == steps) ? t1 : ta + h;
      if (tb >= next_store - 1e-12 && tb < cfg.T - 1e-12) {
        store(tb);
        next_store += store_dt;
      }
    }
  }
  store(cfg.T);
  return traj;
}

// ------------------------------------------------------------- WKB cascade

struct WKBState {
  ComplexField a0;
  PeriodicField u0;
  double S0_mean = 0.0;
  ComplexField a1;
  PeriodicField u1;
  double S1_mean = 0.0;

  explicit WKBState(int n) : a0(n), u0(n), a1(n), u1(n) {}
  int n() const { return a0.n; }
};

struct WKBTrajectory {
  std::vector<double> times;
  std::vector<WKBState> states;
  long long steps = 0;

  const WKBState& terminal() const { return states.back(); }
};

// Limit-system observables carried by a WKB state: the density pair, the
// transported phase current A = -Im(conj(a0) d_x a0) and the velocities.
struct LimitObservables {
  PeriodicField rho0, u0, A, rho1, u1;
};

inline LimitObservables wkb_to_limit(const WKBState& s) {
  const int n = s.n();
  const ComplexField da0 = complex_derivative(s.a0);
  LimitObservables out{PeriodicField(n), s.u0, PeriodicField(n), PeriodicField(n), s.u1};
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    out.rho0.v[j] = std::norm(s.a0.v[js]);
    out.A.v[j] = -std::imag(std::conj(s.a0.v[js]) * da0.v[js]);
    out.rho1.v[j] = 2.0 * std::real(std::conj(s.a0.v[js]) * s.a1.v[js]);
  }
  return out;
}

// Leading order plus first correction, co-integrated with RK4. The control
// pair feeds eta0 to the leading velocity and eta1 to the correction.
inline WKBTrajectory solve_wkb(const WKBState& init, SignalPtr control, const NlsConfig& cfg) {
  const int n = init.n();
  const PeriodicGrid grid(n);
  FieldOps rops(n);
  detail::ComplexOps cops(n);

  WKBState y = init;
  cops.filter23(y.a0.v);
  rops.filter23(y.u0.v);
  cops.filter23(y.a1.v);
  rops.filter23(y.u1.v);

  const PairSignal* sig = control.get();
  const bool frozen = !sig || sig->piecewise_constant();

  WKBTrajectory traj;
  const double store_dt = cfg.T / std::max(1, cfg.store_target - 1);
  double next_store = 0.0;
  auto store = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  };
  store(0.0);
  next_store = store_dt;

  std::vector<std::complex<double>> da0(static_cast<std::size_t>(n)), da1(static_cast<std::size_t>(n)),
      dda0(static_cast<std::size_t>(n));
  PeriodicField du0(n), du1(n), flux(n), dflux(n), cross(n), dcross(n);
  FieldPair eta_val(n);
  auto rhs = [&](const WKBState& s, const FieldPair* eta, WKBState& out) {
    cops.deriv23(s.a0.v, da0);
    cops.deriv23(s.a1.v, da1);
    cops.second_deriv(s.a0.v, dda0);
    rops.deriv23(s.u0.v, du0.v);
    rops.deriv23(s.u1.v, du1.v);
    double m0 = 0.0, m1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      const double rho0 = std::norm(s.a0.v[js]);
      out.a0.v[js] = -(s.u0.v[j] * da0[js] + 0.5 * s.a0.v[js] * du0.v[j]);
      out.a1.v[js] = -(s.u0.v[j] * da1[js] + s.u1.v[j] * da0[js] +
                       0.5 * (s.a0.v[js] * du1.v[j] + s.a1.v[js] * du0.v[j])) +
                     std::complex<double>(0.0, 0.5) * dda0[js];
      flux.v[j] = 0.5 * s.u0.v[j] * s.u0.v[j] + rho0;
      cross.v[j] = s.u0.v[j] * s.u1.v[j] + 2.0 * std::real(std::conj(s.a0.v[js]) * s.a1.v[js]);
      m0 += flux.v[j] - 1.0;
      m1 += cross.v[j];
    }
    rops.deriv23(flux.v, dflux.v);
    rops.deriv23(cross.v, dcross.v);
    for (int j = 0; j < n; ++j) {
      out.u0.v[j] = -dflux.v[j] + (eta ? eta->a.v[j] : 0.0);
      out.u1.v[j] = -dcross.v[j] + (eta ? eta->b.v[j] : 0.0);
    }
    out.S0_mean = -m0 / n;
    out.S1_mean = -m1 / n;
  };

  auto axpy = [&](const WKBState& s, double h, const WKBState& k, WKBState& out) {
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      out.a0.v[js] = s.a0.v[js] + h * k.a0.v[js];
      out.a1.v[js] = s.a1.v[js] + h * k.a1.v[js];
      out.u0.v[j] = s.u0.v[j] + h * k.u0.v[j];
      out.u1.v[j] = s.u1.v[j] + h * k.u1.v[j];
    }
    out.S0_mean = s.S0_mean + h * k.S0_mean;
    out.S1_mean = s.S1_mean + h * k.S1_mean;
  };

  WKBState k1(n), k2(n), k3(n), k4(n), stage(n);
  const std::vector<double> seg = detail::signal_segments(sig, cfg.T);
  for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
    const double t0 = seg[s], t1 = seg[s + 1];
    double speed = 0.0;
    for (int j = 0; j < n; ++j)
      speed = std::max(speed, std::abs(y.u0.v[j]) + std::sqrt(std::norm(y.a0.v[static_cast<std::size_t>(j)])));
    double dt = std::min(cfg.cfl * grid.dx() / std::max(speed, 0.1), cfg.dt_max) * cfg.dt_scale;
    const double finest =
        sig ? sig->local_timescale(t0, t1) : std::numeric_limits<double>::infinity();
    if (std::isfinite(finest)) dt = std::min(dt, finest / 8.0);
    const long long steps = std::max<long long>(static_cast<long long>(std::ceil((t1 - t0) / dt)),
                                                cfg.min_steps_per_segment);
    if (traj.steps + steps > cfg.max_steps) throw ConfigError("wkb: step budget exceeded");
    const double h = (t1 - t0) / static_cast<double>(steps);
    if (frozen && sig) eta_val = sig->at(0.5 * (t0 + t1));
    const FieldPair* eta = sig ? &eta_val : nullptr;
    for (long long i = 0; i < steps; ++i) {
      const double ta = t0 + static_cast<double>(i) * h;
      if (!frozen) eta_val = sig->at(ta + 0.5 * h);
      rhs(y, eta, k1);
      axpy(y, 0.5 * h, k1, stage);
      rhs(stage, eta, k2);
      axpy(y, 0.5 * h, k2, stage);
      rhs(stage, eta, k3);
      axpy(y, h, k3, stage);
      rhs(stage, eta, k4);
      for (int j = 0; j < n; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        y.a0.v[js] += h / 6.0 * (k1.a0.v[js] + 2.0 * k2.a0.v[js] + 2.0 * k3.a0.v[js] + k4.a0.v[js]);
        y.a1.v[js] += h / 6.0 * (k1.a1.v[js] + 2.0 * k2.a1.v[js] + 2.0 * k3.a1.v[js] + k4.a1.v[js]);
        y.u0.v[j] += h / 6.0 * (k1.u0.v[j] + 2.0 * k2.u0.v[j] + 2.0 * k3.u0.v[j] + k4.u0.v[j]);
        y.u1.v[j] += h / 6.0 * (k1.u1.v[j] + 2.0 * k2.u1.v[j] + 2.0 * k3.u1.v[j] + k4.u1.v[j]);
      }
      y.S0_mean += h / 6.0 * (k1.S0_mean + 2.0 * k2.S0_mean + 2.0 * k3.S0_mean + k4.S0_mean);
      y.S1_mean += h / 6.0 * (k1.S1_mean + 2.0 * k2.S1_mean + 2.0 * k3.S1_mean + k4.S1_mean);
      cops.filter23(y.a0.v);
      cops.filter23(y.a1.v);
      ++traj.steps;
      const double tb = (i + 1 == steps) ? t1 : ta + h;
      if (tb >= next_store - 1e-12 && tb < cfg.T - 1e-12) {
        store(tb);
        next_store += store_dt;
      }
    }
  }
  store(cfg.T);
  return traj;
}

// --------------------------------------------------------- expansion errors

struct WkbErrors {
  double amp0 = 0.0;   // || a_hbar - a0 ||_L2
  double amp1 = 0.0;   // || (a_hbar - a0)/hbar - a1 ||_L2
  double vel1 = 0.0;   // || (u_hbar - u0)/hbar - u1 ||_L2
  double smean1 = 0.0; // | (S_hbar - S0)/hbar - S1 | (means)
  double strip = 0.0;  // || psi e^{-i S0/hbar} - a0 e^{i S1} ||_{H^{k-2}}
};

inline WkbErrors wkb_error_metrics(const ComplexField& psiT, const GrenierState& g,
                                   const WKBState& w, double hbar, int k) {
  const int n = w.n();
  WkbErrors e;
  ComplexField d0(n), d1(n);
  PeriodicField dv(n);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    d0.v[js] = g.a.v[js] - w.a0.v[js];
    d1.v[js] = d0.v[js] / hbar - w.a1.v[js];
    dv.v[j] = (g.u.v[j] - w.u0.v[j]) / hbar - w.u1.v[j];
  }
  e.amp0 = l2_norm(d0);
  e.amp1 = l2_norm(d1);
  e.vel1 = l2_norm(dv);
  e.smean1 = std::abs((g.S_mean - w.S0_mean) / hbar - w.S1_mean);

  const PeriodicField S0 = zero_mean_antiderivative(w.u0);
  const PeriodicField S1 = zero_mean_antiderivative(w.u1);
  ComplexField strip(n);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const std::complex<double> lhs =
        psiT.v[js] * std::exp(std::complex<double>(0.0, -(S0.v[j] + w.S0_mean) / hbar));
    const std::complex<double> rhs =
        w.a0.v[js] * std::exp(std::complex<double>(0.0, S1.v[j] + w.S1_mean));
    strip.v[js] = lhs - rhs;
  }
  e.strip = sobolev_norm(strip, std::max(k - 2, 0));
  return e;
}

}  // namespace scl
