#pragma once

// Semiclassical cubic Schrodinger equation on the circle,
//
//   i hbar d_t psi = -(hbar^2/2) d_xx psi + (F + |psi|^2 - 1) psi,
//
// solved by Strang splitting: exact Fourier kinetic half-steps around an
// exact pointwise potential step (the potential leaves |psi| invariant, so
// the nonlinear substep integrates in closed form). The external potential
// F is recovered from the control pair (eta0, eta1) through d_x F = -(eta0
// + hbar eta1), normalised to zero mean.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <vector>

#include "scl/errors.hpp"
#include "scl/fft.hpp"
#include "scl/field.hpp"
#include "scl/signals.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

inline PeriodicField potential_from_control(const PeriodicField& eta) {
  return -1.0 * zero_mean_antiderivative(eta);
}

inline TrigPolynomial potential_from_control(const TrigPolynomial& eta) {
  TrigPolynomial F(eta.max_mode());
  for (int j = 0; j < eta.max_mode(); ++j) {
    const double k = j + 1;
    F.c[static_cast<std::size_t>(j)] = eta.s[static_cast<std::size_t>(j)] / k;
    F.s[static_cast<std::size_t>(j)] = -eta.c[static_cast<std::size_t>(j)] / k;
  }
  return F;
}

inline ComplexField complex_derivative(const ComplexField& f) {
  auto c = fft(f.v);
  const int n = f.n;
  for (int j = 0; j < n; ++j) {
    const int k = (j <= n / 2) ? j : j - n;
    c[static_cast<std::size_t>(j)] *= std::complex<double>(0.0, k);
  }
  c[static_cast<std::size_t>(n / 2)] = 0.0;
  ComplexField out(n);
  out.v = ifft(c);
  return out;
}

struct Observables {
  PeriodicField rho;
  PeriodicField u;
};

// Density and velocity read off the wavefunction; the velocity uses the
// momentum density hbar Im(conj(psi) d_x psi) over the density with a floor
// to stay finite near vacuum.
inline Observables extract_observables(const ComplexField& psi, double hbar) {
  const int n = psi.n;
  const ComplexField dpsi = complex_derivative(psi);
  Observables out{PeriodicField(n), PeriodicField(n)};
  for (int j = 0; j < n; ++j) {
    const std::complex<double> p = psi.v[static_cast<std::size_t>(j)];
    const double rho = std::norm(p);
    out.rho.v[static_cast<std::size_t>(j)] = rho;
    const double mom = hbar * std::imag(std::conj(p) * dpsi.v[static_cast<std::size_t>(j)]);
    out.u.v[static_cast<std::size_t>(j)] = mom / std::max(rho, 1e-10);
  }
  return out;
}

struct NlsConfig {
  double T = 1.0;
  double dt_scale = 1.0;
  double dt_max = 1e-3;
  double cfl = 0.45;  // hyperbolic substeps of the phase-amplitude solver
  int min_steps_per_segment = 4;
  int store_target = 65;
  long long max_steps = 200000000LL;
};

struct NlsTrajectory {
  std::vector<double> times;
  std::vector<ComplexField> psis;
  std::vector<double> mass;  // 2*pi*mean(|psi|^2) at the stored times
  long long steps = 0;

  const ComplexField& terminal() const { return psis.back(); }
};

namespace detail {

inline std::vector<double> signal_segments(const PairSignal* sig, double T) {
  std::vector<double> cuts{0.0};
  if (sig) {
    for (double b : sig->breakpoints())
      if (b > 1e-14 && b < T - 1e-14) cuts.push_back(b);
  }
  cuts.push_back(T);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out{cuts.front()};
  for (double t : cuts)
    if (t - out.back() > 1e-13) out.push_back(t);
  if (out.size() < 2) out.push_back(T);
  return out;
}

}  // namespace detail

inline NlsTrajectory solve_nls(const ComplexField& psi0, SignalPtr control, double hbar,
                               const NlsConfig& cfg) {
  if (hbar <= 0.0) throw ConfigError("nls.hbar: must be positive");
  const int n = psi0.n;
  const PeriodicGrid grid(n);
  NlsTrajectory traj;
  ComplexField psi = psi0;

  const PairSignal* sig = control.get();
  const bool frozen = !sig || sig->piecewise_constant();

  auto potential = [&](double t, PeriodicField& F) {
    if (!sig) {
      for (double& x : F.v) x = 0.0;
      return;
    }
    const FieldPair eta = sig->at(t);
    const PeriodicField F0 = potential_from_control(eta.a);
    const PeriodicField F1 = potential_from_control(eta.b);
    for (int j = 0; j < n; ++j) F.v[j] = F0.v[j] + hbar * F1.v[j];
  };

  // Kinetic phase table, rebuilt when dt changes.
  std::vector<std::complex<double>> kin(static_cast<std::size_t>(n));
  double kin_dt = -1.0;
  auto kinetic_table = [&](double dt) {
    if (dt == kin_dt) return;
    kin_dt = dt;
    for (int j = 0; j < n; ++j) {
      const double k = (j <= n / 2) ? j : j - n;
      kin[static_cast<std::size_t>(j)] = std::exp(std::complex<double>(0.0, -hbar * k * k * dt / 2.0));
    }
  };

  auto half_potential = [&](const PeriodicField& F, double dt) {
    for (int j = 0; j < n; ++j) {
      const double V = F.v[j] + std::norm(psi.v[static_cast<std::size_t>(j)]) - 1.0;
      psi.v[static_cast<std::size_t>(j)] *= std::exp(std::complex<double>(0.0, -V * dt / (2.0 * hbar)));
    }
  };

  const double store_dt = cfg.T / std::max(1, cfg.store_target - 1);
  double next_store = 0.0;
  auto store = [&](double t) {
    traj.times.push_back(t);
    traj.psis.push_back(psi);
    double m = 0.0;
    for (const auto& p : psi.v) m += std::norm(p);
    traj.mass.push_back(kTwoPi * m / n);
  };
  store(0.0);
  next_store = store_dt;

  const std::vector<double> seg = detail::signal_segments(sig, cfg.T);
  PeriodicField Fa(n), Fb(n);
  for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
    const double t0 = seg[s], t1 = seg[s + 1];
    double dt = cfg.dt_scale * std::min(hbar * hbar / 4.0, cfg.dt_max);
    const double finest =
        sig ? sig->local_timescale(t0, t1) : std::numeric_limits<double>::infinity();
    if (std::isfinite(finest)) dt = std::min(dt, finest / 8.0);
    long long steps = std::max<long long>(static_cast<long long>(std::ceil((t1 - t0) / dt)),
                                          cfg.min_steps_per_segment);
    if (traj.steps + steps > cfg.max_steps) throw ConfigError("nls: step budget exceeded");
    const double h = (t1 - t0) / static_cast<double>(steps);
    kinetic_table(h);
    if (frozen) potential(0.5 * (t0 + t1), Fa);
    for (long long i = 0; i < steps; ++i) {
      const double ta = t0 + static_cast<double>(i) * h;
      const double tb = (i + 1 == steps) ? t1 : ta + h;
      if (!frozen) potential(ta, Fa);
      half_potential(Fa, h);
      fft_inplace(psi.v, false);
      for (int j = 0; j < n; ++j) psi.v[static_cast<std::size_t>(j)] *= kin[static_cast<std::size_t>(j)];
      fft_inplace(psi.v, true);
      if (!frozen) potential(tb, Fb);
      half_potential(frozen ? Fa : Fb, h);
      ++traj.steps;
      if (tb >= next_store - 1e-12 && tb < cfg.T - 1e-12) {
        store(tb);
        next_store += store_dt;
      }
    }
  }
  store(cfg.T);
  return traj;
}

}  // namespace scl
