#pragma once

// Control synthesis: steer the limit system from an initial tuple to a
// target tuple in time T using controls that are trigonometric polynomials
// of prescribed complexity.
//
// Stage N builds an exact controlled path (linear interpolation of the
// endpoint data plus compensating perturbations), cuts the perturbations off
// near t = 0 and t = T with a smooth window so the control alone carries
// them, and projects the result onto E_N. Each reduction stage then replaces
// an E_{n+1}-valued control by an E_n-valued one: the control curve is
// segmented, each segment mean is decomposed into low modes plus bracket
// factor pairs, the pairs are played as a fast sign-alternating oscillator,
// and the smoothed oscillator's exact time derivative is added to the
// control so the closed system reproduces the perturbed averages.

#include <array>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "scl/bracket.hpp"
#include "scl/errors.hpp"
#include "scl/field.hpp"
#include "scl/limit_system.hpp"
#include "scl/oscillator.hpp"
#include "scl/signals.hpp"
#include "scl/smooth.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

struct TargetSpec {
  PeriodicField g0, v0, g1, v1, A0;              // initial data
  PeriodicField g0_hat, v0_hat, g1_hat, v1_hat;  // targets
  double T = 1.0;
  double eps = 1e-2;     // requested terminal accuracy of the full pipeline
  int N = 1;             // stage-N controls live in E_N
  double delta = 0.05;   // cutoff window width (fraction of [0,T] at each end)
  double ramp_speed = 2.0;
  int osc_max = 32;
  int smooth_m = 2;
  int nodes = 4096;      // time samples for the construction

  int grid_n() const { return g0.n; }

  void validate() const {
    auto same = [&](const PeriodicField& f, const char* key) {
      if (f.n != g0.n) throw ConfigError(std::string("spec.") + key + ": grid size mismatch");
    };
    same(v0, "v0");
    same(g1, "g1");
    same(v1, "v1");
    same(A0, "A0");
    same(g0_hat, "g0_hat");
    same(v0_hat, "v0_hat");
    same(g1_hat, "g1_hat");
    same(v1_hat, "v1_hat");
    if (T <= 0.0) throw ConfigError("spec.T: must be positive");
    if (eps <= 0.0) throw ConfigError("synthesis.eps: must be positive");
    if (N < 0) throw ConfigError("synthesis.N: must be >= 0");
    if (delta <= 0.0 || delta > 0.25 * T)
      throw ConfigError("synthesis.delta: must lie in (0, T/4]");
    if (min_value(g0) <= 0.0) throw ConfigError("spec.g0: density must be strictly positive");
    if (min_value(g0_hat) <= 0.0) throw ConfigError("spec.g0_hat: density must be strictly positive");
    const double tol = 1e-10 * std::max(1.0, linf_norm(g0) + linf_norm(g0_hat));
    if (std::abs(mean(g0) - mean(g0_hat)) > tol)
      throw ConfigError("spec.g0_hat: leading mass differs from spec.g0 (transport preserves it)");
    if (std::abs(mean(g1) - mean(g1_hat)) > tol)
      throw ConfigError("spec.g1_hat: corrector mass differs from spec.g1 (transport preserves it)");
    for (const auto* f : {&v0, &v0_hat, &v1, &v1_hat}) {
      if (std::abs(mean(*f)) > tol)
        throw ConfigError("spec velocities must have zero mean (gradient fields)");
    }
  }
};

// Stage budget: requested accuracy split geometrically across the reduction
// chain, the last stage (n = 0) holding the tightest share.
inline double stage_tolerance(const TargetSpec& spec, int n) {
  return spec.eps * std::pow(2.0, -(spec.N - n + 1));
}

// Terminal misfit in the synthesis norm: H^3 on the leading pair, H^1 on the
// correctors (A carries no target).
inline double target_error(const LimitState& s, const TargetSpec& spec) {
  const double a = sobolev_norm(s.rho0 - spec.g0_hat, 3);
  const double b = sobolev_norm(s.u0 - spec.v0_hat, 3);
  const double c = sobolev_norm(s.rho1 - spec.g1_hat, 1);
  const double d = sobolev_norm(s.u1 - spec.v1_hat, 1);
  return std::sqrt(a * a + b * b + c * c + d * d);
}

// --------------------------------------------------------- stage-N controls

// Control signal assembled from sampled node data with the cutoff window
// factors evaluated in closed form at query time: value = lerp(eta_hat) +
// W'(t) lerp(xi_hat) + W(t) lerp(xi_rate_hat). Keeping W and W' analytic
// makes the sharp window edges exact; only slowly varying factors are
// interpolated.
class CutoffControlSignal final : public PairSignal {
 public:
  CutoffControlSignal(int grid_n, std::vector<double> times, std::vector<TrigPair> eta_hat,
                      std::vector<TrigPair> xi_hat, std::vector<TrigPair> xi_rate_hat, double T,
                      double delta, double speed)
      : n_(grid_n),
        t_(std::move(times)),
        eta_(std::move(eta_hat)),
        xi_(std::move(xi_hat)),
        xr_(std::move(xi_rate_hat)),
        T_(T),
        delta_(delta),
        speed_(speed) {}

  double window(double t) const {
    return smoothstep(speed_ * t / delta_) * smoothstep(speed_ * (T_ - t) / delta_);
  }
  double window_prime(double t) const {
    const double a = speed_ * t / delta_;
    const double b = speed_ * (T_ - t) / delta_;
    return (smoothstep_prime(a) * smoothstep(b) - smoothstep(a) * smoothstep_prime(b)) * speed_ / delta_;
  }

  TrigPair value_poly_at(double t) const {
    std::size_t lo, hi;
    double w;
    locate(t, lo, hi, w);
    TrigPair r = (1.0 - w) * eta_[lo] + w * eta_[hi];
    const double W = window(t), Wp = window_prime(t);
    if (Wp != 0.0) r = r + Wp * ((1.0 - w) * xi_[lo] + w * xi_[hi]);
    if (W != 0.0) r = r + W * ((1.0 - w) * xr_[lo] + w * xr_[hi]);
    return r;
  }

  FieldPair at(double t) const override {
    const TrigPair p = value_poly_at(t);
    return FieldPair(p.a.to_field(n_), p.b.to_field(n_));
  }
  double finest_timescale() const override { return delta_ / (2.0 * speed_); }

 private:
  void locate(double t, std::size_t& lo, std::size_t& hi, double& w) const {
    if (t <= t_.front()) {
      lo = 0;
      hi = 1;
      w = 0.0;
      return;
    }
    if (t >= t_.back()) {
      lo = t_.size() - 2;
      hi = t_.size() - 1;
      w = 1.0;
      return;
    }
    lo = 0;
    hi = t_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (t_[mid] <= t ? lo : hi) = mid;
    }
    hi = lo + 1;
    w = (t - t_[lo]) / (t_[lo + 1] - t_[lo]);
  }

  int n_;
  std::vector<double> t_;
  std::vector<TrigPair> eta_, xi_, xr_;
  double T_, delta_, speed_;
};

// The exact controlled path: endpoint interpolation, the divergence
// equations for the compensating perturbations, the transported
// phase current, and the matching control.
class SynthesisPlan {
 public:
  explicit SynthesisPlan(const TargetSpec& spec) : spec_(spec), n_(spec.grid_n()), ops_(n_) {
    spec_.validate();
    build();
  }

  const std::vector<double>& times() const { return t_; }
  const FieldPair& xi_node(std::size_t i) const { return xi_[i]; }
  const FieldPair& eta_node(std::size_t i) const { return eta_[i]; }
  const PeriodicField& A_node(std::size_t i) const { return A_[i]; }

  // Largest defect of the five construction equations over probe nodes.
  // Equations 1, 2, 4, 5 are algebraic in the node data; the transport
  // equation for A is probed with a fourth-order finite difference in time,
  // so the reported number also bounds the presolve integration error.
  double construction_residual(int probes = 17) const;

  // The stage-N control: everything the closed system needs once the
  // perturbations are windowed away, projected onto E_N.
  std::shared_ptr<CutoffControlSignal> control_signal() const;

  // Windowed perturbation signal (for diagnostics and perturbed runs).
  SignalPtr xi_cut_signal() const;

 private:
  void build();

  PeriodicField lerp(const PeriodicField& a, const PeriodicField& b, double t) const {
    PeriodicField r(n_);
    const double w = t / spec_.T;
    for (int j = 0; j < n_; ++j) r.v[j] = (1.0 - w) * a.v[j] + w * b.v[j];
    return r;
  }

  // Solve d/dx (rho * f) = rhs for the zero-mean field f; rhs must have zero
  // mean. The integration constant is fixed by mean(f) = 0.
  PeriodicField divergence_solve(const PeriodicField& rho, const PeriodicField& rhs) const {
    PeriodicField G = zero_mean_antiderivative(rhs);
    double mg = 0.0, mi = 0.0;
    for (int j = 0; j < n_; ++j) {
      mg += G.v[j] / rho.v[j];
      mi += 1.0 / rho.v[j];
    }
    const double c = -mg / mi;
    PeriodicField f(n_);
    for (int j = 0; j < n_; ++j) f.v[j] = (G.v[j] + c) / rho.v[j];
    return f;
  }

  TargetSpec spec_;
  int n_;
  mutable FieldOps ops_;
  std::vector<double> t_;
  std::vector<FieldPair> xi_;    // uncut perturbations at nodes
  std::vector<FieldPair> xi_fd_; // their time derivatives (5-point stencils)
  std::vector<FieldPair> eta_;   // uncut control at nodes
  std::vector<PeriodicField> A_;
};

inline void SynthesisPlan::build() {
  const int nt = spec_.nodes;
  const double T = spec_.T;
  t_.resize(static_cast<std::size_t>(nt) + 1);
  for (int i = 0; i <= nt; ++i) t_[static_cast<std::size_t>(i)] = T * i / nt;

  const PeriodicField drho0 = (1.0 / T) * (spec_.g0_hat - spec_.g0);
  const PeriodicField du0 = (1.0 / T) * (spec_.v0_hat - spec_.v0);
  const PeriodicField drho1 = (1.0 / T) * (spec_.g1_hat - spec_.g1);
  const PeriodicField du1 = (1.0 / T) * (spec_.v1_hat - spec_.v1);

  // Leading perturbation on the half grid (RK4 stages of the A presolve).
  const int half = 2 * nt;
  std::vector<PeriodicField> w_half(static_cast<std::size_t>(half) + 1);
  std::vector<PeriodicField> rho0_nodes(static_cast<std::size_t>(nt) + 1);
  xi_.resize(static_cast<std::size_t>(nt) + 1);
  for (int j = 0; j <= half; ++j) {
    const double t = T * j / half;
    const PeriodicField rho0 = lerp(spec_.g0, spec_.g0_hat, t);
    const PeriodicField u0 = lerp(spec_.v0, spec_.v0_hat, t);
    PeriodicField rhs(n_);
    {
      PeriodicField flux = hadamard(rho0, u0);
      PeriodicField dflux(n_);
      ops_.deriv(flux.v, dflux.v);
      for (int m = 0; m < n_; ++m) rhs.v[m] = -drho0.v[m] - dflux.v[m];
    }
    const PeriodicField xi0 = divergence_solve(rho0, rhs);
    PeriodicField w(n_);
    for (int m = 0; m < n_; ++m) w.v[m] = u0.v[m] + xi0.v[m];
    w_half[static_cast<std::size_t>(j)] = std::move(w);
    if (j % 2 == 0) {
      const std::size_t i = static_cast<std::size_t>(j / 2);
      rho0_nodes[i] = rho0;
      xi_[i].a = xi0;
    }
  }

  // Transport presolve for A with velocity u0 + xi0.
  A_.resize(static_cast<std::size_t>(nt) + 1);
  A_[0] = spec_.A0;
  {
    const double h = T / nt;
    PeriodicField A = spec_.A0;
    PeriodicField k1(n_), k2(n_), k3(n_), k4(n_), stage(n_), dA(n_), dw(n_);
    auto rhsA = [&](const PeriodicField& a, const PeriodicField& w, PeriodicField& out) {
      ops_.deriv(a.v, dA.v);
      ops_.deriv(w.v, dw.v);
      for (int m = 0; m < n_; ++m) out.v[m] = -(w.v[m] * dA.v[m] + 2.0 * dw.v[m] * a.v[m]);
    };
    for (int i = 0; i < nt; ++i) {
      const PeriodicField& wa = w_half[static_cast<std::size_t>(2 * i)];
      const PeriodicField& wm = w_half[static_cast<std::size_t>(2 * i + 1)];
      const PeriodicField& wb = w_half[static_cast<std::size_t>(2 * i + 2)];
      rhsA(A, wa, k1);
      for (int m = 0; m < n_; ++m) stage.v[m] = A.v[m] + 0.5 * h * k1.v[m];
      rhsA(stage, wm, k2);
      for (int m = 0; m < n_; ++m) stage.v[m] = A.v[m] + 0.5 * h * k2.v[m];
      rhsA(stage, wm, k3);
      for (int m = 0; m < n_; ++m) stage.v[m] = A.v[m] + h * k3.v[m];
      rhsA(stage, wb, k4);
      for (int m = 0; m < n_; ++m)
        A.v[m] += h / 6.0 * (k1.v[m] + 2.0 * k2.v[m] + 2.0 * k3.v[m] + k4.v[m]);
      A_[static_cast<std::size_t>(i) + 1] = A;
    }
  }

  // Corrector perturbation and the control at the nodes.
  eta_.resize(static_cast<std::size_t>(nt) + 1);
  for (int i = 0; i <= nt; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    const double t = t_[is];
    const PeriodicField& rho0 = rho0_nodes[is];
    const PeriodicField rho1 = lerp(spec_.g1, spec_.g1_hat, t);
    const PeriodicField u1 = lerp(spec_.v1, spec_.v1_hat, t);
    const PeriodicField& w0 = w_half[static_cast<std::size_t>(2 * i)];

    PeriodicField dA(n_);
    ops_.deriv(A_[is].v, dA.v);
    PeriodicField rhs1(n_);
    {
      PeriodicField flux(n_);
      for (int m = 0; m < n_; ++m) flux.v[m] = w0.v[m] * rho1.v[m] + u1.v[m] * rho0.v[m];
      PeriodicField dflux(n_);
      ops_.deriv(flux.v, dflux.v);
      for (int m = 0; m < n_; ++m) rhs1.v[m] = dA.v[m] - drho1.v[m] - dflux.v[m];
    }
    const PeriodicField xi1 = divergence_solve(rho0, rhs1);
    xi_[is].b = xi1;

    // eta0 = d_t u0 + w0 d_x w0 + d_x rho0, eta1 = d_t u1 + d_x(w0 w1) + d_x rho1
    PeriodicField flux0(n_), dflux0(n_);
    for (int m = 0; m < n_; ++m) flux0.v[m] = 0.5 * w0.v[m] * w0.v[m] + rho0.v[m];
    ops_.deriv(flux0.v, dflux0.v);
    PeriodicField e0(n_);
    for (int m = 0; m < n_; ++m) e0.v[m] = du0.v[m] + dflux0.v[m];

    PeriodicField flux1(n_), dflux1(n_);
    for (int m = 0; m < n_; ++m) flux1.v[m] = w0.v[m] * (u1.v[m] + xi1.v[m]) + rho1.v[m];
    ops_.deriv(flux1.v, dflux1.v);
    PeriodicField e1(n_);
    for (int m = 0; m < n_; ++m) e1.v[m] = du1.v[m] + dflux1.v[m];

    eta_[is] = FieldPair(std::move(e0), std::move(e1));
  }

  // Node time derivatives of xi by 5-point stencils (4th order).
  xi_fd_.resize(xi_.size());
  const double h = T / nt;
  auto stencil = [&](const std::vector<FieldPair>& f, int i) {
    static const std::array<std::array<double, 5>, 5> W = {{
        {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4},  // at node 0 of 0..4
        {-1.0 / 4, -5.0 / 6, 3.0 / 2, -1.0 / 2, 1.0 / 12},
        {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12},  // central
        {-1.0 / 12, 1.0 / 2, -3.0 / 2, 5.0 / 6, 1.0 / 4},
        {1.0 / 4, -4.0 / 3, 3.0, -4.0, 25.0 / 12},  // at node 4 of 0..4
    }};
    const int last = static_cast<int>(f.size()) - 1;
    int base, row;
    if (i <= 1) {
      base = 0;
      row = i;
    } else if (i >= last - 1) {
      base = last - 4;
      row = 4 - (last - i);
    } else {
      base = i - 2;
      row = 2;
    }
    FieldPair out(n_);
    for (int m = 0; m < 5; ++m) {
      const double c = W[static_cast<std::size_t>(row)][static_cast<std::size_t>(m)] / h;
      const FieldPair& g = f[static_cast<std::size_t>(base + m)];
      for (int j = 0; j < n_; ++j) {
        out.a.v[j] += c * g.a.v[j];
        out.b.v[j] += c * g.b.v[j];
      }
    }
    return out;
  };
  for (int i = 0; i <= nt; ++i) xi_fd_[static_cast<std::size_t>(i)] = stencil(xi_, i);
}

inline double SynthesisPlan::construction_residual(int probes) const {
  const int nt = spec_.nodes;
  const double T = spec_.T;
  const PeriodicField drho0 = (1.0 / T) * (spec_.g0_hat - spec_.g0);
  const PeriodicField drho1 = (1.0 / T) * (spec_.g1_hat - spec_.g1);
  const double h = T / nt;
  double worst = 0.0;
  FieldOps ops(n_);
  for (int p = 0; p <= probes; ++p) {
    // Keep two nodes away from the ends so the central A-stencil applies.
    int i = 2 + static_cast<int>((static_cast<double>(nt - 4) * p) / probes);
    const std::size_t is = static_cast<std::size_t>(i);
    const double t = t_[is];
    const PeriodicField rho0 = lerp(spec_.g0, spec_.g0_hat, t);
    const PeriodicField rho1 = lerp(spec_.g1, spec_.g1_hat, t);
    const PeriodicField u1 = lerp(spec_.v1, spec_.v1_hat, t);
    const PeriodicField u0 = lerp(spec_.v0, spec_.v0_hat, t);
    const FieldPair& xi = xi_[is];
    PeriodicField w0 = u0;
    for (int m = 0; m < n_; ++m) w0.v[m] += xi.a.v[m];

    // eq1: d_t rho0 + d_x(w0 rho0) = 0
    PeriodicField f1 = hadamard(w0, rho0), d1(n_);
    ops.deriv(f1.v, d1.v);
    for (int m = 0; m < n_; ++m) d1.v[m] += drho0.v[m];
    worst = std::max(worst, linf_norm(d1));

    // eq2: d_t u0 + w0 d_x w0 + d_x rho0 = eta0
    PeriodicField f2(n_), d2(n_);
    for (int m = 0; m < n_; ++m) f2.v[m] = 0.5 * w0.v[m] * w0.v[m] + rho0.v[m];
    ops.deriv(f2.v, d2.v);
    const PeriodicField du0 = (1.0 / T) * (spec_.v0_hat - spec_.v0);
    for (int m = 0; m < n_; ++m) d2.v[m] += du0.v[m] - eta_[is].a.v[m];
    worst = std::max(worst, linf_norm(d2));

    // eq3: d_t A + w0 d_x A + 2 d_x w0 A = 0, d_t A by central stencil
    PeriodicField dAdt(n_);
    for (int m = 0; m < n_; ++m)
      dAdt.v[m] = (A_[is - 2].v[m] - 8.0 * A_[is - 1].v[m] + 8.0 * A_[is + 1].v[m] -
                   A_[is + 2].v[m]) /
                  (12.0 * h);
    PeriodicField dA(n_), dw(n_);
    ops.deriv(A_[is].v, dA.v);
    ops.deriv(w0.v, dw.v);
    for (int m = 0; m < n_; ++m)
      dAdt.v[m] += w0.v[m] * dA.v[m] + 2.0 * dw.v[m] * A_[is].v[m];
    worst = std::max(worst, linf_norm(dAdt));

    // eq4: d_t rho1 + d_x(w0 rho1 + (u1 + xi1) rho0) = d_x A
    PeriodicField f4(n_), d4(n_);
    for (int m = 0; m < n_; ++m)
      f4.v[m] = w0.v[m] * rho1.v[m] + (u1.v[m] + xi.b.v[m]) * rho0.v[m];
    ops.deriv(f4.v, d4.v);
    for (int m = 0; m < n_; ++m) d4.v[m] += drho1.v[m] - dA.v[m];
    worst = std::max(worst, linf_norm(d4));

    // eq5: d_t u1 + d_x(w0 (u1 + xi1)) + d_x rho1 = eta1
    PeriodicField f5(n_), d5(n_);
    for (int m = 0; m < n_; ++m) f5.v[m] = w0.v[m] * (u1.v[m] + xi.b.v[m]) + rho1.v[m];
    ops.deriv(f5.v, d5.v);
    const PeriodicField du1 = (1.0 / T) * (spec_.v1_hat - spec_.v1);
    for (int m = 0; m < n_; ++m) d5.v[m] += du1.v[m] - eta_[is].b.v[m];
    worst = std::max(worst, linf_norm(d5));
  }
  return worst;
}

inline std::shared_ptr<CutoffControlSignal> SynthesisPlan::control_signal() const {
  const int max_mode = spec_.N + 1;
  std::vector<TrigPair> eta_hat, xi_hat, xr_hat;
  eta_hat.reserve(t_.size());
  xi_hat.reserve(t_.size());
  xr_hat.reserve(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) {
    eta_hat.emplace_back(poly_from_field(eta_[i].a, max_mode), poly_from_field(eta_[i].b, max_mode));
    xi_hat.emplace_back(poly_from_field(xi_[i].a, max_mode), poly_from_field(xi_[i].b, max_mode));
    xr_hat.emplace_back(poly_from_field(xi_fd_[i].a, max_mode),
                        poly_from_field(xi_fd_[i].b, max_mode));
  }
  return std::make_shared<CutoffControlSignal>(n_, t_, std::move(eta_hat), std::move(xi_hat),
                                               std::move(xr_hat), spec_.T, spec_.delta,
                                               spec_.ramp_speed);
}

inline SignalPtr SynthesisPlan::xi_cut_signal() const {
  std::vector<FieldPair> vals(xi_.size(), FieldPair(n_));
  for (std::size_t i = 0; i < xi_.size(); ++i) {
    const double W = smoothstep(spec_.ramp_speed * t_[i] / spec_.delta) *
                     smoothstep(spec_.ramp_speed * (spec_.T - t_[i]) / spec_.delta);
    for (int j = 0; j < n_; ++j) {
      vals[i].a.v[j] = W * xi_[i].a.v[j];
      vals[i].b.v[j] = W * xi_[i].b.v[j];
    }
  }
  return std::make_shared<SampledFieldSignal>(t_, std::move(vals),
                                              spec_.delta / (2.0 * spec_.ramp_speed));
}

// ------------------------------------------------------------ stage results

struct StageControls {
  int level = 0;
  SignalPtr eta;
  // diagnostics
  double pre_projection_residual = 0.0;  // stage N only
  double terminal_error = 0.0;           // against the spec targets
  double gap = 0.0;                      // against the previous stage (reductions)
  double rho_deviation = 0.0;            // sup_t density drift vs previous stage
  int segments = 0;
  int osc = 0;
};

inline SolverConfig synthesis_solver_config(const TargetSpec& spec) {
  SolverConfig cfg;
  cfg.T = spec.T;
  cfg.store_target = 129;
  return cfg;
}

inline StageControls stageN_controls(const TargetSpec& spec) {
  SynthesisPlan plan(spec);
  StageControls out;
  out.level = spec.N;
  out.pre_projection_residual = plan.construction_residual();
  out.eta = plan.control_signal();

  SystemInput in;
  in.init = LimitState(spec.grid_n());
  in.init.rho0 = spec.g0;
  in.init.u0 = spec.v0;
  in.init.A = spec.A0;
  in.init.rho1 = spec.g1;
  in.init.u1 = spec.v1;
  in.eta = out.eta;
  const Trajectory traj = solve_limit(in, synthesis_solver_config(spec));
  out.terminal_error = target_error(traj.terminal(), spec);
  return out;
}

// -------------------------------------------------------------- segmentation

struct ControlSegment {
  double t0 = 0.0, t1 = 0.0;
  TrigPair mean;
};

// Uniform segmentation of a coefficient-valued control curve: the count
// doubles until replacing the curve by its per-segment means moves the
// running time integral by at most tol_K, measured in the discrete H^3 norm
// so the hold error is budgeted in the norm the closed system responds to.
// The per-segment deviation resets at each edge because a trapezoid mean
// integrates to zero against its own segment.
// Pass integ when the curve has a closed-form integral. Sampling an
// already-reduced control aliases its narrow crossfade ramps into spurious
// segment means; exact means are clean, and the oscillatory part integrates
// to zero between nested power-of-two edges, where the smoothed profile
// vanishes.
inline std::vector<ControlSegment> segment_control(
    const std::function<TrigPair(double)>& value, double t0, double t1, double tol_K,
    int max_segments, double min_len,
    const std::function<bool(double, double, TrigPair&)>& integ = {}) {
  const int samples = 32;
  const auto pair_h3 = [](const TrigPair& p) {
    const double na = p.a.sobolev_norm(3), nb = p.b.sobolev_norm(3);
    return std::sqrt(na * na + nb * nb);
  };
  std::vector<ControlSegment> out;
  for (int count = 1;; count *= 2) {
    out.clear();
    double worst = 0.0;
    const double len = (t1 - t0) / count;
    for (int seg = 0; seg < count; ++seg) {
      const double a = t0 + seg * len;
      const double b = (seg + 1 == count) ? t1 : a + len;
      const double h = (b - a) / samples;
      TrigPair m;
      bool exact = false;
      if (integ) {
        TrigPair total;
        if (integ(a, b, total)) {
          m = (1.0 / (b - a)) * total;
          exact = true;
        }
      }
      if (exact) {
        TrigPair acc;
        for (int i = 1; i <= samples; ++i) {
          TrigPair piece;
          integ(a + (i - 1) * h, a + i * h, piece);
          acc = acc + piece + (-h) * m;
          worst = std::max(worst, pair_h3(acc));
        }
      } else {
        std::vector<TrigPair> f(static_cast<std::size_t>(samples) + 1);
        for (int i = 0; i <= samples; ++i) f[static_cast<std::size_t>(i)] = value(a + i * h);
        for (int i = 0; i <= samples; ++i) {
          const double w = (i == 0 || i == samples) ? 0.5 : 1.0;
          m = m + (w / samples) * f[static_cast<std::size_t>(i)];
        }
        TrigPair acc;
        for (int i = 1; i <= samples; ++i) {
          const TrigPair& fa = f[static_cast<std::size_t>(i - 1)];
          const TrigPair& fb = f[static_cast<std::size_t>(i)];
          acc = acc + (0.5 * h) * ((fa - m) + (fb - m));
          worst = std::max(worst, pair_h3(acc));
        }
      }
      out.push_back({a, b, m});
    }
    if (worst <= tol_K) break;
    if (2 * count > max_segments || 0.5 * len < min_len) break;
  }
  return out;
}

// ----------------------------------------------------------- stage reduction

struct ReductionParts {
  std::vector<double> edges;
  std::vector<TrigPair> eta_bar;
  std::vector<OscillatorSchedule> schedules;
  std::vector<SmoothedOscillator> smoothed;
  int grid_n = 0;

  SignalPtr eta_bar_signal() const {
    return std::make_shared<StepSignal>(grid_n, edges, eta_bar);
  }
  SignalPtr mu_raw_signal() const {
    return std::make_shared<OscillatorStepSignal>(grid_n, schedules);
  }
  SignalPtr mu_value_signal() const {
    return std::make_shared<SmoothedOscSignal>(grid_n, smoothed, SmoothedOscSignal::Mode::value);
  }
  SignalPtr mu_rate_signal() const {
    return std::make_shared<SmoothedOscSignal>(grid_n, smoothed, SmoothedOscSignal::Mode::derivative);
  }
  // The reduced control: segment means' low parts plus the exact derivative
  // of the smoothed oscillator.
  SignalPtr reduced_control() const {
    return std::make_shared<SumSignal>(std::vector<SignalPtr>{eta_bar_signal(), mu_rate_signal()});
  }
};

inline ReductionParts build_reduction(const std::vector<ControlSegment>& segments, int level,
                                      int osc, int smooth_m, int grid_n) {
  ReductionParts parts;
  parts.grid_n = grid_n;
  parts.edges.reserve(segments.size() + 1);
  parts.edges.push_back(segments.front().t0);
  // The crossfade between adjacent slots bites a fixed fraction ~1/(8 m) out
  // of every quadratic slot average, independent of the oscillation count, so
  // the mollification must tighten as osc grows or the reduction gap floors
  // out. Scaling m with osc keeps the bite decaying at the same 1/osc rate as
  // the running-integral term.
  const int m_eff = std::max(1, smooth_m) * std::max(1, osc);
  for (const auto& s : segments) {
    parts.edges.push_back(s.t1);
    const PairedDecomposition dec = decompose_pair(s.mean, level);
    parts.eta_bar.push_back(dec.low);
    parts.schedules.push_back(build_oscillator(dec.pairs, s.t0, s.t1, osc));
    parts.smoothed.emplace_back(parts.schedules.back(), m_eff);
  }
  return parts;
}

// Replaces an E_{n+1}-valued control by an E_n-valued one and verifies the
// closed system still lands near the previous stage's terminal state. With
// enforce set, a gap above the stage tolerance throws OscillationInsufficient.
inline StageControls reduce_stage(const StageControls& stage_in, const TargetSpec& spec, int n,
                                  int osc_n, int smooth_m, bool enforce = true) {
  if (n != stage_in.level - 1)
    throw std::invalid_argument("reduce_stage: can only lower the level by one");
  const int grid_n = spec.grid_n();
  const double tol_n = stage_tolerance(spec, n);

  // Value accessor in coefficient space.
  const PairSignal* sig = stage_in.eta.get();
  std::function<TrigPair(double)> value;
  std::vector<ControlSegment> segments;
  if (const auto* step = dynamic_cast<const StepSignal*>(sig)) {
    for (std::size_t i = 0; i < step->values().size(); ++i)
      segments.push_back({step->edges()[i], step->edges()[i + 1], step->values()[i]});
  } else {
    if (const auto* cut = dynamic_cast<const CutoffControlSignal*>(sig)) {
      value = [cut](double t) { return cut->value_poly_at(t); };
    } else if (const auto* poly = dynamic_cast<const PolyCurveSignal*>(sig)) {
      value = [poly](double t) { return poly->value_at(t); };
    } else {
      value = [sig, n](double t) {
        const FieldPair p = sig->at(t);
        return TrigPair(poly_from_field(p.a, n + 2), poly_from_field(p.b, n + 2));
      };
    }
    const std::function<bool(double, double, TrigPair&)> integ = [sig, n](double a, double b,
                                                                          TrigPair& out_p) {
      FieldPair buf;
      if (!sig->integral(a, b, buf)) return false;
      out_p = TrigPair(poly_from_field(buf.a, n + 2), poly_from_field(buf.b, n + 2));
      return true;
    };
    segments = segment_control(value, 0.0, spec.T, 0.1 * tol_n, 512, spec.T / 4096.0, integ);
  }

  StageControls out;
  out.level = n;
  out.segments = static_cast<int>(segments.size());
  out.osc = osc_n;

  // Fast path: the control already lives in E_n.
  bool already_low = true;
  for (const auto& s : segments) {
    const double tol = 1e-13 * std::max(1.0, s.mean.max_abs_coef());
    if (!s.mean.a.in_level(n, tol) || !s.mean.b.in_level(n, tol)) {
      already_low = false;
      break;
    }
  }

  SystemInput base;
  base.init = LimitState(grid_n);
  base.init.rho0 = spec.g0;
  base.init.u0 = spec.v0;
  base.init.A = spec.A0;
  base.init.rho1 = spec.g1;
  base.init.u1 = spec.v1;

  const SolverConfig cfg = synthesis_solver_config(spec);
  SystemInput ref_in = base;
  ref_in.eta = stage_in.eta;
  const Trajectory ref = solve_limit(ref_in, cfg);

  if (already_low) {
    out.eta = stage_in.eta;
    out.gap = 0.0;
    out.rho_deviation = 0.0;
    out.terminal_error = target_error(ref.terminal(), spec);
    return out;
  }

  const ReductionParts parts = build_reduction(segments, n, osc_n, smooth_m, grid_n);
  out.eta = parts.reduced_control();

  SystemInput red_in = base;
  red_in.eta = out.eta;
  const Trajectory red = solve_limit(red_in, cfg);

  out.gap = state_norm(state_diff(red.terminal(), ref.terminal()), 3);
  out.terminal_error = target_error(red.terminal(), spec);
  double rho_dev = 0.0;
  const int probes = 64;
  for (int i = 0; i <= probes; ++i) {
    const double t = spec.T * i / probes;
    const LimitState a = red.at(t), b = ref.at(t);
    const double d0 = sobolev_norm(a.rho0 - b.rho0, 3);
    const double d1 = sobolev_norm(a.rho1 - b.rho1, 1);
    rho_dev = std::max(rho_dev, std::sqrt(d0 * d0 + d1 * d1));
  }
  out.rho_deviation = rho_dev;

  if (enforce && out.gap > tol_n) throw OscillationInsufficient(out.gap, tol_n, osc_n);
  return out;
}

// -------------------------------------------------------------- full pipeline

struct StageTrace {
  int level = 0;
  int osc = 0;
  int segments = 0;
  double gap = 0.0;
  double tol = 0.0;
  double rho_deviation = 0.0;
  double terminal_error = 0.0;
};

struct SynthesisReport {
  double pre_projection_residual = 0.0;
  double stageN_terminal_error = 0.0;
  std::vector<StageTrace> stages;
  double final_error = 0.0;
  bool target_met = false;
};

// Runs stage N and the reduction chain down to E_0, doubling the oscillation
// count per stage from 4 until the stage tolerance is met, the improvement
// stalls, or osc_max is reached. With strict set, a final error above eps
// throws TargetUnreached; otherwise the report carries the best achieved
// error and the parameter trace.
inline std::pair<StageControls, SynthesisReport> full_pipeline(const TargetSpec& spec,
                                                               bool strict = false) {
  SynthesisReport report;
  StageControls current = stageN_controls(spec);
  report.pre_projection_residual = current.pre_projection_residual;
  report.stageN_terminal_error = current.terminal_error;

  for (int n = spec.N - 1; n >= 0; --n) {
    const double tol_n = stage_tolerance(spec, n);
    StageControls best;
    bool have_best = false;
    std::exception_ptr last_failure;
    for (int osc = 4; osc <= spec.osc_max; osc *= 2) {
      StageControls cand;
      try {
        cand = reduce_stage(current, spec, n, osc, spec.smooth_m, false);
      } catch (const BlowUp&) {
        // The candidate's verification run lost density positivity; record
        // it as unusable and let more oscillation have a try.
        const double bad = std::numeric_limits<double>::infinity();
        report.stages.push_back({n, osc, 0, bad, tol_n, bad, bad});
        last_failure = std::current_exception();
        continue;
      }
      StageTrace trace{cand.level, cand.osc, cand.segments, cand.gap,
                       tol_n,      cand.rho_deviation, cand.terminal_error};
      report.stages.push_back(trace);
      const bool improved = !have_best || cand.gap < 0.9 * best.gap;
      if (!have_best || cand.gap < best.gap) {
        best = cand;
        have_best = true;
      }
      if (cand.gap <= tol_n) break;
      if (cand.gap == 0.0) break;  // fast path
      if (!improved) break;        // oscillation no longer helping
    }
    if (!have_best && last_failure) std::rethrow_exception(last_failure);
    current = best;
  }
  report.final_error = current.terminal_error;
  report.target_met = report.final_error <= spec.eps;
  if (strict && !report.target_met) throw TargetUnreached(report.final_error, spec.eps);
  return {current, report};
}

}  // namespace scl
