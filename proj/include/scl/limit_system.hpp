#pragma once

// The coupled limit dynamics on the torus: leading density/velocity, the
// phase-current corrector A, and the first-order density/velocity
// correctors, driven by a control pair eta and two perturbation pairs
// (xi enters the momentum fluxes, zeta the transport fluxes):
//
//   d rho0 = -d/dx((u0 + zeta0) rho0)
//   d u0   = eta0 - d/dx( (u0 + xi0)^2 / 2 + rho0 )
//   d A    = -(u0 + zeta0) dA/dx - 2 d(u0 + zeta0)/dx A
//   d rho1 = dA/dx - d/dx((u0 + zeta0) rho1 + (u1 + zeta1) rho0)
//   d u1   = eta1 - d/dx( (u0 + xi0)(u1 + xi1) + rho1 )
//
// Integrated by classic RK4 on a Fourier collocation grid with the 2/3
// dealiasing rule folded into every flux derivative. The stepper never
// crosses a signal breakpoint, freezes piecewise-constant signals per
// segment, and resolves smooth signal features with at least eight steps.
// The control enters the velocity updates additively, so its contribution
// per RK4 step is exactly a Simpson rule; when the signal provides a
// closed-form time integral the stepper swaps that in, which removes the
// ramp-shaped quadrature residue steep derivative controls would otherwise
// deposit at every ramp regardless of step count.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "scl/errors.hpp"
#include "scl/field.hpp"
#include "scl/signals.hpp"

namespace scl {

struct LimitState {
  PeriodicField rho0, u0, A, rho1, u1;
  LimitState() = default;
  explicit LimitState(int n) : rho0(n), u0(n), A(n), rho1(n), u1(n) {}
  int n() const { return rho0.n; }
};

struct SystemInput {
  LimitState init;
  SignalPtr xi, zeta, eta;  // null = zero
};

struct SolverConfig {
  double T = 1.0;
  double cfl = 0.45;
  double dt_max = 5e-3;
  int min_steps_per_segment = 8;
  int store_target = 129;      // approximate number of stored snapshots
  bool store_u0_rate = false;  // also store du0/dt at snapshots
  double blowup_fraction = 0.05;
  long long max_steps = 50000000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<LimitState> states;
  std::vector<PeriodicField> u0_rate;  // filled when cfg.store_u0_rate
  std::vector<double> mass0, mass1;    // integral of rho0, rho1 at snapshots
  double min_rho0_seen = 0.0;
  long long steps = 0;
  const LimitState& terminal() const { return states.back(); }

  LimitState at(double t) const {
    if (times.empty()) throw std::logic_error("Trajectory::at on empty trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    std::size_t lo = 0, hi = times.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (times[mid] <= t ? lo : hi) = mid;
    }
    const double w = (t - times[lo]) / (times[lo + 1] - times[lo]);
    const LimitState &a = states[lo], &b = states[lo + 1];
    LimitState r(a.n());
    auto blend = [&](const PeriodicField& x, const PeriodicField& y, PeriodicField& out) {
      for (int j = 0; j < out.n; ++j) out.v[j] = (1.0 - w) * x.v[j] + w * y.v[j];
    };
    blend(a.rho0, b.rho0, r.rho0);
    blend(a.u0, b.u0, r.u0);
    blend(a.A, b.A, r.A);
    blend(a.rho1, b.rho1, r.rho1);
    blend(a.u1, b.u1, r.u1);
    return r;
  }
};

// --------------------------------------------------------------------- norms

// Graph norm of a state tuple: H^k for (rho0, u0), H^{k-2} for (rho1, u1),
// H^{k-1} for A, with negative orders floored at L2.
inline double state_norm(const LimitState& s, int k) {
  const int k2 = std::max(0, k - 2), k1 = std::max(0, k - 1);
  const double a = sobolev_norm(s.rho0, k);
  const double b = sobolev_norm(s.u0, k);
  const double c = sobolev_norm(s.A, k1);
  const double d = sobolev_norm(s.rho1, k2);
  const double e = sobolev_norm(s.u1, k2);
  return std::sqrt(a * a + b * b + c * c + d * d + e * e);
}

inline LimitState state_diff(const LimitState& x, const LimitState& y) {
  LimitState r(x.n());
  r.rho0 = x.rho0 - y.rho0;
  r.u0 = x.u0 - y.u0;
  r.A = x.A - y.A;
  r.rho1 = x.rho1 - y.rho1;
  r.u1 = x.u1 - y.u1;
  return r;
}

// sup over probe times of the state-difference graph norm.
inline double trajectory_diff_norm(const Trajectory& a, const Trajectory& b, int k, int probes = 65) {
  const double T = std::min(a.times.back(), b.times.back());
  double m = 0.0;
  for (int i = 0; i <= probes; ++i) {
    const double t = T * i / probes;
    m = std::max(m, state_norm(state_diff(a.at(t), b.at(t)), k));
  }
  return m;
}

// Input-space norm: graph norm of the initial tuple plus L2-in-time norms of
// the signals (H^{k+1} for the leading perturbation slots, H^{k-1} for the
// corrector slots, H^k / H^{k-2} for the control).
inline double input_norm(const SystemInput& in, int k, double T, int nt = 129) {
  double acc = state_norm(in.init, k);
  acc *= acc;
  const int n = in.init.n();
  auto l2t = [&](const SignalPtr& sig, int ka, int kb) {
    if (!sig) return 0.0;
    double s = 0.0, prev_a = 0.0, prev_b = 0.0;
    for (int i = 0; i <= nt; ++i) {
      const double t = T * i / nt;
      const FieldPair p = sig->at(t);
      const double na = sobolev_norm(p.a, std::max(0, ka));
      const double nb = sobolev_norm(p.b, std::max(0, kb));
      if (i > 0) s += 0.5 * (T / nt) * (prev_a * prev_a + na * na + prev_b * prev_b + nb * nb);
      prev_a = na;
      prev_b = nb;
    }
    return s;
  };
  (void)n;
  acc += l2t(in.xi, k + 1, k - 1);
  acc += l2t(in.zeta, k + 1, k - 1);
  acc += l2t(in.eta, k, k - 2);
  return std::sqrt(acc);
}

// -------------------------------------------------------------------- solver

class LimitSolver {
 public:
  explicit LimitSolver(int n)
      : n_(n), ops_(n), w0z_(n), w0x_(n), w1z_(n), w1x_(n), tmp_(n), tmp2_(n), da_(n), dwz_(n) {
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &stage_}) *k = LimitState(n);
  }

  Trajectory solve(const SystemInput& in, const SolverConfig& cfg) {
    if (in.init.n() != n_) throw std::invalid_argument("LimitSolver: grid size mismatch");
    LimitState y = in.init;
    // Band-limit the state once at entry; every flux derivative keeps it so.
    for (auto* f : {&y.rho0, &y.u0, &y.A, &y.rho1, &y.u1}) ops_.filter23(f->v);

    const SignalPtr xi = in.xi, zeta = in.zeta, eta = in.eta;
    std::vector<double> edges = merged_breakpoints(in, cfg.T);

    Trajectory traj;
    const double rho_floor = cfg.blowup_fraction * min_value(y.rho0);
    traj.min_rho0_seen = min_value(y.rho0);
    double next_store = 0.0;
    const double store_dt = cfg.T / std::max(1, cfg.store_target - 1);

    double t = 0.0;
    store(traj, t, y, xi, zeta, eta, cfg);
    next_store += store_dt;

    for (std::size_t si = 0; si + 1 < edges.size(); ++si) {
      const double a = edges[si], b = edges[si + 1];
      const double len = b - a;
      if (len <= 1e-14) continue;

      const bool xi_pc = !xi || xi->piecewise_constant();
      const bool zeta_pc = !zeta || zeta->piecewise_constant();
      const bool eta_pc = !eta || eta->piecewise_constant();
      const double mid = 0.5 * (a + b);
      const FieldPair xi_c = value_of(xi, mid);
      const FieldPair zeta_c = value_of(zeta, mid);
      const FieldPair eta_c = value_of(eta, mid);

      // CFL speed from the segment-entry state plus the frozen perturbations.
      double speed = 0.0, rho_max = 0.0;
      for (int j = 0; j < n_; ++j) {
        const double wz = std::abs(y.u0.v[j] + zeta_c.a.v[j]);
        const double wx = std::abs(y.u0.v[j] + xi_c.a.v[j]);
        speed = std::max(speed, std::max(wz, wx));
        rho_max = std::max(rho_max, y.rho0.v[j]);
      }
      speed += std::sqrt(rho_max);
      double dt = cfg.cfl * (kTwoPi / n_) / std::max(speed, 0.1);
      dt = std::min(dt, cfg.dt_max);
      const double fine =
          std::min(std::min(timescale(xi, a, b), timescale(zeta, a, b)), timescale(eta, a, b));
      if (std::isfinite(fine)) dt = std::min(dt, fine / 8.0);
      long long steps = std::max<long long>(static_cast<long long>(std::ceil(len / dt)),
                                            cfg.min_steps_per_segment);
      const double h = len / steps;

      for (long long i = 0; i < steps; ++i) {
        const double t0 = a + i * h;
        if (traj.steps++ > cfg.max_steps) throw std::runtime_error("LimitSolver: step budget exhausted");

        const FieldPair* xs[3];
        const FieldPair* zs[3];
        const FieldPair* es[3];
        stage_values(xi, xi_pc, xi_c, t0, h, xi_buf_, xs);
        stage_values(zeta, zeta_pc, zeta_c, t0, h, zeta_buf_, zs);
        stage_values(eta, eta_pc, eta_c, t0, h, eta_buf_, es);

        rhs(y, *xs[0], *zs[0], *es[0], k1_);
        axpy(stage_, y, 0.5 * h, k1_);
        rhs(stage_, *xs[1], *zs[1], *es[1], k2_);
        axpy(stage_, y, 0.5 * h, k2_);
        rhs(stage_, *xs[1], *zs[1], *es[1], k3_);
        axpy(stage_, y, h, k3_);
        rhs(stage_, *xs[2], *zs[2], *es[2], k4_);
        update(y, h);
        if (eta && !eta_pc && eta->integral(t0, t0 + h, int_buf_)) {
          // Replace the control's Simpson contribution with its exact
          // integral; the stage states keep the sampled values.
          const double w = h / 6.0;
          for (int j = 0; j < n_; ++j) {
            y.u0.v[j] += int_buf_.a.v[j] - w * (es[0]->a.v[j] + 4.0 * es[1]->a.v[j] + es[2]->a.v[j]);
            y.u1.v[j] += int_buf_.b.v[j] - w * (es[0]->b.v[j] + 4.0 * es[1]->b.v[j] + es[2]->b.v[j]);
          }
        }
        ops_.filter23(y.A.v);  // the transport update is the one non-flux term

        const double t1 = t0 + h;
        const double mr = min_value(y.rho0);
        traj.min_rho0_seen = std::min(traj.min_rho0_seen, mr);
        if (mr < rho_floor) throw BlowUp(t1, mr);

        if (t1 >= next_store - 1e-12 || (si + 2 == edges.size() && i + 1 == steps)) {
          store(traj, t1, y, xi, zeta, eta, cfg);
          while (next_store <= t1 + 1e-12) next_store += store_dt;
        }
      }
    }
    return traj;
  }

 private:
  static double timescale(const SignalPtr& s, double a, double b) {
    return s ? s->local_timescale(a, b) : std::numeric_limits<double>::infinity();
  }

  FieldPair value_of(const SignalPtr& s, double t) const { return s ? s->at(t) : FieldPair(n_); }

  // Fills ptr[0..2] with the signal values at the three RK4 stage times
  // (t0, t0+h/2, t0+h); frozen signals alias the cached segment value.
  void stage_values(const SignalPtr& sig, bool pc, const FieldPair& cached, double t0, double h,
                    std::array<FieldPair, 3>& buf, const FieldPair* ptr[3]) const {
    if (pc) {
      ptr[0] = ptr[1] = ptr[2] = &cached;
    } else {
      buf[0] = sig->at(t0);
      buf[1] = sig->at(t0 + 0.5 * h);
      buf[2] = sig->at(t0 + h);
      ptr[0] = &buf[0];
      ptr[1] = &buf[1];
      ptr[2] = &buf[2];
    }
  }

  static std::vector<double> merged_breakpoints(const SystemInput& in, double T) {
    std::vector<double> e{0.0, T};
    for (const auto& s : {in.xi, in.zeta, in.eta}) {
      if (!s) continue;
      for (double b : s->breakpoints())
        if (b > 1e-14 && b < T - 1e-14) e.push_back(b);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-13; }),
            e.end());
    return e;
  }

  void rhs(const LimitState& s, const FieldPair& xi, const FieldPair& zeta, const FieldPair& eta,
           LimitState& out) {
    for (int j = 0; j < n_; ++j) {
      w0z_[j] = s.u0.v[j] + zeta.a.v[j];
      w0x_[j] = s.u0.v[j] + xi.a.v[j];
      w1z_[j] = s.u1.v[j] + zeta.b.v[j];
      w1x_[j] = s.u1.v[j] + xi.b.v[j];
    }
    for (int j = 0; j < n_; ++j) tmp_[j] = w0z_[j] * s.rho0.v[j];
    ops_.deriv23(tmp_, out.rho0.v);
    for (int j = 0; j < n_; ++j) out.rho0.v[j] = -out.rho0.v[j];

    for (int j = 0; j < n_; ++j) tmp_[j] = 0.5 * w0x_[j] * w0x_[j] + s.rho0.v[j];
    ops_.deriv23(tmp_, out.u0.v);
    for (int j = 0; j < n_; ++j) out.u0.v[j] = eta.a.v[j] - out.u0.v[j];

    ops_.deriv23(s.A.v, da_);
    ops_.deriv23(w0z_, dwz_);
    for (int j = 0; j < n_; ++j) out.A.v[j] = -(w0z_[j] * da_[j] + 2.0 * dwz_[j] * s.A.v[j]);

    for (int j = 0; j < n_; ++j) tmp_[j] = w0z_[j] * s.rho1.v[j] + w1z_[j] * s.rho0.v[j];
    ops_.deriv23(tmp_, tmp2_);
    for (int j = 0; j < n_; ++j) out.rho1.v[j] = da_[j] - tmp2_[j];

    for (int j = 0; j < n_; ++j) tmp_[j] = w0x_[j] * w1x_[j] + s.rho1.v[j];
    ops_.deriv23(tmp_, tmp2_);
    for (int j = 0; j < n_; ++j) out.u1.v[j] = eta.b.v[j] - tmp2_[j];
  }

  // stage_ = y + c * k
  void axpy(LimitState& dst, const LimitState& y, double c, const LimitState& k) {
    auto f = [&](const PeriodicField& a, const PeriodicField& b, PeriodicField& o) {
      for (int j = 0; j < n_; ++j) o.v[j] = a.v[j] + c * b.v[j];
    };
    f(y.rho0, k.rho0, dst.rho0);
    f(y.u0, k.u0, dst.u0);
    f(y.A, k.A, dst.A);
    f(y.rho1, k.rho1, dst.rho1);
    f(y.u1, k.u1, dst.u1);
  }

  // y += h/6 (k1 + 2 k2 + 2 k3 + k4)
  void update(LimitState& y, double h) {
    auto f = [&](PeriodicField& yy, const PeriodicField& a, const PeriodicField& b,
                 const PeriodicField& c, const PeriodicField& d) {
      const double w = h / 6.0;
      for (int j = 0; j < n_; ++j) yy.v[j] += w * (a.v[j] + 2.0 * b.v[j] + 2.0 * c.v[j] + d.v[j]);
    };
    f(y.rho0, k1_.rho0, k2_.rho0, k3_.rho0, k4_.rho0);
    f(y.u0, k1_.u0, k2_.u0, k3_.u0, k4_.u0);
    f(y.A, k1_.A, k2_.A, k3_.A, k4_.A);
    f(y.rho1, k1_.rho1, k2_.rho1, k3_.rho1, k4_.rho1);
    f(y.u1, k1_.u1, k2_.u1, k3_.u1, k4_.u1);
  }

  void store(Trajectory& traj, double t, const LimitState& y, const SignalPtr& xi,
             const SignalPtr& zeta, const SignalPtr& eta, const SolverConfig& cfg) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.mass0.push_back(kTwoPi * mean(y.rho0));
    traj.mass1.push_back(kTwoPi * mean(y.rho1));
    if (cfg.store_u0_rate) {
      rhs(y, value_of(xi, t), value_of(zeta, t), value_of(eta, t), k1_);
      traj.u0_rate.push_back(k1_.u0);
    }
  }

  int n_;
  FieldOps ops_;
  std::vector<double> w0z_, w0x_, w1z_, w1x_, tmp_, tmp2_, da_, dwz_;
  LimitState k1_, k2_, k3_, k4_, stage_;
  std::array<FieldPair, 3> xi_buf_, zeta_buf_, eta_buf_;
  FieldPair int_buf_;
};

inline Trajectory solve_limit(const SystemInput& in, const SolverConfig& cfg) {
  LimitSolver solver(in.init.n());
  return solver.solve(in, cfg);
}

// Finite-increment sensitivity of the solution map: ratio of the trajectory
// graph-norm distance (one order below k) to the input distance.
struct ProbeResult {
  double dy = 0.0, dx = 0.0;
  double ratio() const { return dx > 0.0 ? dy / dx : 0.0; }
};

inline ProbeResult lipschitz_probe(const SystemInput& a, const SystemInput& b, int k,
                                   const SolverConfig& cfg) {
  const Trajectory ta = solve_limit(a, cfg);
  const Trajectory tb = solve_limit(b, cfg);
  ProbeResult r;
  r.dy = trajectory_diff_norm(ta, tb, k - 1);
  SystemInput diff;
  diff.init = state_diff(a.init, b.init);
  auto sub = [&](const SignalPtr& x, const SignalPtr& y) -> SignalPtr {
    if (!x && !y) return nullptr;
    std::vector<SignalPtr> parts;
    if (x) parts.push_back(x);
    if (y) parts.push_back(std::make_shared<ScaledSignal>(-1.0, y));
    return std::make_shared<SumSignal>(std::move(parts));
  };
  diff.xi = sub(a.xi, b.xi);
  diff.zeta = sub(a.zeta, b.zeta);
  diff.eta = sub(a.eta, b.eta);
  r.dx = input_norm(diff, k - 1, cfg.T);
  return r;
}

}  // namespace scl
