#pragma once

// Acceptance criteria for the whole pipeline: each criterion states a
// quantitative property of the algebra, the solvers or the synthesis chain,
// with tolerances pinned here in code. The final criterion replays the
// entire suite and requires byte-identical reports, so every criterion must
// be deterministic: fixed seeds, fixed iteration orders, no clocks.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scl/bracket.hpp"
#include "scl/characteristics.hpp"
#include "scl/grenier.hpp"
#include "scl/harness.hpp"
#include "scl/io.hpp"
#include "scl/limit_system.hpp"
#include "scl/nls.hpp"
#include "scl/oscillator.hpp"
#include "scl/synthesis.hpp"

namespace scl {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  json details;
};

namespace acceptance {

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline json to_json_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

// ---------------------------------------------------------------- criterion 1

// Every signed single-mode function through level 6 decomposes into low
// modes plus factor products that reproduce it pointwise.
inline CriterionResult criterion_identity_table() {
  CriterionResult r{1, "identity-table", false, 0.0, 1e-12, {}};
  double worst = 0.0;
  int cases = 0;
  for (int n = 0; n <= 6; ++n) {
    for (int q = 1; q <= n + 2; ++q) {
      for (double amp : {1.0, 0.37, 2.5}) {
        for (double sign : {1.0, -1.0}) {
          for (bool is_sin : {true, false}) {
            TrigPolynomial psi = is_sin ? TrigPolynomial::sin_mode(q, sign * amp)
                                        : TrigPolynomial::cos_mode(q, sign * amp);
            const BracketDecomposition dec = decompose_mode(psi, n);
            worst = std::max(worst, mode_identity_residual(psi, dec));
            ++cases;
          }
        }
      }
    }
  }
  r.measured = worst;
  r.pass = worst <= r.tolerance;
  r.details = json{{"cases", cases}, {"max_residual", worst}};
  return r;
}

// ---------------------------------------------------------------- criterion 2

// Random control pairs reproduce both defining identities of the paired
// decomposition: the transport part from the squared factors, the momentum
// part from the factor products.
inline CriterionResult criterion_pair_cancellation() {
  CriterionResult r{2, "pair-cancellation", false, 0.0, 1e-12, {}};
  std::mt19937_64 rng(12345);
  auto unit = [&]() { return std::ldexp(static_cast<double>(rng() >> 11), -53) * 2.0 - 1.0; };
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const int n = static_cast<int>(rng() % 5);
    TrigPair zeta;
    for (int k = 1; k <= n + 2; ++k) {
      zeta.a.add_sin(k, unit());
      zeta.a.add_cos(k, unit());
      zeta.b.add_sin(k, unit());
      zeta.b.add_cos(k, unit());
    }
    const PairedDecomposition dec = decompose_pair(zeta, n);
    worst = std::max(worst, pair_identity_residual(zeta, dec));
  }
  r.measured = worst;
  r.pass = worst <= r.tolerance;
  r.details = json{{"draws", 20}, {"max_residual", worst}};
  return r;
}

// ---------------------------------------------------------------- criterion 3

// The running integral of the oscillator's momentum defect around a frozen
// background decays like one over the oscillation count: the log-log slope
// over n in {4,...,64} must sit in [-1.2, -0.8].
inline CriterionResult criterion_relaxation_decay() {
  CriterionResult r{3, "relaxation-decay", false, 0.0, 0.0, {}};
  const int gn = 256;
  FieldOps ops(gn);
  PeriodicField u0 = TrigPolynomial::sin_mode(1, 0.3).to_field(gn);
  {
    const PeriodicField extra = TrigPolynomial::cos_mode(2, 0.1).to_field(gn);
    for (int j = 0; j < gn; ++j) u0.v[j] += extra.v[j];
  }
  const PeriodicField u1 = TrigPolynomial::cos_mode(1, 0.1).to_field(gn);

  TrigPair zeta;
  zeta.b = TrigPolynomial::sin_mode(2, 1.0);
  const PairedDecomposition dec = decompose_pair(zeta, 0);

  const std::vector<double> counts{4, 8, 16, 32, 64};
  std::vector<double> K;
  for (double cn : counts) {
    const OscillatorSchedule sched = build_oscillator(dec.pairs, 0.0, 1.0, static_cast<int>(cn));
    const std::size_t m = sched.slots.size();
    // Per-slot defect fields within one period, then the exact running
    // integral over slot boundaries (the defect is constant per slot).
    std::vector<PeriodicField> f0(m, PeriodicField(gn)), f1(m, PeriodicField(gn));
    PeriodicField c0(gn), c1(gn);
    for (std::size_t s = 0; s < m; ++s) {
      PeriodicField w0 = u0, w1 = u1;
      sched.slots[s].a.add_to(w0.v);
      sched.slots[s].b.add_to(w1.v);
      PeriodicField flux0(gn), flux1(gn);
      for (int j = 0; j < gn; ++j) {
        flux0.v[j] = 0.5 * w0.v[j] * w0.v[j];
        flux1.v[j] = w0.v[j] * w1.v[j];
      }
      ops.deriv(flux0.v, f0[s].v);
      ops.deriv(flux1.v, f1[s].v);
      for (int j = 0; j < gn; ++j) {
        c0.v[j] += f0[s].v[j] / static_cast<double>(m);
        c1.v[j] += f1[s].v[j] / static_cast<double>(m);
      }
    }
    const double len = sched.slot_len();
    PeriodicField I0(gn), I1(gn);
    double best = 0.0;
    const long long total = static_cast<long long>(m) * static_cast<long long>(cn);
    for (long long b = 0; b < total; ++b) {
      const std::size_t s = static_cast<std::size_t>(b % static_cast<long long>(m));
      for (int j = 0; j < gn; ++j) {
        I0.v[j] += len * (f0[s].v[j] - c0.v[j]);
        I1.v[j] += len * (f1[s].v[j] - c1.v[j]);
      }
      best = std::max(best, std::max(linf_norm(I0), linf_norm(I1)));
    }
    K.push_back(best);
  }
  const double slope = fit_loglog_slope(counts, K);
  r.measured = slope;
  r.pass = slope >= -1.2 && slope <= -0.8;
  r.details = json{{"counts", to_json_array(counts)}, {"K", to_json_array(K)}, {"slope", slope}};
  return r;
}

// ---------------------------------------------------------------- criterion 4

// Conservative flux forms keep both densities' integrals fixed along the
// limit flow (relative drift at most 1e-8) and the splitting scheme keeps
// the wavefunction mass fixed (relative drift at most 1e-10).
inline CriterionResult criterion_mass_conservation() {
  CriterionResult r{4, "mass-conservation", false, 0.0, 1e-8, {}};
  const int gn = 256;
  SystemInput in;
  in.init = LimitState(gn);
  in.init.rho0 = TrigPolynomial::cos_mode(1, 0.1).to_field(gn);
  for (int j = 0; j < gn; ++j) in.init.rho0.v[j] += 1.0;
  in.init.u0 = TrigPolynomial::sin_mode(1, 0.1).to_field(gn);
  in.init.A = TrigPolynomial::sin_mode(1, 0.02).to_field(gn);
  in.init.rho1 = TrigPolynomial::cos_mode(1, 0.05).to_field(gn);
  for (int j = 0; j < gn; ++j) in.init.rho1.v[j] += 0.02;
  TrigPair eta;
  eta.a = TrigPolynomial::sin_mode(1, 0.1);
  eta.b = TrigPolynomial::sin_mode(2, 0.05);
  in.eta = std::make_shared<ConstantSignal>(gn, eta);
  TrigPair xi;
  xi.a = TrigPolynomial::sin_mode(2, 0.05);
  in.xi = std::make_shared<ConstantSignal>(gn, xi);
  in.zeta = in.xi;
  SolverConfig cfg;
  cfg.T = 1.0;
  const Trajectory traj = solve_limit(in, cfg);
  double drift0 = 0.0, drift1 = 0.0;
  for (std::size_t i = 0; i < traj.mass0.size(); ++i) {
    drift0 = std::max(drift0, std::abs(traj.mass0[i] - traj.mass0[0]) / std::abs(traj.mass0[0]));
    drift1 = std::max(drift1,
                      std::abs(traj.mass1[i] - traj.mass1[0]) / std::max(std::abs(traj.mass1[0]), 1.0));
  }

  NlsConfig ncfg;
  ncfg.T = 1.0;
  const double hbar = 0.0625;
  ComplexField psi0(gn);
  const PeriodicGrid grid(gn);
  for (int j = 0; j < gn; ++j) {
    const double x = grid.x(j);
    psi0.v[static_cast<std::size_t>(j)] =
        std::sqrt(1.0 + 0.1 * std::cos(x)) * std::exp(std::complex<double>(0.0, 0.05 * std::sin(x)));
  }
  TrigPair neta;
  neta.a = TrigPolynomial::sin_mode(1, 1.0);
  const NlsTrajectory ntraj =
      solve_nls(psi0, std::make_shared<ConstantSignal>(gn, neta), hbar, ncfg);
  double ndrift = 0.0;
  for (double m : ntraj.mass) ndrift = std::max(ndrift, std::abs(m - ntraj.mass[0]) / ntraj.mass[0]);

  r.measured = std::max(drift0, drift1);
  r.pass = drift0 <= 1e-8 && drift1 <= 1e-8 && ndrift <= 1e-10;
  r.details = json{{"limit_mass0_drift", drift0},
                   {"limit_mass1_drift", drift1},
                   {"nls_mass_drift", ndrift},
                   {"nls_tolerance", 1e-10}};
  return r;
}

// ---------------------------------------------------------------- criterion 5

// The transported current computed along backward characteristics agrees
// with the spectral solution of the same transport equation to 1e-6 in the
// maximum norm for a smooth frozen velocity.
inline CriterionResult criterion_characteristics() {
  CriterionResult r{5, "characteristics-agreement", false, 0.0, 1e-6, {}};
  const int gn = 256;
  PeriodicField u = TrigPolynomial::sin_mode(1, 0.4).to_field(gn);
  {
    const PeriodicField extra = TrigPolynomial::cos_mode(2, 0.1).to_field(gn);
    for (int j = 0; j < gn; ++j) u.v[j] += extra.v[j];
  }
  PeriodicField A0 = TrigPolynomial::cos_mode(1, 1.0).to_field(gn);
  {
    const PeriodicField extra = TrigPolynomial::sin_mode(2, 0.5).to_field(gn);
    for (int j = 0; j < gn; ++j) A0.v[j] += extra.v[j];
  }
  const double T = 1.0;

  // Spectral route: RK4 with dealiased products.
  FieldOps ops(gn);
  PeriodicField du(gn);
  ops.deriv23(u.v, du.v);
  PeriodicField A = A0;
  ops.filter23(A.v);
  const int steps = 8192;
  const double h = T / steps;
  PeriodicField k1(gn), k2(gn), k3(gn), k4(gn), stage(gn), dA(gn);
  auto rhs = [&](const PeriodicField& a, PeriodicField& out) {
    ops.deriv23(a.v, dA.v);
    for (int j = 0; j < gn; ++j) out.v[j] = -(u.v[j] * dA.v[j] + 2.0 * du.v[j] * a.v[j]);
  };
  for (int i = 0; i < steps; ++i) {
    rhs(A, k1);
    for (int j = 0; j < gn; ++j) stage.v[j] = A.v[j] + 0.5 * h * k1.v[j];
    rhs(stage, k2);
    for (int j = 0; j < gn; ++j) stage.v[j] = A.v[j] + 0.5 * h * k2.v[j];
    rhs(stage, k3);
    for (int j = 0; j < gn; ++j) stage.v[j] = A.v[j] + h * k3.v[j];
    rhs(stage, k4);
    for (int j = 0; j < gn; ++j)
      A.v[j] += h / 6.0 * (k1.v[j] + 2.0 * k2.v[j] + 2.0 * k3.v[j] + k4.v[j]);
    ops.filter23(A.v);
  }

  const VelocityCurve vel = VelocityCurve::frozen(u);
  const PeriodicField Ac = solve_A_characteristics(vel, A0, T, 4000);
  double err = 0.0;
  for (int j = 0; j < gn; ++j) err = std::max(err, std::abs(A.v[j] - Ac.v[j]));
  r.measured = err;
  r.pass = err <= r.tolerance;
  r.details = json{{"max_diff", err}, {"spectral_steps", steps}, {"characteristic_steps", 4000}};
  return r;
}

// ---------------------------------------------------------------- criterion 6

// The exact construction behind stage N: equation residuals at most 1e-8
// before any projection, and the windowed, projected control steers the
// closed system to within 1e-2 of a small single-mode retarget (N = 3,
// window width T/20).
inline CriterionResult criterion_stage_construction() {
  CriterionResult r{6, "stage-construction", false, 0.0, 1e-2, {}};
  const int gn = 256;
  TargetSpec spec;
  spec.g0 = PeriodicField(gn, 1.0);
  spec.v0 = PeriodicField(gn);
  spec.g1 = PeriodicField(gn);
  spec.v1 = PeriodicField(gn);
  spec.A0 = PeriodicField(gn);
  spec.g0_hat = TrigPolynomial::cos_mode(1, 0.05).to_field(gn);
  for (int j = 0; j < gn; ++j) spec.g0_hat.v[j] += 1.0;
  spec.v0_hat = TrigPolynomial::sin_mode(1, 0.05).to_field(gn);
  spec.g1_hat = PeriodicField(gn);
  spec.v1_hat = PeriodicField(gn);
  spec.T = 1.0;
  spec.N = 3;
  spec.delta = spec.T / 20.0;
  const StageControls st = stageN_controls(spec);
  r.measured = st.terminal_error;
  r.pass = st.pre_projection_residual <= 1e-8 && st.terminal_error <= 1e-2;
  r.details = json{{"pre_projection_residual", st.pre_projection_residual},
                   {"residual_tolerance", 1e-8},
                   {"terminal_error", st.terminal_error}};
  return r;
}

// ---------------------------------------------------------------- criterion 7

// Reducing a constant level-one control (0, 0.01 sin 2x) to level zero: the
// terminal gap at 32 oscillations is at most 1e-2, the gap falls strictly
// with each doubling, and the densities stay within twice the terminal
// tolerance along the whole trajectory. The gap decays like 1/osc (the
// running integral of the oscillator is O(slot)), so the margin here is the
// honest constant of that rate at this control size, not a tuned quantity.
inline CriterionResult criterion_reduction() {
  CriterionResult r{7, "reduction-e1-e0", false, 0.0, 1e-2, {}};
  const int gn = 256;
  TargetSpec spec;
  spec.g0 = PeriodicField(gn, 1.0);
  spec.v0 = PeriodicField(gn);
  spec.g1 = PeriodicField(gn);
  spec.v1 = PeriodicField(gn);
  spec.A0 = PeriodicField(gn);
  spec.g0_hat = spec.g0;
  spec.v0_hat = spec.v0;
  spec.g1_hat = spec.g1;
  spec.v1_hat = spec.v1;
  spec.T = 1.0;
  spec.N = 1;
  spec.eps = 4e-2;  // stage tolerance for n = 0 is then 1e-2

  StageControls in;
  in.level = 1;
  TrigPair eta;
  eta.b = TrigPolynomial::sin_mode(2, 1e-2);
  in.eta = std::make_shared<ConstantSignal>(gn, eta);

  std::vector<double> gaps, devs;
  for (int osc : {4, 8, 16, 32}) {
    const StageControls red = reduce_stage(in, spec, 0, osc, 2, false);
    gaps.push_back(red.gap);
    devs.push_back(red.rho_deviation);
  }
  r.measured = gaps.back();
  r.pass = gaps.back() <= 1e-2 && strictly_decreasing(gaps) && devs.back() <= 2e-2;
  r.details = json{{"osc", json::array({4, 8, 16, 32})},
                   {"gaps", to_json_array(gaps)},
                   {"rho_deviations", to_json_array(devs)},
                   {"rho_tolerance", 2e-2}};
  return r;
}

// ---------------------------------------------------------------- criterion 8

// Whether the oscillating perturbation also rides in the transport slots
// matters less and less as the oscillation speeds up: the distance between
// the two closures falls strictly along n in {4, 8, 16, 32}.
inline CriterionResult criterion_insensitivity() {
  CriterionResult r{8, "transport-insensitivity", false, 0.0, 0.0, {}};
  const int gn = 256;
  TrigPair zeta;
  zeta.b = TrigPolynomial::sin_mode(2, 1.0);
  const PairedDecomposition dec = decompose_pair(zeta, 0);

  SolverConfig cfg;
  cfg.T = 1.0;
  std::vector<double> dist;
  for (int nosc : {4, 8, 16, 32}) {
    const OscillatorSchedule sched = build_oscillator(dec.pairs, 0.0, 1.0, nosc);
    const SignalPtr mu =
        std::make_shared<OscillatorStepSignal>(gn, std::vector<OscillatorSchedule>{sched});
    SystemInput U;
    U.init = LimitState(gn);
    U.init.rho0 = PeriodicField(gn, 1.0);
    U.xi = mu;
    SystemInput V = U;
    V.zeta = mu;
    const Trajectory tu = solve_limit(U, cfg);
    const Trajectory tv = solve_limit(V, cfg);
    dist.push_back(trajectory_diff_norm(tu, tv, 3));
  }
  r.measured = dist.back();
  r.pass = strictly_decreasing(dist);
  r.details = json{{"osc", json::array({4, 8, 16, 32})}, {"distance", to_json_array(dist)}};
  return r;
}

// ------------------------------------------------- shared controlled scenario

inline Scenario controlled_scenario() {
  ConfigMap m;
  m["name"] = "controlled";
  m["grid.n"] = "256";
  m["time.T"] = "1.0";
  m["spec.g0"] = "const:1.0 + cos:1:0.1";
  m["spec.v0"] = "sin:1:0.1";
  m["spec.g1"] = "cos:1:0.05";
  m["spec.v1"] = "0";
  m["spec.theta"] = "sin:1:0.05";
  m["spec.g0_hat"] = "const:1.0 + cos:1:0.05";
  m["spec.v0_hat"] = "sin:1:0.05";
  m["spec.g1_hat"] = "cos:1:0.02";
  m["spec.v1_hat"] = "0";
  m["synthesis.N"] = "1";
  m["synthesis.eps"] = "0.05";
  m["synthesis.delta"] = "0.05";
  m["synthesis.osc_max"] = "32";
  m["nls.hbar"] = "0.0625";
  m["nls.dt_scale"] = "0.25";
  return load_scenario(m);
}

// The wavefunction and semiclassical criteria probe the solvers under the
// synthesized control itself (the smooth stage signal): they quantify the
// phase-amplitude reformulation and the expansion orders, not the dimension
// reduction, which criteria 7 and 8 cover on their own axis.
struct ControlledContext {
  Scenario sc;
  StageControls controls;
  Trajectory limit_run;

  ControlledContext() : sc(controlled_scenario()) {
    controls = stageN_controls(sc.spec);
    SystemInput in;
    in.init = limit_initial_state(sc);
    in.eta = controls.eta;
    limit_run = solve_limit(in, synthesis_solver_config(sc.spec));
  }
};

// ---------------------------------------------------------------- criterion 9

// Dual route to the wavefunction under the synthesized control: direct
// splitting for psi versus the phase-amplitude solver plus reconstruction
// agree to 1e-6 in L2 at hbar = 1/16.
inline CriterionResult criterion_wavefunction_agreement(const ControlledContext& ctx) {
  CriterionResult r{9, "wavefunction-agreement", false, 0.0, 1e-6, {}};
  const double hbar = ctx.sc.hbar;
  NlsConfig cfg;
  cfg.T = ctx.sc.spec.T;
  cfg.dt_scale = ctx.sc.nls_dt_scale;
  const ComplexField psi =
      solve_nls(nls_initial_psi(ctx.sc, hbar), ctx.controls.eta, hbar, cfg).terminal();
  const GrenierState g =
      solve_grenier(grenier_initial_state(ctx.sc, hbar), ctx.controls.eta, hbar, cfg).terminal();
  const ComplexField rec = grenier_wavefunction(g, hbar);
  ComplexField d(psi.n);
  for (std::size_t j = 0; j < d.v.size(); ++j) d.v[j] = rec.v[j] - psi.v[j];
  r.measured = l2_norm(d);
  r.pass = r.measured <= r.tolerance;
  r.details = json{{"hbar", hbar}, {"l2_difference", r.measured}};
  return r;
}

// --------------------------------------------------------------- criterion 10

// The expansion orders under the synthesized control: the amplitude error
// against the leading order scales at least linearly in hbar (log-log slope
// >= 0.9), the first-order defect falls strictly, and the terminal density
// gap is explained by the synthesis error plus a fitted hbar^2 term (every
// point within 25% slack of the fit).
inline CriterionResult criterion_expansion_orders(const ControlledContext& ctx) {
  CriterionResult r{10, "expansion-orders", false, 0.0, 0.9, {}};
  NlsConfig cfg;
  cfg.T = ctx.sc.spec.T;
  const WKBState w = solve_wkb(wkb_initial_state(ctx.sc), ctx.controls.eta, cfg).terminal();

  const std::vector<double> hbars{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<double> amp0, amp1, gaps;
  const int gn = ctx.sc.grid_n();
  for (double hb : hbars) {
    const GrenierState g =
        solve_grenier(grenier_initial_state(ctx.sc, hb), ctx.controls.eta, hb, cfg).terminal();
    ComplexField d0(gn), d1(gn);
    PeriodicField rho_gap(gn);
    for (int j = 0; j < gn; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      d0.v[js] = g.a.v[js] - w.a0.v[js];
      d1.v[js] = d0.v[js] / hb - w.a1.v[js];
      rho_gap.v[j] = std::norm(g.a.v[js]) -
                     (ctx.sc.spec.g0_hat.v[j] + hb * ctx.sc.spec.g1_hat.v[j]);
    }
    amp0.push_back(l2_norm(d0));
    amp1.push_back(l2_norm(d1));
    gaps.push_back(l2_norm(rho_gap));
  }

  const double slope = fit_loglog_slope(hbars, amp0);
  const LimitState& lT = ctx.limit_run.terminal();
  const double eps_synth =
      l2_norm(lT.rho0 - ctx.sc.spec.g0_hat) + l2_norm(lT.rho1 - ctx.sc.spec.g1_hat);

  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < hbars.size(); ++i) {
    const double x = hbars[i] * hbars[i];
    const double y = std::max(gaps[i] - eps_synth, 0.0);
    sxy += x * y;
    sxx += x * x;
  }
  const double C = sxy / sxx;
  bool fit_ok;
  if (C > 0.0) {
    fit_ok = true;
    for (std::size_t i = 0; i < hbars.size(); ++i)
      if (gaps[i] > eps_synth + 1.25 * C * hbars[i] * hbars[i] + 1e-12) fit_ok = false;
  } else {
    fit_ok = true;
    for (double g : gaps)
      if (g > eps_synth + 1e-12) fit_ok = false;
  }

  r.measured = slope;
  r.pass = slope >= 0.9 && strictly_decreasing(amp1) && fit_ok;
  r.details = json{{"hbars", to_json_array(hbars)},
                   {"amp_error_order0", to_json_array(amp0)},
                   {"amp_error_order1", to_json_array(amp1)},
                   {"slope", slope},
                   {"density_gaps", to_json_array(gaps)},
                   {"eps_synth", eps_synth},
                   {"C_fit", C}};
  return r;
}

// --------------------------------------------------------------- criterion 11

// Local Lipschitz behaviour of the solution map: the ratio of output to
// input distance stays within a factor of two while the perturbation scale
// sweeps three decades.
inline CriterionResult criterion_lipschitz() {
  CriterionResult r{11, "input-lipschitz", false, 0.0, 2.0, {}};
  const int gn = 256;
  SystemInput base;
  base.init = LimitState(gn);
  base.init.rho0 = TrigPolynomial::cos_mode(1, 0.1).to_field(gn);
  for (int j = 0; j < gn; ++j) base.init.rho0.v[j] += 1.0;
  base.init.u0 = TrigPolynomial::sin_mode(1, 0.1).to_field(gn);
  base.init.A = TrigPolynomial::sin_mode(1, 0.05).to_field(gn);
  base.init.rho1 = TrigPolynomial::cos_mode(1, 0.05).to_field(gn);
  TrigPair eta;
  eta.a = TrigPolynomial::sin_mode(1, 0.1);
  base.eta = std::make_shared<ConstantSignal>(gn, eta);

  const PeriodicField drho0 = TrigPolynomial::cos_mode(2, 1.0).to_field(gn);
  const PeriodicField du0 = TrigPolynomial::sin_mode(2, 0.5).to_field(gn);
  const PeriodicField drho1 = TrigPolynomial::cos_mode(1, 1.0).to_field(gn);
  TrigPair deta;
  deta.b = TrigPolynomial::sin_mode(2, 1.0);
  const SignalPtr deta_sig = std::make_shared<ConstantSignal>(gn, deta);

  SolverConfig cfg;
  cfg.T = 1.0;
  const std::vector<double> scales{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> ratios;
  for (double s : scales) {
    SystemInput pert = base;
    for (int j = 0; j < gn; ++j) {
      pert.init.rho0.v[j] += s * drho0.v[j];
      pert.init.u0.v[j] += s * du0.v[j];
      pert.init.rho1.v[j] += s * drho1.v[j];
    }
    pert.eta = std::make_shared<SumSignal>(
        std::vector<SignalPtr>{base.eta, std::make_shared<ScaledSignal>(s, deta_sig)});
    const ProbeResult p = lipschitz_probe(base, pert, 3, cfg);
    ratios.push_back(p.ratio());
  }
  double lo = ratios[0], hi = ratios[0];
  for (double x : ratios) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  r.measured = hi / lo;
  r.pass = r.measured <= r.tolerance;
  r.details = json{{"scales", to_json_array(scales)}, {"ratios", to_json_array(ratios)}};
  return r;
}

}  // namespace acceptance

inline json criteria_to_json(const std::vector<CriterionResult>& results) {
  json arr = json::array();
  for (const auto& c : results) {
    arr.push_back(json{{"id", c.id},
                       {"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"tolerance", c.tolerance},
                       {"details", c.details}});
  }
  return arr;
}

inline std::vector<CriterionResult> run_criteria() {
  std::vector<CriterionResult> out;
  out.push_back(acceptance::criterion_identity_table());
  out.push_back(acceptance::criterion_pair_cancellation());
  out.push_back(acceptance::criterion_relaxation_decay());
  out.push_back(acceptance::criterion_mass_conservation());
  out.push_back(acceptance::criterion_characteristics());
  out.push_back(acceptance::criterion_stage_construction());
  out.push_back(acceptance::criterion_reduction());
  out.push_back(acceptance::criterion_insensitivity());
  const acceptance::ControlledContext ctx;
  out.push_back(acceptance::criterion_wavefunction_agreement(ctx));
  out.push_back(acceptance::criterion_expansion_orders(ctx));
  out.push_back(acceptance::criterion_lipschitz());
  return out;
}

struct AcceptanceOutcome {
  std::vector<CriterionResult> results;
  bool all_pass = false;
  json report;
};

// Runs the eleven quantitative criteria twice and adds the determinism
// criterion: both passes must serialize to byte-identical JSON.
inline AcceptanceOutcome run_acceptance() {
  AcceptanceOutcome out;
  out.results = run_criteria();
  const std::vector<CriterionResult> second = run_criteria();
  const std::string dump1 = criteria_to_json(out.results).dump();
  const std::string dump2 = criteria_to_json(second).dump();

  CriterionResult det{12, "determinism", dump1 == dump2, dump1 == dump2 ? 0.0 : 1.0, 0.0, {}};
  det.details = json{{"bytes", dump1.size()}, {"identical", dump1 == dump2}};
  out.results.push_back(det);

  out.all_pass = true;
  for (const auto& c : out.results) out.all_pass = out.all_pass && c.pass;
  out.report = json{{"criteria", criteria_to_json(out.results)}, {"all_pass", out.all_pass}};
  return out;
}

}  // namespace scl
