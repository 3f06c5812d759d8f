#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "scl/errors.hpp"
#include "scl/synthesis.hpp"

using namespace scl;

namespace {

PeriodicField mode(int n, int k, double amp, bool is_sin) {
  PeriodicGrid g(n);
  PeriodicField f(n);
  for (int j = 0; j < n; ++j) f[j] = amp * (is_sin ? std::sin(k * g.x(j)) : std::cos(k * g.x(j)));
  return f;
}

TargetSpec rest_spec(int n) {
  TargetSpec spec;
  spec.g0 = PeriodicField(n, 1.0);
  spec.v0 = PeriodicField(n);
  spec.g1 = PeriodicField(n);
  spec.v1 = PeriodicField(n);
  spec.A0 = PeriodicField(n);
  spec.g0_hat = spec.g0;
  spec.v0_hat = spec.v0;
  spec.g1_hat = spec.g1;
  spec.v1_hat = spec.v1;
  return spec;
}

bool mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("spec validation names the offending key") {
  const int n = 64;

  TargetSpec bad_grid = rest_spec(n);
  bad_grid.v1_hat = PeriodicField(32);
  try {
    bad_grid.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "v1_hat"));
  }

  TargetSpec bad_mass = rest_spec(n);
  bad_mass.g0_hat = PeriodicField(n, 1.1);
  try {
    bad_mass.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "g0_hat"));
  }

  TargetSpec bad_vel = rest_spec(n);
  bad_vel.v0 = PeriodicField(n, 0.3);
  try {
    bad_vel.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "zero mean"));
  }

  TargetSpec bad_delta = rest_spec(n);
  bad_delta.delta = 0.5;
  try {
    bad_delta.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "delta"));
  }

  TargetSpec neg_density = rest_spec(n);
  neg_density.g0 = mode(n, 1, 2.0, false) + PeriodicField(n, 1.0);
  neg_density.g0_hat = neg_density.g0;
  CHECK_THROWS_AS(neg_density.validate(), ConfigError);
}

TEST_CASE("stage budget is a geometric split") {
  TargetSpec spec = rest_spec(64);
  spec.eps = 0.08;
  spec.N = 2;
  CHECK(stage_tolerance(spec, 2) == Catch::Approx(0.04));
  CHECK(stage_tolerance(spec, 1) == Catch::Approx(0.02));
  CHECK(stage_tolerance(spec, 0) == Catch::Approx(0.01));
  double sum = 0.0;
  for (int k = 0; k <= spec.N; ++k) sum += stage_tolerance(spec, k);
  CHECK(sum < spec.eps);
}

TEST_CASE("construction solves the node equations") {
  const int n = 128;
  TargetSpec spec = rest_spec(n);
  spec.g0_hat = PeriodicField(n, 1.0) + mode(n, 1, 0.05, false);
  spec.nodes = 1024;
  spec.N = 1;

  SynthesisPlan plan(spec);
  CHECK(plan.construction_residual() < 1e-8);

  // With v-hat = 0 the initial perturbation solves d/dx(g0 xi0) = -d/dt rho0,
  // and the linear density path gives xi0(0) = -0.05 sin(x).
  PeriodicField expect = mode(n, 1, -0.05, true);
  CHECK(linf_norm(plan.xi_node(0).a - expect) < 1e-10);
}

TEST_CASE("cutoff window saturates inside and vanishes at the ends") {
  const int n = 64;
  TargetSpec spec = rest_spec(n);
  spec.g0_hat = PeriodicField(n, 1.0) + mode(n, 1, 0.02, false);
  spec.nodes = 512;
  spec.delta = 0.05;

  SynthesisPlan plan(spec);
  auto sig = plan.control_signal();
  CHECK(sig->window(0.0) == 0.0);
  CHECK(sig->window(spec.T) == 0.0);
  CHECK(sig->window(0.5 * spec.T) == 1.0);
  CHECK(sig->window(spec.delta) == 1.0);
  CHECK(sig->finest_timescale() == Catch::Approx(spec.delta / 4.0));

  // W and W' vanish at the ends, so the control there is the projected bare
  // eta with no window term: here d/dx(xi0^2/2) = 2e-4 sin(2x) at t = 0
  PeriodicField eta0 = sig->at(0.0).a;
  CHECK(linf_norm(eta0 - mode(n, 2, 2e-4, true)) < 1e-12);

  // the windowed perturbation itself dies at both endpoints
  auto cut = plan.xi_cut_signal();
  CHECK(linf_norm(cut->at(0.0).a) < 1e-13);
  CHECK(linf_norm(cut->at(spec.T).a) < 1e-13);
  CHECK(linf_norm(cut->at(0.5 * spec.T).a) > 1e-3);
}

TEST_CASE("segmentation splits curves and keeps constants whole") {
  auto constant = [](double) { return TrigPair{TrigPolynomial::sin_mode(1, 0.3), {}}; };
  auto segs = segment_control(constant, 0.0, 1.0, 0.05, 64, 1.0 / 512.0);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].mean.a.sin_coef(1) == Catch::Approx(0.3).margin(1e-12));

  auto ramp = [](double t) { return TrigPair{TrigPolynomial::sin_mode(1, t), {}}; };
  auto rsegs = segment_control(ramp, 0.0, 1.0, 0.05, 64, 1.0 / 512.0);
  CHECK(rsegs.size() > 1);
  for (const auto& s : rsegs) {
    // trapezoid mean of a linear coefficient curve is its midpoint value
    CHECK(s.mean.a.sin_coef(1) == Catch::Approx(0.5 * (s.t0 + s.t1)).margin(1e-12));
  }
  // edges tile the interval
  CHECK(rsegs.front().t0 == 0.0);
  CHECK(rsegs.back().t1 == Catch::Approx(1.0));
  for (std::size_t i = 1; i < rsegs.size(); ++i) CHECK(rsegs[i].t0 == Catch::Approx(rsegs[i - 1].t1));
}

TEST_CASE("splitting a reduction into many segments does not add bias") {
  // The reduced control's steep derivative ramps repeat per segment; each
  // traversal must integrate exactly, or the per-segment residue (which no
  // step refinement removes) accumulates into a terminal offset that stalls
  // the oscillation sweep.
  const int n = 32;
  TrigPair eta;
  eta.a = TrigPolynomial::sin_mode(2, 0.01);

  SystemInput base;
  base.init = LimitState(n);
  base.init.rho0 = PeriodicField(n, 1.0);
  SolverConfig cfg;
  cfg.T = 1.0;

  SystemInput ref_in = base;
  ref_in.eta = std::make_shared<ConstantSignal>(n, eta);
  const Trajectory ref = solve_limit(ref_in, cfg);

  std::vector<ControlSegment> segs;
  for (int k = 0; k < 16; ++k) segs.push_back({k / 16.0, (k + 1) / 16.0, eta});
  std::vector<double> gaps;
  for (int osc : {4, 8}) {
    const ReductionParts parts = build_reduction(segs, 0, osc, 2, n);
    SystemInput in = base;
    in.eta = parts.reduced_control();
    const Trajectory red = solve_limit(in, cfg);
    gaps.push_back(state_norm(state_diff(red.terminal(), ref.terminal()), 3));
  }
  CHECK(gaps[1] < 0.7 * gaps[0]);
  CHECK(gaps[1] < 8e-3);
}

TEST_CASE("full pipeline reaches a nearby target through first level controls") {
  const int n = 64;
  TargetSpec spec = rest_spec(n);
  spec.g0_hat = PeriodicField(n, 1.0) + mode(n, 1, 0.02, false);
  spec.v0_hat = mode(n, 1, 0.02, true);
  spec.eps = 0.1;
  spec.N = 1;
  spec.nodes = 1024;

  auto [controls, report] = full_pipeline(spec);

  CHECK(report.target_met);
  CHECK(report.final_error <= spec.eps);
  CHECK(controls.level == 0);
  REQUIRE(!report.stages.empty());
  for (const auto& st : report.stages) CHECK(st.tol > 0.0);

  // the reduced control lives in the lowest span level
  for (double t : {0.21, 0.43, 0.68}) {
    FieldPair v = controls.eta->at(t);
    TrigPolynomial p = poly_from_field(v.a, 6);
    CHECK(p.degree(1e-9 * std::max(1.0, p.max_abs_coef())) <= 1);
  }
}
