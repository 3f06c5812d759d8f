#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>

#include "scl/errors.hpp"
#include "scl/grenier.hpp"
#include "scl/limit_system.hpp"
#include "scl/nls.hpp"

using namespace scl;

namespace {

PeriodicField mode(int n, int k, double amp, bool is_sin) {
  PeriodicGrid g(n);
  PeriodicField f(n);
  for (int j = 0; j < n; ++j) f[j] = amp * (is_sin ? std::sin(k * g.x(j)) : std::cos(k * g.x(j)));
  return f;
}

double cdist(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (int j = 0; j < a.n; ++j) m = std::max(m, std::abs(a.v[j] - b.v[j]));
  return m;
}

}  // namespace

TEST_CASE("potential recovery from the control") {
  const int n = 64;
  PeriodicField F1 = potential_from_control(mode(n, 1, 1.0, true));
  CHECK(linf_norm(F1 - mode(n, 1, 1.0, false)) < 1e-13);

  PeriodicField F2 = potential_from_control(mode(n, 2, 1.0, false));
  CHECK(linf_norm(F2 - mode(n, 2, -0.5, true)) < 1e-13);

  TrigPolynomial Fp = potential_from_control(TrigPolynomial::sin_mode(1));
  CHECK(Fp.cos_coef(1) == Catch::Approx(1.0));
  CHECK(Fp.sin_coef(1) == Catch::Approx(0.0));
  TrigPolynomial Fq = potential_from_control(TrigPolynomial::cos_mode(2));
  CHECK(Fq.sin_coef(2) == Catch::Approx(-0.5));
}

TEST_CASE("plane waves ride the exact dispersion") {
  const int n = 64;
  const double hbar = 0.5, T = 1.0;
  PeriodicGrid g(n);
  ComplexField psi0(n);
  for (int j = 0; j < n; ++j) psi0.v[j] = std::polar(1.0, 2.0 * g.x(j));

  NlsConfig cfg;
  cfg.T = T;
  NlsTrajectory traj = solve_nls(psi0, zero_signal(n), hbar, cfg);

  ComplexField expect(n);
  for (int j = 0; j < n; ++j) expect.v[j] = std::polar(1.0, 2.0 * g.x(j) - hbar * 4.0 * T / 2.0);
  CHECK(cdist(traj.terminal(), expect) < 1e-11);
  CHECK(std::abs(traj.mass.back() - traj.mass.front()) < 1e-12);
}

TEST_CASE("uniform amplitude rotates by the constant potential") {
  const int n = 32;
  const double hbar = 0.25, T = 0.7;
  ComplexField psi0(n, std::complex<double>(std::sqrt(2.0), 0.0));

  NlsConfig cfg;
  cfg.T = T;
  NlsTrajectory traj = solve_nls(psi0, zero_signal(n), hbar, cfg);

  const std::complex<double> expect = std::polar(std::sqrt(2.0), -T / hbar);
  for (int j = 0; j < n; ++j) CHECK(std::abs(traj.terminal().v[j] - expect) < 1e-11);
}

TEST_CASE("solver rejects a non positive semiclassical parameter") {
  ComplexField psi0(16, std::complex<double>(1.0, 0.0));
  NlsConfig cfg;
  CHECK_THROWS_AS(solve_nls(psi0, zero_signal(16), 0.0, cfg), ConfigError);
}

TEST_CASE("observable extraction inverts the polar form") {
  const int n = 128;
  const double hbar = 0.25;
  PeriodicField rho = PeriodicField(n, 1.0) + mode(n, 1, 0.1, false);
  PeriodicField S = mode(n, 1, -0.1, false);  // S' = 0.1 sin x
  ComplexField psi(n);
  for (int j = 0; j < n; ++j) psi.v[j] = std::polar(std::sqrt(rho[j]), S[j] / hbar);

  Observables obs = extract_observables(psi, hbar);
  CHECK(linf_norm(obs.rho - rho) < 1e-12);
  CHECK(linf_norm(obs.u - mode(n, 1, 0.1, true)) < 1e-8);
}

TEST_CASE("free phase amplitude flow matches the closed form") {
  const int n = 64;
  const double hbar = 0.125, T = 1.0;
  PeriodicGrid g(n);
  GrenierState init(n);
  for (int j = 0; j < n; ++j) init.a.v[j] = std::polar(1.0, g.x(j));

  NlsConfig cfg;
  cfg.T = T;
  GrenierTrajectory traj = solve_grenier(init, zero_signal(n), hbar, cfg);

  ComplexField expect(n);
  for (int j = 0; j < n; ++j) expect.v[j] = std::polar(1.0, g.x(j) - hbar * T / 2.0);
  CHECK(cdist(traj.terminal().a, expect) < 1e-10);
  CHECK(linf_norm(traj.terminal().u) < 1e-10);
  CHECK(std::abs(traj.terminal().S_mean) < 1e-10);
}

TEST_CASE("phase amplitude reconstruction tracks the wavefunction") {
  const int n = 64;
  const double hbar = 0.25, T = 0.5;
  PeriodicGrid g(n);

  GrenierState init(n);
  for (int j = 0; j < n; ++j) {
    init.a.v[j] = std::sqrt(1.0 + 0.1 * std::cos(g.x(j)));
  }
  init.u = mode(n, 1, 0.1, true);

  auto control = std::make_shared<ConstantSignal>(
      n, TrigPair{TrigPolynomial::sin_mode(1, 0.2), {}});

  NlsConfig cfg;
  cfg.T = T;
  cfg.dt_scale = 0.5;
  GrenierTrajectory gt = solve_grenier(init, control, hbar, cfg);
  ComplexField from_grenier = grenier_wavefunction(gt.terminal(), hbar);

  ComplexField psi0 = grenier_wavefunction(init, hbar);
  NlsTrajectory nt = solve_nls(psi0, control, hbar, cfg);

  CHECK(l2_norm(nt.terminal() - from_grenier) < 1e-5);
}

TEST_CASE("expansion cascade agrees with the limit system") {
  const int n = 128;
  const double T = 0.5;

  PeriodicField g0 = PeriodicField(n, 1.0) + mode(n, 1, 0.1, false);
  PeriodicField theta = mode(n, 1, 0.05, true);
  PeriodicField g1 = mode(n, 1, 0.05, false);
  PeriodicField v0 = mode(n, 1, 0.1, true);

  WKBState init(n);
  for (int j = 0; j < n; ++j) {
    init.a0.v[j] = std::polar(std::sqrt(g0[j]), theta[j]);
    init.a1.v[j] = g1[j] / (2.0 * g0[j]) * init.a0.v[j];
  }
  init.u0 = v0;

  auto control = std::make_shared<ConstantSignal>(
      n, TrigPair{TrigPolynomial::sin_mode(1, 0.1), TrigPolynomial::sin_mode(2, 0.05)});

  NlsConfig wcfg;
  wcfg.T = T;
  WKBTrajectory wt = solve_wkb(init, control, wcfg);
  LimitObservables wobs = wkb_to_limit(wt.terminal());

  SystemInput in;
  in.init = LimitState(n);
  in.init.rho0 = g0;
  in.init.u0 = v0;
  in.init.A = wkb_to_limit(init).A;
  in.init.rho1 = g1;
  in.xi = zero_signal(n);
  in.zeta = zero_signal(n);
  in.eta = control;
  SolverConfig lcfg;
  lcfg.T = T;
  Trajectory lt = solve_limit(in, lcfg);
  const LimitState& fin = lt.terminal();

  CHECK(l2_norm(wobs.rho0 - fin.rho0) < 1e-6);
  CHECK(l2_norm(wobs.u0 - fin.u0) < 1e-6);
  CHECK(l2_norm(wobs.A - fin.A) < 1e-6);
  CHECK(l2_norm(wobs.rho1 - fin.rho1) < 1e-6);
  CHECK(l2_norm(wobs.u1 - fin.u1) < 1e-6);
}

TEST_CASE("wavefunction mass is conserved under a driven potential") {
  const int n = 64;
  const double hbar = 0.0625;
  PeriodicGrid g(n);
  ComplexField psi0(n);
  for (int j = 0; j < n; ++j)
    psi0.v[j] = std::polar(std::sqrt(1.0 + 0.1 * std::cos(g.x(j))), 0.05 * std::sin(g.x(j)) / hbar);

  auto control = std::make_shared<ConstantSignal>(
      n, TrigPair{TrigPolynomial::sin_mode(1, 1.0), {}});
  NlsConfig cfg;
  cfg.T = 0.5;
  NlsTrajectory traj = solve_nls(psi0, control, hbar, cfg);
  for (double m : traj.mass) CHECK(std::abs(m - traj.mass.front()) < 1e-10);
}
