#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "scl/bracket.hpp"
#include "scl/errors.hpp"
#include "scl/oscillator.hpp"
#include "scl/trig_poly.hpp"

using namespace scl;

TEST_CASE("polynomial evaluation and calculus") {
  TrigPolynomial p = TrigPolynomial::sin_mode(2, 1.5);
  p.add_cos(3, -0.5);

  CHECK(p.eval(0.7) == Catch::Approx(1.5 * std::sin(1.4) - 0.5 * std::cos(2.1)).margin(1e-14));
  CHECK(p.max_mode() == 3);
  CHECK(p.degree() == 3);

  TrigPolynomial d = p.derivative();
  CHECK(d.cos_coef(2) == Catch::Approx(3.0));
  CHECK(d.sin_coef(3) == Catch::Approx(1.5));

  TrigPolynomial a = TrigPolynomial::cos_mode(3).antiderivative();
  CHECK(a.sin_coef(3) == Catch::Approx(1.0 / 3.0));
  CHECK(a.cos_coef(3) == Catch::Approx(0.0));

  CHECK(TrigPolynomial::sin_mode(4, 2.0).l2_norm() == Catch::Approx(2.0 * std::sqrt(kPi)));
}

TEST_CASE("membership in a span level") {
  TrigPolynomial p = TrigPolynomial::sin_mode(3, 0.25);
  CHECK(p.in_level(2));
  CHECK_FALSE(p.in_level(1));
  CHECK(TrigPolynomial{}.in_level(0));
}

TEST_CASE("field projection recovers coefficients") {
  TrigPolynomial p;
  p.add_sin(1, 0.9);
  p.add_cos(2, -0.4);
  p.add_sin(5, 0.01);

  PeriodicField f = p.to_field(128);
  TrigPolynomial q = poly_from_field(f, 5);
  CHECK(q.sin_coef(1) == Catch::Approx(0.9).margin(1e-13));
  CHECK(q.cos_coef(2) == Catch::Approx(-0.4).margin(1e-13));
  CHECK(q.sin_coef(5) == Catch::Approx(0.01).margin(1e-13));

  double dropped = -1.0;
  TrigPolynomial low = poly_from_field(f, 2, &dropped);
  CHECK(low.max_mode() == 2);
  CHECK(dropped == Catch::Approx(0.01 * std::sqrt(kPi)).epsilon(1e-10));
}

TEST_CASE("single mode decomposition satisfies its identity") {
  for (int n : {0, 1, 3}) {
    for (int q = 1; q <= n + 2; ++q) {
      BracketDecomposition dec = decompose_mode(TrigPolynomial::sin_mode(q, 0.8), n);
      CHECK(mode_identity_residual(TrigPolynomial::sin_mode(q, 0.8), dec) < 1e-12);
      CHECK(dec.low.in_level(n));
      for (const auto& g : dec.factors) CHECK(g.in_level(n));
    }
  }
}

TEST_CASE("decomposition rejects inputs beyond reach") {
  CHECK_THROWS_AS(decompose_mode(TrigPolynomial::sin_mode(3), 0), NotInSpace);
  CHECK_THROWS_AS(decompose_pair(TrigPair{TrigPolynomial::cos_mode(4), {}}, 1), NotInSpace);
}

TEST_CASE("paired decomposition of the second sine mode") {
  TrigPair zeta;
  zeta.b = TrigPolynomial::sin_mode(2);

  PairedDecomposition dec = decompose_pair(zeta, 0);
  REQUIRE(dec.pairs.size() == 2);

  const double r2 = std::sqrt(2.0);
  CHECK(dec.pairs[0].a.cos_coef(1) == Catch::Approx(r2).margin(1e-13));
  CHECK(dec.pairs[0].b.cos_coef(1) == Catch::Approx(r2 / 2.0).margin(1e-13));
  CHECK(dec.pairs[1].a.sin_coef(1) == Catch::Approx(r2).margin(1e-13));
  CHECK(dec.pairs[1].b.max_abs_coef() == Catch::Approx(0.0).margin(1e-13));
  CHECK(dec.low.a.max_abs_coef() == Catch::Approx(0.0).margin(1e-13));
  CHECK(dec.low.b.max_abs_coef() == Catch::Approx(0.0).margin(1e-13));

  CHECK(pair_identity_residual(zeta, dec) < 1e-12);
}

TEST_CASE("oscillator schedule integral stays one slot large") {
  std::vector<TrigPair> pairs{TrigPair{TrigPolynomial::sin_mode(1, 2.0), {}}};
  OscillatorSchedule s = build_oscillator(pairs, 0.0, 1.0, 4);

  CHECK(s.slot_count() == 8);
  CHECK(s.slot_len() == Catch::Approx(0.125));
  CHECK(s.lambda == Catch::Approx(0.5));

  // prefix peaks at xi itself, so max |K mu| = slot_len * max |xi|.
  CHECK(s.integral_max_linf(256) == Catch::Approx(0.125 * 2.0).epsilon(1e-12));

  // complete periods cancel exactly
  TrigPair kend = s.integral_at(0.25);
  CHECK(kend.max_abs_coef() < 1e-15);
  // mid-slot value: frac * sqrt(1) * xi
  TrigPair kmid = s.integral_at(1.0 / 16.0);
  CHECK(kmid.a.sin_coef(1) == Catch::Approx(2.0 / 16.0).margin(1e-14));
}

TEST_CASE("smoothed oscillator matches slots on plateaus and dies at ends") {
  std::vector<TrigPair> pairs{TrigPair{TrigPolynomial::sin_mode(1), {}}};
  OscillatorSchedule sched = build_oscillator(pairs, 0.0, 1.0, 2);
  SmoothedOscillator sm(sched, 2);

  const double wr = sched.slot_len() / 16.0;
  CHECK(sm.conv_width() == Catch::Approx(sched.slot_len() / 16.0));

  // identically zero inside the end ramps
  CHECK(sm.value(0.5 * wr).max_abs_coef() == 0.0);
  CHECK(sm.deriv(0.5 * wr).max_abs_coef() == 0.0);
  CHECK(sm.value(1.0 - 0.5 * wr).max_abs_coef() == 0.0);

  // mid slot, away from edges: the smoothstep saturates and the slot value
  // comes through exactly (slot 1 holds -xi)
  TrigPair v = sm.value(0.375);
  CHECK(v.a.sin_coef(1) == Catch::Approx(-1.0).margin(1e-14));
  CHECK(sm.deriv(0.375).max_abs_coef() < 1e-12);
}

TEST_CASE("trig pair arithmetic") {
  TrigPair u{TrigPolynomial::sin_mode(1), TrigPolynomial::cos_mode(2)};
  TrigPair w = 2.0 * u + u;
  CHECK(w.a.sin_coef(1) == Catch::Approx(3.0));
  CHECK(w.b.cos_coef(2) == Catch::Approx(3.0));
  CHECK((w - 3.0 * u).max_abs_coef() < 1e-15);
}
