#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "scl/field.hpp"

using namespace scl;

namespace {

PeriodicField sample(int n, double (*f)(double)) {
  PeriodicGrid g(n);
  PeriodicField out(n);
  for (int j = 0; j < n; ++j) out[j] = f(g.x(j));
  return out;
}

}  // namespace

TEST_CASE("fft roundtrip recovers the input") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::complex<double>> a(128);
  for (auto& z : a) z = {dist(rng), dist(rng)};

  auto b = a;
  fft_inplace(b, false);
  fft_inplace(b, true);
  double err = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) err = std::max(err, std::abs(a[j] - b[j]));
  CHECK(err < 1e-13);
}

TEST_CASE("fft of a delta is flat") {
  std::vector<std::complex<double>> a(16, 0.0);
  a[0] = 1.0;
  fft_inplace(a, false);
  for (const auto& z : a) {
    CHECK(std::abs(z - std::complex<double>(1.0, 0.0)) < 1e-14);
  }
}

TEST_CASE("spectral derivative of low modes is exact") {
  const int n = 64;
  PeriodicGrid g(n);
  PeriodicField f(n), expect(n);
  for (int j = 0; j < n; ++j) {
    f[j] = std::sin(3.0 * g.x(j)) + 0.5 * std::cos(5.0 * g.x(j));
    expect[j] = 3.0 * std::cos(3.0 * g.x(j)) - 2.5 * std::sin(5.0 * g.x(j));
  }
  CHECK(linf_norm(derivative(f) - expect) < 1e-12);
}

TEST_CASE("zero mean antiderivative inverts the derivative") {
  const int n = 64;
  PeriodicGrid g(n);
  for (int k : {1, 4}) {
    PeriodicField f(n), expect(n);
    for (int j = 0; j < n; ++j) {
      f[j] = std::cos(k * g.x(j));
      expect[j] = std::sin(k * g.x(j)) / k;
    }
    CHECK(linf_norm(zero_mean_antiderivative(f) - expect) < 1e-13);
  }
}

TEST_CASE("antiderivative rejects inputs with mean") {
  PeriodicField f(32, 0.3);
  CHECK_THROWS_AS(zero_mean_antiderivative(f), std::invalid_argument);
}

TEST_CASE("norms match closed forms") {
  const int n = 128;
  PeriodicField s1 = sample(n, [](double x) { return std::sin(x); });
  CHECK(l2_norm(s1) == Catch::Approx(std::sqrt(kPi)).epsilon(1e-12));

  PeriodicField c3 = sample(n, [](double x) { return std::cos(3.0 * x); });
  // |c_{+3}|^2 + |c_{-3}|^2 = 1/2, weight 1 + 9 + 81 at second order.
  CHECK(sobolev_norm(c3, 2) == Catch::Approx(std::sqrt(91.0 * kPi)).epsilon(1e-12));
  CHECK(sobolev_norm(c3, 0) == Catch::Approx(l2_norm(c3)).epsilon(1e-12));
}

TEST_CASE("two thirds filter removes only the high band") {
  const int m = 64;  // cut at 21
  PeriodicGrid g(m);
  PeriodicField f(m);
  for (int j = 0; j < m; ++j) f[j] = std::cos(21.0 * g.x(j)) + std::sin(22.0 * g.x(j));

  PeriodicField kept = dealias23(f);
  PeriodicField expect(m);
  for (int j = 0; j < m; ++j) expect[j] = std::cos(21.0 * g.x(j));
  CHECK(linf_norm(kept - expect) < 1e-12);

  FieldOps ops(m);
  CHECK(ops.dealias_cut() == 21);
}

TEST_CASE("level projection keeps modes up to level plus one") {
  const int n = 64;
  PeriodicGrid g(n);
  PeriodicField f(n);
  for (int j = 0; j < n; ++j) {
    f[j] = 1.5 + std::sin(g.x(j)) + std::cos(2.0 * g.x(j)) + std::sin(3.0 * g.x(j));
  }
  PeriodicField p = project_levels(f, 1);  // keeps modes 1, 2; drops mean and 3
  PeriodicField expect(n);
  for (int j = 0; j < n; ++j) expect[j] = std::sin(g.x(j)) + std::cos(2.0 * g.x(j));
  CHECK(linf_norm(p - expect) < 1e-12);
  CHECK(std::abs(mean(p)) < 1e-14);
}

TEST_CASE("trigonometric interpolation hits off grid points") {
  const int n = 64;
  PeriodicField f = sample(n, [](double x) { return std::sin(2.0 * x) + 0.3 * std::cos(x); });
  for (double x : {0.17, 1.9, 4.4}) {
    CHECK(eval_at(f, x) ==
          Catch::Approx(std::sin(2.0 * x) + 0.3 * std::cos(x)).margin(1e-12));
  }
}

TEST_CASE("spectrum roundtrip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  PeriodicField f(64);
  for (auto& x : f.v) x = dist(rng);
  PeriodicField back = field_from_spectrum(spectrum(f));
  CHECK(linf_norm(back - f) < 1e-13);
}

TEST_CASE("complex field norm and abs2") {
  const int n = 32;
  PeriodicGrid g(n);
  ComplexField psi(n);
  for (int j = 0; j < n; ++j) {
    psi.v[j] = std::polar(2.0, 0.3 * std::sin(g.x(j)));
  }
  PeriodicField rho = abs2(psi);
  CHECK(linf_norm(rho - PeriodicField(n, 4.0)) < 1e-13);
  CHECK(l2_norm(psi) == Catch::Approx(2.0 * std::sqrt(kTwoPi)).epsilon(1e-12));
}
