#pragma once

// Zero-mean trigonometric polynomials in explicit sin/cos coordinates. The
// control algebra works on these exactly (no grid round trips): the bracket
// decomposition, the oscillator slots and the smoothed extensions all carry
// coefficients, and only turn into grid fields at solver boundaries.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "scl/field.hpp"

namespace scl {

struct TrigPolynomial {
  // s[j] multiplies sin((j+1)x), c[j] multiplies cos((j+1)x).
  std::vector<double> s, c;

  TrigPolynomial() = default;
  explicit TrigPolynomial(int max_mode)
      : s(static_cast<std::size_t>(max_mode), 0.0), c(static_cast<std::size_t>(max_mode), 0.0) {}

  static TrigPolynomial sin_mode(int k, double amp = 1.0) {
    TrigPolynomial p(k);
    p.s[static_cast<std::size_t>(k - 1)] = amp;
    return p;
  }
  static TrigPolynomial cos_mode(int k, double amp = 1.0) {
    TrigPolynomial p(k);
    p.c[static_cast<std::size_t>(k - 1)] = amp;
    return p;
  }

  int max_mode() const { return static_cast<int>(s.size()); }

  // Highest mode with a coefficient above tol; 0 for the zero polynomial.
  int degree(double tol = 0.0) const {
    for (int k = max_mode(); k >= 1; --k) {
      if (std::abs(s[static_cast<std::size_t>(k - 1)]) > tol ||
          std::abs(c[static_cast<std::size_t>(k - 1)]) > tol)
        return k;
    }
    return 0;
  }

  bool in_level(int level, double tol = 1e-13) const { return degree(tol) <= level + 1; }

  void ensure_mode(int k) {
    if (k > max_mode()) {
      s.resize(static_cast<std::size_t>(k), 0.0);
      c.resize(static_cast<std::size_t>(k), 0.0);
    }
  }

  void add_sin(int k, double amp) {
    ensure_mode(k);
    s[static_cast<std::size_t>(k - 1)] += amp;
  }
  void add_cos(int k, double amp) {
    ensure_mode(k);
    c[static_cast<std::size_t>(k - 1)] += amp;
  }
  double sin_coef(int k) const { return k <= max_mode() ? s[static_cast<std::size_t>(k - 1)] : 0.0; }
  double cos_coef(int k) const { return k <= max_mode() ? c[static_cast<std::size_t>(k - 1)] : 0.0; }

  double eval(double x) const {
    double r = 0.0;
    for (int k = 1; k <= max_mode(); ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      if (s[i] != 0.0) r += s[i] * std::sin(k * x);
      if (c[i] != 0.0) r += c[i] * std::cos(k * x);
    }
    return r;
  }

  TrigPolynomial derivative() const {
    TrigPolynomial d(max_mode());
    for (int k = 1; k <= max_mode(); ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      d.s[i] = -k * c[i];
      d.c[i] = k * s[i];
    }
    return d;
  }

  // Zero-mean primitive: the mean-free antiderivative always exists here
  // because the polynomial has no constant term.
  TrigPolynomial antiderivative() const {
    TrigPolynomial a(max_mode());
    for (int k = 1; k <= max_mode(); ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      a.s[i] = c[i] / k;
      a.c[i] = -s[i] / k;
    }
    return a;
  }

  void add_to(std::vector<double>& grid_values) const {
    const int n = static_cast<int>(grid_values.size());
    for (int k = 1; k <= max_mode(); ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      if (s[i] == 0.0 && c[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double x = kTwoPi * j / n;
        grid_values[static_cast<std::size_t>(j)] += s[i] * std::sin(k * x) + c[i] * std::cos(k * x);
      }
    }
  }

  PeriodicField to_field(int grid_n) const {
    PeriodicField f(grid_n);
    add_to(f.v);
    return f;
  }

  double l2_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * s[i] + c[i] * c[i];
    return std::sqrt(kPi * acc);  // ||sin kx||^2 = ||cos kx||^2 = pi
  }

  // Discrete H^k norm with the same weights as the field version: mode m
  // carries 1 + m^2 + ... + m^{2k}.
  double sobolev_norm(int k) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double m2 = static_cast<double>((i + 1) * (i + 1));
      double w = 1.0, p = 1.0;
      for (int j = 1; j <= k; ++j) {
        p *= m2;
        w += p;
      }
      acc += w * (s[i] * s[i] + c[i] * c[i]);
    }
    return std::sqrt(kPi * acc);
  }

  double max_abs_coef() const {
    double m = 0.0;
    for (double x : s) m = std::max(m, std::abs(x));
    for (double x : c) m = std::max(m, std::abs(x));
    return m;
  }
};

inline TrigPolynomial operator+(const TrigPolynomial& a, const TrigPolynomial& b) {
  TrigPolynomial r(std::max(a.max_mode(), b.max_mode()));
  for (int k = 1; k <= r.max_mode(); ++k) {
    r.s[static_cast<std::size_t>(k - 1)] = a.sin_coef(k) + b.sin_coef(k);
    r.c[static_cast<std::size_t>(k - 1)] = a.cos_coef(k) + b.cos_coef(k);
  }
  return r;
}

inline TrigPolynomial operator-(const TrigPolynomial& a, const TrigPolynomial& b) {
  TrigPolynomial r(std::max(a.max_mode(), b.max_mode()));
  for (int k = 1; k <= r.max_mode(); ++k) {
    r.s[static_cast<std::size_t>(k - 1)] = a.sin_coef(k) - b.sin_coef(k);
    r.c[static_cast<std::size_t>(k - 1)] = a.cos_coef(k) - b.cos_coef(k);
  }
  return r;
}

inline TrigPolynomial operator*(double t, const TrigPolynomial& a) {
  TrigPolynomial r = a;
  for (auto& x : r.s) x *= t;
  for (auto& x : r.c) x *= t;
  return r;
}

// Least-squares (= exact spectral) projection of a grid field onto modes
// 1..max_mode. drop_report, when given, receives the L2 norm of what the
// projection discarded (mean included).
inline TrigPolynomial poly_from_field(const PeriodicField& f, int max_mode, double* drop_report = nullptr) {
  const auto c = spectrum(f);
  TrigPolynomial p(max_mode);
  for (int k = 1; k <= max_mode && k < f.n / 2; ++k) {
    // c_k = (a_cos - i a_sin)/2 for f = a_cos cos(kx) + a_sin sin(kx).
    p.c[static_cast<std::size_t>(k - 1)] = 2.0 * c[static_cast<std::size_t>(k)].real();
    p.s[static_cast<std::size_t>(k - 1)] = -2.0 * c[static_cast<std::size_t>(k)].imag();
  }
  if (drop_report) {
    double acc = std::norm(c[0]);
    for (int j = 1; j < f.n; ++j) {
      const int k = j < f.n / 2 ? j : j - f.n;
      if (std::abs(k) > max_mode) acc += std::norm(c[static_cast<std::size_t>(j)]);
    }
    *drop_report = std::sqrt(kTwoPi * acc);
  }
  return p;
}

// Value pair for the two control slots (leading component, corrector
// component). Used for controls, transport perturbations and momentum
// perturbations alike.
struct TrigPair {
  TrigPolynomial a, b;
  TrigPair() = default;
  TrigPair(TrigPolynomial a_, TrigPolynomial b_) : a(std::move(a_)), b(std::move(b_)) {}
  double max_abs_coef() const { return std::max(a.max_abs_coef(), b.max_abs_coef()); }
};

inline TrigPair operator+(const TrigPair& x, const TrigPair& y) { return {x.a + y.a, x.b + y.b}; }
inline TrigPair operator-(const TrigPair& x, const TrigPair& y) { return {x.a - y.a, x.b - y.b}; }
inline TrigPair operator*(double t, const TrigPair& x) { return {t * x.a, t * x.b}; }

}  // namespace scl
