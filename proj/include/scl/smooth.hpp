#pragma once

// C-infinity smoothstep machinery shared by the mollified oscillator and the
// synthesis cutoff window. Everything is closed form; no numerical
// convolution appears anywhere.

#include <cmath>

namespace scl {

// h(s) = exp(-1/s) for s > 0, extended by 0: the standard flat bump seed.
inline double bump_h(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

inline double bump_h_prime(double s) {
  if (s <= 0.0) return 0.0;
  const double e = std::exp(-1.0 / s);
  return e / (s * s);
}

// Smoothstep: 0 for s <= 0, 1 for s >= 1, strictly monotone in between, all
// derivatives vanish at both ends.
inline double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = bump_h(s);
  const double b = bump_h(1.0 - s);
  return a / (a + b);
}

inline double smoothstep_prime(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double a = bump_h(s), b = bump_h(1.0 - s);
  const double ap = bump_h_prime(s), bp = -bump_h_prime(1.0 - s);
  const double denom = (a + b) * (a + b);
  return (ap * (a + b) - a * (ap + bp)) / denom;
}

// Rising edge of width 2w centred at 0: 0 before -w, 1 after +w.
inline double edge(double t, double w) { return smoothstep((t + w) / (2.0 * w)); }
inline double edge_prime(double t, double w) { return smoothstep_prime((t + w) / (2.0 * w)) / (2.0 * w); }

// Two-sided window on [t0, t1]: W = S(speed*(t-t0)/L) * S(speed*(t1-t)/L)
// with L = t1-t0. Vanishes (with all derivatives) at both ends and saturates
// at 1 once t is more than L/speed inside the interval.
struct RampWindow {
  double t0 = 0.0, t1 = 1.0, speed = 2.0;
  double operator()(double t) const {
    const double len = t1 - t0;
    return smoothstep(speed * (t - t0) / len) * smoothstep(speed * (t1 - t) / len);
  }
  double deriv(double t) const {
    const double len = t1 - t0;
    const double a = speed * (t - t0) / len;
    const double b = speed * (t1 - t) / len;
    return (smoothstep_prime(a) * smoothstep(b) - smoothstep(a) * smoothstep_prime(b)) * speed / len;
  }
};

}  // namespace scl
