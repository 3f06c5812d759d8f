#pragma once

// Time-sampled curves of grid fields plus the running time integral
// K f (t) = int_0^t f(s) ds used by the averaging estimates.

#include <vector>

#include "scl/field.hpp"

namespace scl {

struct TimeCurve {
  std::vector<double> t;
  std::vector<PeriodicField> f;

  std::size_t size() const { return t.size(); }
  void push(double time, PeriodicField value) {
    t.push_back(time);
    f.push_back(std::move(value));
  }

  // Linear interpolation; clamps outside the sampled range.
  PeriodicField at(double time) const {
    if (t.empty()) throw std::invalid_argument("TimeCurve::at on empty curve");
    if (time <= t.front()) return f.front();
    if (time >= t.back()) return f.back();
    std::size_t hi = 1;
    while (t[hi] < time) ++hi;
    const double w = (time - t[hi - 1]) / (t[hi] - t[hi - 1]);
    PeriodicField r(f[hi].n);
    for (int j = 0; j < r.n; ++j) r.v[j] = (1.0 - w) * f[hi - 1].v[j] + w * f[hi].v[j];
    return r;
  }
};

// Trapezoid running integral sampled at the curve's own nodes. Exact for
// curves that are piecewise linear in time between nodes.
inline TimeCurve time_integral_K(const TimeCurve& c) {
  TimeCurve K;
  if (c.t.empty()) return K;
  PeriodicField acc(c.f.front().n);
  K.push(c.t.front(), acc);
  for (std::size_t i = 1; i < c.t.size(); ++i) {
    const double h = c.t[i] - c.t[i - 1];
    for (int j = 0; j < acc.n; ++j) acc.v[j] += 0.5 * h * (c.f[i - 1].v[j] + c.f[i].v[j]);
    K.push(c.t[i], acc);
  }
  return K;
}

inline double curve_max_linf(const TimeCurve& c) {
  double m = 0.0;
  for (const auto& g : c.f) m = std::max(m, linf_norm(g));
  return m;
}

inline double curve_max_sobolev(const TimeCurve& c, int k) {
  double m = 0.0;
  for (const auto& g : c.f) m = std::max(m, sobolev_norm(g, k));
  return m;
}

// L2-in-time norm of a sampled curve of H^k norms (trapezoid in time).
inline double curve_l2t_sobolev(const TimeCurve& c, int k) {
  if (c.size() < 2) return 0.0;
  double acc = 0.0;
  double prev = sobolev_norm(c.f[0], k);
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double cur = sobolev_norm(c.f[i], k);
    acc += 0.5 * (c.t[i] - c.t[i - 1]) * (prev * prev + cur * cur);
    prev = cur;
  }
  return std::sqrt(acc);
}

}  // namespace scl
