#pragma once

// Fast oscillating controls built from bracket factor pairs, and their
// closed-form C-infinity smoothings.
//
// Given unit-weight pairs (xi_1 .. xi_p) on a segment [t0, t1] and an
// oscillation count n, the schedule plays the scaled slots
//
//     sqrt(p) xi_1, ..., sqrt(p) xi_p, -sqrt(p) xi_1, ..., -sqrt(p) xi_p
//
// n times over, each slot lasting (t1-t0)/(2 p n). Quadratic averages of the
// slots then reproduce sums over the pairs with weight lambda = 1/(2p), and
// the sign flip makes every linear average vanish, so the running integral
// K mu stays of size O(slot).

#include <algorithm>
#include <cmath>
#include <vector>

#include "scl/signals.hpp"
#include "scl/smooth.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

struct OscillatorSchedule {
  double t0 = 0.0, t1 = 1.0;
  int periods = 1;
  std::vector<TrigPair> slots;    // 2p entries, sqrt(p)-scaled
  std::vector<TrigPair> prefix;   // prefix[j] = sum of slots[0..j-1], 2p+1 entries
  double lambda = 0.0;            // quadrature weight per slot, 1/(2p)

  bool empty() const { return slots.empty(); }
  int slot_count() const { return empty() ? 0 : periods * static_cast<int>(slots.size()); }
  double slot_len() const { return empty() ? (t1 - t0) : (t1 - t0) / slot_count(); }

  int slot_index(double t) const {
    const double sl = slot_len();
    int idx = static_cast<int>(std::floor((t - t0) / sl));
    if (idx < 0) idx = 0;
    if (idx >= slot_count()) idx = slot_count() - 1;
    return idx;
  }

  TrigPair value_at(double t) const {
    if (empty()) return {};
    return slots[static_cast<std::size_t>(slot_index(t)) % slots.size()];
  }

  // Exact running integral int_{t0}^{t} mu(s) ds. Complete oscillation
  // periods cancel, so only the position inside the current period matters.
  TrigPair integral_at(double t) const {
    if (empty()) return {};
    if (t <= t0) return {};
    if (t > t1) t = t1;
    const double sl = slot_len();
    const int idx = slot_index(t);
    const int in_period = idx % static_cast<int>(slots.size());
    const double frac = t - (t0 + idx * sl);
    return sl * prefix[static_cast<std::size_t>(in_period)] +
           frac * slots[static_cast<std::size_t>(in_period)];
  }

  // max over the segment of the max-norm of K mu (the maximum is attained at
  // a slot boundary because K is piecewise linear).
  double integral_max_linf(int grid_n) const {
    if (empty()) return 0.0;
    const double sl = slot_len();
    double m = 0.0;
    for (const auto& p : prefix) {
      m = std::max(m, linf_norm((sl * p).a.to_field(grid_n)));
      m = std::max(m, linf_norm((sl * p).b.to_field(grid_n)));
    }
    return m;
  }
};

inline OscillatorSchedule build_oscillator(const std::vector<TrigPair>& pairs, double t0, double t1,
                                           int periods) {
  OscillatorSchedule s;
  s.t0 = t0;
  s.t1 = t1;
  s.periods = periods;
  if (pairs.empty()) {
    s.prefix.assign(1, TrigPair{});
    return s;
  }
  const int p = static_cast<int>(pairs.size());
  const double amp = std::sqrt(static_cast<double>(p));
  s.lambda = 1.0 / (2.0 * p);
  s.slots.reserve(static_cast<std::size_t>(2 * p));
  for (const auto& pr : pairs) s.slots.push_back(amp * pr);
  for (const auto& pr : pairs) s.slots.push_back(-amp * pr);
  s.prefix.assign(1, TrigPair{});
  for (const auto& v : s.slots) s.prefix.push_back(s.prefix.back() + v);
  return s;
}

// Closed-form mollification of a schedule: each slot indicator becomes a
// difference of smoothstep edges of half-width w = slot/(8 m_tilde), and a
// ramp window W zeroes the result near the segment ends (identically on
// [t0, t0+wr] and [t1-wr, t1], wr = slot/16) so segments concatenate to a
// globally smooth signal. Both the value and the exact time derivative are
// available.
class SmoothedOscillator {
 public:
  SmoothedOscillator(OscillatorSchedule sched, int m_tilde)
      : s_(std::move(sched)),
        w_(s_.slot_len() / (8.0 * std::max(1, m_tilde))),
        wr_(s_.slot_len() / 16.0) {}

  bool empty() const { return s_.empty(); }
  double t0() const { return s_.t0; }
  double t1() const { return s_.t1; }
  double conv_width() const { return w_; }
  double ramp_width() const { return wr_; }
  double finest_scale() const { return std::min(2.0 * w_, wr_); }
  const OscillatorSchedule& schedule() const { return s_; }

  // Away from the slot-boundary ramps (width 2w each) and the two window
  // ramps (width wr each) the signal is exactly constant, so a stepper only
  // needs a fine step when [a, b] intersects one of those zones.
  double local_scale(double a, double b) const {
    if (s_.empty()) return std::numeric_limits<double>::infinity();
    double fine = std::numeric_limits<double>::infinity();
    const double eps = 1e-9 * s_.slot_len();
    if (b > s_.t0 + wr_ + eps && a < s_.t0 + 2.0 * wr_ - eps) fine = std::min(fine, wr_);
    if (b > s_.t1 - 2.0 * wr_ + eps && a < s_.t1 - wr_ - eps) fine = std::min(fine, wr_);
    const double sl = s_.slot_len();
    // Interior slot boundaries t0 + i*sl whose ramp [b_i - w, b_i + w]
    // overlaps (a, b).
    const int i_lo = std::max(1, static_cast<int>(std::floor((a - s_.t0 - w_ + eps) / sl)) + 1);
    const int i_hi =
        std::min(s_.slot_count() - 1, static_cast<int>(std::ceil((b - s_.t0 + w_ - eps) / sl)) - 1);
    if (i_lo <= i_hi) fine = std::min(fine, w_);
    return fine;
  }

  // Zone edges, for use as stepper breakpoints: solver segments then never
  // straddle a ramp/plateau transition.
  void append_zone_edges(std::vector<double>& out) const {
    if (s_.empty()) return;
    out.push_back(s_.t0 + wr_);
    out.push_back(s_.t0 + 2.0 * wr_);
    out.push_back(s_.t1 - 2.0 * wr_);
    out.push_back(s_.t1 - wr_);
    const double sl = s_.slot_len();
    for (int i = 1; i < s_.slot_count(); ++i) {
      const double bi = s_.t0 + i * sl;
      out.push_back(bi - w_);
      out.push_back(bi + w_);
    }
  }

  TrigPair value(double t) const {
    if (s_.empty()) return {};
    TrigPair m = mollified(t, false);
    return window(t) * m;
  }

  TrigPair deriv(double t) const {
    if (s_.empty()) return {};
    const TrigPair m = mollified(t, false);
    const TrigPair md = mollified(t, true);
    return window_prime(t) * m + window(t) * md;
  }

 private:
  double window(double t) const {
    return smoothstep((t - (s_.t0 + wr_)) / wr_) * smoothstep(((s_.t1 - wr_) - t) / wr_);
  }
  double window_prime(double t) const {
    const double a = (t - (s_.t0 + wr_)) / wr_;
    const double b = ((s_.t1 - wr_) - t) / wr_;
    return (smoothstep_prime(a) * smoothstep(b) - smoothstep(a) * smoothstep_prime(b)) / wr_;
  }

  TrigPair mollified(double t, bool derivative) const {
    const double sl = s_.slot_len();
    const int count = s_.slot_count();
    const int centre = static_cast<int>(std::floor((t - s_.t0) / sl));
    TrigPair acc;
    for (int k = centre - 1; k <= centre + 1; ++k) {
      if (k < 0 || k >= count) continue;
      const double a = s_.t0 + k * sl;
      const double b = a + sl;
      const TrigPair& v = s_.slots[static_cast<std::size_t>(k) % s_.slots.size()];
      const double g = derivative ? edge_prime(t - a, w_) - edge_prime(t - b, w_)
                                  : edge(t - a, w_) - edge(t - b, w_);
      if (g != 0.0) acc = acc + g * v;
    }
    return acc;
  }

  OscillatorSchedule s_;
  double w_;
  double wr_;
};

// ------------------------------------------------------------------- signals

// Raw piecewise-constant oscillator over a partition of [0, T]; segments with
// empty schedules contribute zero.
class OscillatorStepSignal final : public PairSignal {
 public:
  OscillatorStepSignal(int n, std::vector<OscillatorSchedule> segs) : n_(n), segs_(std::move(segs)) {}

  FieldPair at(double t) const override {
    const TrigPair v = segs_[find(t)].value_at(t);
    return FieldPair(v.a.to_field(n_), v.b.to_field(n_));
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> b;
    for (std::size_t si = 0; si < segs_.size(); ++si) {
      const auto& s = segs_[si];
      if (si > 0) b.push_back(s.t0);
      if (!s.empty()) {
        const double sl = s.slot_len();
        for (int i = 1; i < s.slot_count(); ++i) b.push_back(s.t0 + i * sl);
      }
    }
    return b;
  }
  bool piecewise_constant() const override { return true; }
  bool integral(double a, double b, FieldPair& out) const override {
    TrigPair acc;
    auto it = std::partition_point(segs_.begin(), segs_.end(),
                                   [a](const OscillatorSchedule& s) { return s.t1 <= a; });
    for (; it != segs_.end() && it->t0 < b; ++it)
      acc = acc + (it->integral_at(b) - it->integral_at(a));
    out = FieldPair(acc.a.to_field(n_), acc.b.to_field(n_));
    return true;
  }
  const std::vector<OscillatorSchedule>& segments() const { return segs_; }

 private:
  std::size_t find(double t) const {
    for (std::size_t i = 0; i + 1 < segs_.size(); ++i)
      if (t < segs_[i].t1) return i;
    return segs_.empty() ? 0 : segs_.size() - 1;
  }
  int n_;
  std::vector<OscillatorSchedule> segs_;
};

// Smoothed oscillator signal; mode selects the value or its exact time
// derivative (the latter is what an extension adds to the control).
class SmoothedOscSignal final : public PairSignal {
 public:
  enum class Mode { value, derivative };
  SmoothedOscSignal(int n, std::vector<SmoothedOscillator> segs, Mode mode)
      : n_(n), segs_(std::move(segs)), mode_(mode) {}

  FieldPair at(double t) const override {
    const auto& s = segs_[find(t)];
    const TrigPair v = mode_ == Mode::value ? s.value(t) : s.deriv(t);
    return FieldPair(v.a.to_field(n_), v.b.to_field(n_));
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> b;
    for (std::size_t i = 1; i < segs_.size(); ++i) b.push_back(segs_[i].t0());
    for (const auto& s : segs_) s.append_zone_edges(b);
    return b;
  }
  double finest_timescale() const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : segs_)
      if (!s.empty()) m = std::min(m, s.finest_scale());
    return m;
  }
  double local_timescale(double a, double b) const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : segs_) {
      if (s.empty() || b <= s.t0() || a >= s.t1()) continue;
      m = std::min(m, s.local_scale(std::max(a, s.t0()), std::min(b, s.t1())));
    }
    return m;
  }
  // In derivative mode the signal has its own antiderivative in closed form:
  // the smoothed profile itself, which vanishes identically at its segment
  // ends, so crossing segments contributes nothing.
  bool integral(double a, double b, FieldPair& out) const override {
    if (mode_ != Mode::derivative) return false;
    TrigPair acc;
    auto it = std::partition_point(segs_.begin(), segs_.end(),
                                   [a](const SmoothedOscillator& s) { return s.t1() <= a; });
    for (; it != segs_.end() && it->t0() < b; ++it) {
      const auto& s = *it;
      if (s.empty()) continue;
      const double lo = std::clamp(a, s.t0(), s.t1());
      const double hi = std::clamp(b, s.t0(), s.t1());
      if (hi > lo) acc = acc + (s.value(hi) - s.value(lo));
    }
    out = FieldPair(acc.a.to_field(n_), acc.b.to_field(n_));
    return true;
  }
  const std::vector<SmoothedOscillator>& segments() const { return segs_; }

 private:
  std::size_t find(double t) const {
    for (std::size_t i = 0; i + 1 < segs_.size(); ++i)
      if (t < segs_[i].t1()) return i;
    return segs_.empty() ? 0 : segs_.size() - 1;
  }
  int n_;
  std::vector<SmoothedOscillator> segs_;
  Mode mode_;
};

}  // namespace scl
