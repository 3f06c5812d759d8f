#pragma once

// Time-dependent input signals for the hyperbolic solver. A signal produces a
// pair of zero-mean fields (leading slot, corrector slot) at any time, and
// advertises enough structure for the integrator to step it correctly:
// breakpoints partition the solver run, piecewise-constant signals are frozen
// per segment, and finest_timescale caps the step for smooth fast features.

#include <algorithm>
#include <limits>
#include <memory>
#include <vector>

#include "scl/field.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

struct FieldPair {
  PeriodicField a, b;
  FieldPair() = default;
  FieldPair(PeriodicField a_, PeriodicField b_) : a(std::move(a_)), b(std::move(b_)) {}
  explicit FieldPair(int n) : a(n), b(n) {}
};

class PairSignal {
 public:
  virtual ~PairSignal() = default;
  virtual FieldPair at(double t) const = 0;
  // Times in (0, T) where the signal jumps or kinks; the solver never steps
  // across one of them.
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual bool piecewise_constant() const { return false; }
  // Smallest temporal feature a stepper must resolve; infinity when the
  // breakpoints already capture all variation.
  virtual double finest_timescale() const { return std::numeric_limits<double>::infinity(); }
  // Refinement of finest_timescale restricted to [a, b]: a signal that is
  // constant between two of its breakpoints may return infinity there even
  // though it has fast ramps elsewhere.
  virtual double local_timescale(double /*a*/, double /*b*/) const { return finest_timescale(); }
  // Exact time integral over [a, b] (a <= b) when a closed form exists, with
  // the same out-of-range extension as at(). Signals with steep ramps must
  // provide this: an additive forcing is applied through its integral, and
  // quadrature alone leaves a ramp-shape residue that no step refinement
  // removes.
  virtual bool integral(double /*a*/, double /*b*/, FieldPair& /*out*/) const { return false; }
};

using SignalPtr = std::shared_ptr<const PairSignal>;

class ZeroSignal final : public PairSignal {
 public:
  explicit ZeroSignal(int n) : n_(n) {}
  FieldPair at(double) const override { return FieldPair(n_); }
  bool piecewise_constant() const override { return true; }
  bool integral(double, double, FieldPair& out) const override {
    out = FieldPair(n_);
    return true;
  }

 private:
  int n_;
};

class ConstantSignal final : public PairSignal {
 public:
  explicit ConstantSignal(FieldPair value) : value_(std::move(value)) {}
  ConstantSignal(int n, const TrigPair& p) : value_(p.a.to_field(n), p.b.to_field(n)) {}
  FieldPair at(double) const override { return value_; }
  bool piecewise_constant() const override { return true; }
  bool integral(double a, double b, FieldPair& out) const override {
    out = value_;
    const double len = b - a;
    for (auto& x : out.a.v) x *= len;
    for (auto& x : out.b.v) x *= len;
    return true;
  }

 private:
  FieldPair value_;
};

// Piecewise-constant in time, coefficient-valued: value i holds on
// [edges[i], edges[i+1]).
class StepSignal final : public PairSignal {
 public:
  StepSignal(int n, std::vector<double> edges, std::vector<TrigPair> values)
      : n_(n), edges_(std::move(edges)), values_(std::move(values)) {
    if (edges_.size() != values_.size() + 1)
      throw std::invalid_argument("StepSignal: need one more edge than values");
  }
  FieldPair at(double t) const override {
    const TrigPair& p = values_[segment_index(t)];
    return FieldPair(p.a.to_field(n_), p.b.to_field(n_));
  }
  std::vector<double> breakpoints() const override {
    return std::vector<double>(edges_.begin() + 1, edges_.end() - 1);
  }
  bool piecewise_constant() const override { return true; }
  bool integral(double a, double b, FieldPair& out) const override {
    TrigPair acc;
    double t = a;
    if (t < edges_.front()) {
      const double to = std::min(b, edges_.front());
      acc = acc + (to - t) * values_.front();
      t = to;
    }
    for (std::size_t i = segment_index(t); t < b && i < values_.size(); ++i) {
      const double hi = (i + 1 == values_.size()) ? b : std::min(b, edges_[i + 1]);
      if (hi > t) acc = acc + (hi - t) * values_[i];
      t = hi;
    }
    out = FieldPair(acc.a.to_field(n_), acc.b.to_field(n_));
    return true;
  }

  std::size_t segment_index(double t) const {
    if (t <= edges_.front()) return 0;
    if (t >= edges_.back()) return values_.size() - 1;
    std::size_t lo = 0, hi = edges_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (edges_[mid] <= t ? lo : hi) = mid;
    }
    return lo;
  }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<TrigPair>& values() const { return values_; }

 private:
  int n_;
  std::vector<double> edges_;
  std::vector<TrigPair> values_;
};

// Coefficient curve with linear interpolation between samples; used for the
// synthesized stage controls, which are smooth in time.
class PolyCurveSignal final : public PairSignal {
 public:
  PolyCurveSignal(int n, std::vector<double> times, std::vector<TrigPair> values, double timescale)
      : n_(n), t_(std::move(times)), v_(std::move(values)), timescale_(timescale) {
    if (t_.size() != v_.size() || t_.size() < 2)
      throw std::invalid_argument("PolyCurveSignal: need matching times/values, at least two");
  }
  FieldPair at(double t) const override {
    const TrigPair p = value_at(t);
    return FieldPair(p.a.to_field(n_), p.b.to_field(n_));
  }
  TrigPair value_at(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    std::size_t lo = 0, hi = t_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (t_[mid] <= t ? lo : hi) = mid;
    }
    const double w = (t - t_[lo]) / (t_[lo + 1] - t_[lo]);
    return (1.0 - w) * v_[lo] + w * v_[lo + 1];
  }
  double finest_timescale() const override { return timescale_; }
  bool integral(double a, double b, FieldPair& out) const override {
    TrigPair acc;
    double t = a;
    if (t < t_.front()) {
      const double to = std::min(b, t_.front());
      acc = acc + (to - t) * v_.front();
      t = to;
    }
    while (t < b) {
      if (t >= t_.back()) {
        acc = acc + (b - t) * v_.back();
        break;
      }
      std::size_t lo = 0, hi = t_.size() - 1;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (t_[mid] <= t ? lo : hi) = mid;
      }
      const double to = std::min(b, t_[lo + 1]);
      acc = acc + (0.5 * (to - t)) * (value_at(t) + value_at(to));
      t = to;
    }
    out = FieldPair(acc.a.to_field(n_), acc.b.to_field(n_));
    return true;
  }
  const std::vector<double>& times() const { return t_; }
  const std::vector<TrigPair>& values() const { return v_; }

 private:
  int n_;
  std::vector<double> t_;
  std::vector<TrigPair> v_;
  double timescale_;
};

// Field-valued sampled curve (linear interpolation). Used for signals that
// are not trigonometric polynomials, e.g. perturbations built from density
// quotients.
class SampledFieldSignal final : public PairSignal {
 public:
  SampledFieldSignal(std::vector<double> times, std::vector<FieldPair> values, double timescale)
      : t_(std::move(times)), v_(std::move(values)), timescale_(timescale) {
    if (t_.size() != v_.size() || t_.size() < 2)
      throw std::invalid_argument("SampledFieldSignal: need matching times/values, at least two");
  }
  FieldPair at(double t) const override {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    std::size_t lo = 0, hi = t_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (t_[mid] <= t ? lo : hi) = mid;
    }
    const double w = (t - t_[lo]) / (t_[lo + 1] - t_[lo]);
    const int n = v_[lo].a.n;
    FieldPair r(n);
    for (int j = 0; j < n; ++j) {
      r.a.v[j] = (1.0 - w) * v_[lo].a.v[j] + w * v_[lo + 1].a.v[j];
      r.b.v[j] = (1.0 - w) * v_[lo].b.v[j] + w * v_[lo + 1].b.v[j];
    }
    return r;
  }
  double finest_timescale() const override { return timescale_; }

 private:
  std::vector<double> t_;
  std::vector<FieldPair> v_;
  double timescale_;
};

class SumSignal final : public PairSignal {
 public:
  explicit SumSignal(std::vector<SignalPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("SumSignal: empty");
  }
  FieldPair at(double t) const override {
    FieldPair r = parts_[0]->at(t);
    for (std::size_t i = 1; i < parts_.size(); ++i) {
      const FieldPair p = parts_[i]->at(t);
      r.a += p.a;
      r.b += p.b;
    }
    return r;
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> b;
    for (const auto& p : parts_) {
      const auto pb = p->breakpoints();
      b.insert(b.end(), pb.begin(), pb.end());
    }
    return b;
  }
  bool piecewise_constant() const override {
    for (const auto& p : parts_)
      if (!p->piecewise_constant()) return false;
    return true;
  }
  double finest_timescale() const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) m = std::min(m, p->finest_timescale());
    return m;
  }
  double local_timescale(double a, double b) const override {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) m = std::min(m, p->local_timescale(a, b));
    return m;
  }
  bool integral(double a, double b, FieldPair& out) const override {
    FieldPair acc;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      FieldPair p;
      if (!parts_[i]->integral(a, b, p)) return false;
      if (i == 0) {
        acc = std::move(p);
      } else {
        acc.a += p.a;
        acc.b += p.b;
      }
    }
    out = std::move(acc);
    return true;
  }

 private:
  std::vector<SignalPtr> parts_;
};

class ScaledSignal final : public PairSignal {
 public:
  ScaledSignal(double scale, SignalPtr base) : scale_(scale), base_(std::move(base)) {}
  FieldPair at(double t) const override {
    FieldPair r = base_->at(t);
    for (auto& x : r.a.v) x *= scale_;
    for (auto& x : r.b.v) x *= scale_;
    return r;
  }
  std::vector<double> breakpoints() const override { return base_->breakpoints(); }
  bool piecewise_constant() const override { return base_->piecewise_constant(); }
  double finest_timescale() const override { return base_->finest_timescale(); }
  double local_timescale(double a, double b) const override {
    return base_->local_timescale(a, b);
  }
  bool integral(double a, double b, FieldPair& out) const override {
    if (!base_->integral(a, b, out)) return false;
    for (auto& x : out.a.v) x *= scale_;
    for (auto& x : out.b.v) x *= scale_;
    return true;
  }

 private:
  double scale_;
  SignalPtr base_;
};

inline SignalPtr zero_signal(int n) { return std::make_shared<ZeroSignal>(n); }

}  // namespace scl
