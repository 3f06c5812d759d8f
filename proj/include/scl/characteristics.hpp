#pragma once

// Method-of-characteristics solution of the phase-current transport
//
//     d_t A + u d_x A + 2 (d_x u) A = 0,      A(0) = A0,
//
// evaluated independently of the collocation solver: for each grid target x
// the backward flow x(s) with dx/ds = u(s, x) is integrated from s = t to 0
// together with psi(s) = int_s^t u_x(sigma, x(sigma)) dsigma, and then
//
//     A(t, x) = A0(x(0)) exp(-2 psi(0)).
//
// The velocity is sampled in time (value plus optional time derivative for
// cubic Hermite accuracy) and evaluated in space by its trigonometric
// series, so the only discretization error is the RK4 step in s.

#include <complex>
#include <vector>

#include "scl/field.hpp"
#include "scl/time_curve.hpp"

namespace scl {

class VelocityCurve {
 public:
  // rate may be null; Hermite blending then degrades to linear.
  VelocityCurve(std::vector<double> times, const std::vector<PeriodicField>& u,
                const std::vector<PeriodicField>* rate = nullptr, double coef_tol = 1e-14)
      : t_(std::move(times)), n_(u.empty() ? 0 : u.front().n), has_rate_(rate != nullptr) {
    if (t_.size() != u.size() || t_.empty())
      throw std::invalid_argument("VelocityCurve: times/values mismatch");
    if (rate && rate->size() != u.size())
      throw std::invalid_argument("VelocityCurve: rate size mismatch");
    cu_.reserve(u.size());
    double biggest = 0.0;
    for (const auto& f : u) {
      cu_.push_back(spectrum(f));
      for (const auto& z : cu_.back()) biggest = std::max(biggest, std::abs(z));
    }
    if (rate)
      for (const auto& f : *rate) cr_.push_back(spectrum(f));
    kc_ = 1;
    const double floor_ = coef_tol * std::max(1.0, biggest);
    for (int k = 1; k < n_ / 2; ++k) {
      bool active = false;
      for (const auto& c : cu_)
        if (std::abs(c[static_cast<std::size_t>(k)]) > floor_) active = true;
      for (const auto& c : cr_)
        if (std::abs(c[static_cast<std::size_t>(k)]) > floor_) active = true;
      if (active) kc_ = k;
    }
  }

  static VelocityCurve frozen(const PeriodicField& u) {
    return VelocityCurve({0.0}, std::vector<PeriodicField>{u});
  }

  int grid_n() const { return n_; }
  int mode_cut() const { return kc_; }

  // Blended coefficients at time t, modes 0..kc.
  void coeffs_at(double t, std::vector<std::complex<double>>& out) const {
    out.assign(static_cast<std::size_t>(kc_) + 1, {0.0, 0.0});
    if (t_.size() == 1) {
      for (int k = 0; k <= kc_; ++k) out[k] = cu_[0][static_cast<std::size_t>(k)];
      return;
    }
    std::size_t lo = 0, hi = t_.size() - 1;
    if (t <= t_.front()) {
      hi = 1;
    } else if (t >= t_.back()) {
      lo = t_.size() - 2;
      hi = t_.size() - 1;
    } else {
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (t_[mid] <= t ? lo : hi) = mid;
      }
    }
    const double h = t_[hi] - t_[lo];
    const double s = (t - t_[lo]) / h;
    if (has_rate_) {
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
      const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
      for (int k = 0; k <= kc_; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        out[ks] = h00 * cu_[lo][ks] + h01 * cu_[hi][ks] + h * (h10 * cr_[lo][ks] + h11 * cr_[hi][ks]);
      }
    } else {
      for (int k = 0; k <= kc_; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        out[ks] = (1.0 - s) * cu_[lo][ks] + s * cu_[hi][ks];
      }
    }
  }

  // u and u_x at one point from blended coefficients.
  static void eval_point(const std::vector<std::complex<double>>& c, double x, double& u, double& ux) {
    u = c[0].real();
    ux = 0.0;
    const int kc = static_cast<int>(c.size()) - 1;
    for (int k = 1; k <= kc; ++k) {
      const double ck = std::cos(k * x), sk = std::sin(k * x);
      const double re = c[static_cast<std::size_t>(k)].real();
      const double im = c[static_cast<std::size_t>(k)].imag();
      u += 2.0 * (re * ck - im * sk);
      ux += 2.0 * static_cast<double>(k) * (-re * sk - im * ck);
    }
  }

 private:
  std::vector<double> t_;
  int n_;
  bool has_rate_;
  int kc_ = 1;
  std::vector<std::vector<std::complex<double>>> cu_, cr_;
};

// A(t_query, .) on the grid of A0, all grid targets integrated in lockstep so
// each RK4 stage blends the velocity coefficients once.
inline PeriodicField solve_A_characteristics(const VelocityCurve& vel, const PeriodicField& A0,
                                             double t_query, int steps = 2000) {
  const int n = A0.n;
  PeriodicField out(n);
  if (t_query <= 0.0) return A0;
  const auto ca = spectrum(A0);

  std::vector<double> X(static_cast<std::size_t>(n)), Psi(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) X[static_cast<std::size_t>(j)] = kTwoPi * j / n;

  const double h = -t_query / steps;
  std::vector<std::complex<double>> c0, c1, c2;
  std::vector<double> kx1(static_cast<std::size_t>(n)), kp1(static_cast<std::size_t>(n));
  std::vector<double> kx2(static_cast<std::size_t>(n)), kp2(static_cast<std::size_t>(n));
  std::vector<double> kx3(static_cast<std::size_t>(n)), kp3(static_cast<std::size_t>(n));
  std::vector<double> kx4(static_cast<std::size_t>(n)), kp4(static_cast<std::size_t>(n));

  for (int i = 0; i < steps; ++i) {
    const double s = t_query + i * h;
    vel.coeffs_at(s, c0);
    vel.coeffs_at(s + 0.5 * h, c1);
    vel.coeffs_at(s + h, c2);
    for (int j = 0; j < n; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      double u, ux;
      VelocityCurve::eval_point(c0, X[js], u, ux);
      kx1[js] = u;
      kp1[js] = -ux;
      VelocityCurve::eval_point(c1, X[js] + 0.5 * h * kx1[js], u, ux);
      kx2[js] = u;
      kp2[js] = -ux;
      VelocityCurve::eval_point(c1, X[js] + 0.5 * h * kx2[js], u, ux);
      kx3[js] = u;
      kp3[js] = -ux;
      VelocityCurve::eval_point(c2, X[js] + h * kx3[js], u, ux);
      kx4[js] = u;
      kp4[js] = -ux;
      X[js] += h / 6.0 * (kx1[js] + 2 * kx2[js] + 2 * kx3[js] + kx4[js]);
      Psi[js] += h / 6.0 * (kp1[js] + 2 * kp2[js] + 2 * kp3[js] + kp4[js]);
    }
  }

  // A0 series evaluated at the foot of each characteristic.
  int kcA = 1;
  double biggest = 0.0;
  for (const auto& z : ca) biggest = std::max(biggest, std::abs(z));
  for (int k = 1; k < n / 2; ++k)
    if (std::abs(ca[static_cast<std::size_t>(k)]) > 1e-15 * std::max(1.0, biggest)) kcA = k;
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    double a = ca[0].real();
    for (int k = 1; k <= kcA; ++k) {
      const double re = ca[static_cast<std::size_t>(k)].real();
      const double im = ca[static_cast<std::size_t>(k)].imag();
      a += 2.0 * (re * std::cos(k * X[js]) - im * std::sin(k * X[js]));
    }
    out.v[js] = a * std::exp(-2.0 * Psi[js]);
  }
  return out;
}

}  // namespace scl
