#pragma once

// Real and complex fields on the 2*pi-periodic grid, with the spectral
// primitives the solvers are built from.
//
// Conventions used throughout the library:
//   grid points     x_j = 2*pi*j/n, j = 0..n-1, n a power of two
//   coefficients    f(x) = sum_k c_k exp(i k x), c = fft(values)/n,
//                   bin j holds wavenumber k = j for j < n/2, k = j-n otherwise
//   L2 inner product over the full period (0, 2*pi); norms carry the 2*pi.
//   Sobolev norm    ||f||_{H^k}^2 = 2*pi * sum_m (sum_{j<=k} m^{2j}) |c_m|^2
//   antiderivative  zero_mean_antiderivative(f) is the primitive of f with
//                   zero mean; it requires (and enforces) mean(f) ~ 0.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <vector>

#include "scl/errors.hpp"
#include "scl/fft.hpp"

namespace scl {

inline constexpr double kTwoPi = 6.283185307179586476925286766559005768;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct PeriodicGrid {
  int n = 0;
  explicit PeriodicGrid(int n_) : n(n_) {
    if (n <= 0 || !is_pow2(static_cast<std::size_t>(n)))
      throw ConfigError("grid.n must be a positive power of two, got " + std::to_string(n_));
  }
  double dx() const { return kTwoPi / n; }
  double x(int j) const { return kTwoPi * j / n; }
  std::vector<double> points() const {
    std::vector<double> xs(n);
    for (int j = 0; j < n; ++j) xs[j] = x(j);
    return xs;
  }
  // Signed wavenumber held by fft bin j.
  int wavenumber(int j) const { return j < n / 2 ? j : j - n; }
};

struct PeriodicField {
  int n = 0;
  std::vector<double> v;
  PeriodicField() = default;
  explicit PeriodicField(int n_, double fill = 0.0) : n(n_), v(static_cast<std::size_t>(n_), fill) {}
  PeriodicField(const PeriodicGrid& g, double fill = 0.0) : PeriodicField(g.n, fill) {}
  double& operator[](int j) { return v[static_cast<std::size_t>(j)]; }
  double operator[](int j) const { return v[static_cast<std::size_t>(j)]; }
};

struct ComplexField {
  int n = 0;
  std::vector<std::complex<double>> v;
  ComplexField() = default;
  explicit ComplexField(int n_, std::complex<double> fill = {0.0, 0.0})
      : n(n_), v(static_cast<std::size_t>(n_), fill) {}
};

namespace detail {
inline void check_same(int a, int b) {
  if (a != b) throw std::invalid_argument("field size mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}
}  // namespace detail

// ---------------------------------------------------------------- arithmetic

inline PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
  detail::check_same(a.n, b.n);
  PeriodicField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = a.v[j] + b.v[j];
  return r;
}

inline PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
  detail::check_same(a.n, b.n);
  PeriodicField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = a.v[j] - b.v[j];
  return r;
}

inline PeriodicField operator*(double s, const PeriodicField& a) {
  PeriodicField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = s * a.v[j];
  return r;
}

inline PeriodicField& operator+=(PeriodicField& a, const PeriodicField& b) {
  detail::check_same(a.n, b.n);
  for (int j = 0; j < a.n; ++j) a.v[j] += b.v[j];
  return a;
}

inline PeriodicField& operator-=(PeriodicField& a, const PeriodicField& b) {
  detail::check_same(a.n, b.n);
  for (int j = 0; j < a.n; ++j) a.v[j] -= b.v[j];
  return a;
}

// Pointwise product without any dealiasing; use FieldOps::deriv23 or
// filter23 downstream when the factors carry active high modes.
inline PeriodicField hadamard(const PeriodicField& a, const PeriodicField& b) {
  detail::check_same(a.n, b.n);
  PeriodicField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = a.v[j] * b.v[j];
  return r;
}

// ------------------------------------------------------------------- scalars

inline double mean(const PeriodicField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s / f.n;
}

inline double l2_norm(const PeriodicField& f) {
  double s = 0.0;
  for (double x : f.v) s += x * x;
  return std::sqrt(s * kTwoPi / f.n);
}

inline double linf_norm(const PeriodicField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

inline double min_value(const PeriodicField& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

// ------------------------------------------------------------------ spectrum

inline std::vector<std::complex<double>> spectrum(const PeriodicField& f) {
  std::vector<std::complex<double>> c(f.v.begin(), f.v.end());
  fft_inplace(c, false);
  const double s = 1.0 / f.n;
  for (auto& z : c) z *= s;
  return c;
}

inline PeriodicField field_from_spectrum(std::vector<std::complex<double>> c) {
  const int n = static_cast<int>(c.size());
  for (auto& z : c) z *= static_cast<double>(n);
  fft_inplace(c, true);
  PeriodicField f(n);
  for (int j = 0; j < n; ++j) f.v[j] = c[j].real();
  return f;
}

// Trigonometric interpolation of f at an arbitrary point.
inline double eval_at(const PeriodicField& f, double x) {
  const auto c = spectrum(f);
  const int n = f.n;
  double r = c[0].real();
  for (int k = 1; k < n / 2; ++k) {
    r += 2.0 * (c[k].real() * std::cos(k * x) - c[k].imag() * std::sin(k * x));
  }
  r += c[n / 2].real() * std::cos((n / 2) * x);
  return r;
}

// -------------------------------------------------------------- spectral ops

// Reusable spectral transform helper; owns scratch so the solver hot loops do
// not allocate. Not safe to share one instance across threads.
class FieldOps {
 public:
  explicit FieldOps(int n) : n_(n), cut_(n / 3), buf_(static_cast<std::size_t>(n)) {}

  int n() const { return n_; }
  int dealias_cut() const { return cut_; }

  // out = d in / dx, exact for resolved modes, Nyquist dropped.
  void deriv(const std::vector<double>& in, std::vector<double>& out) { deriv_impl(in, out, n_ / 2); }

  // Derivative combined with the 2/3-rule truncation: modes above n/3 are
  // zeroed in the same spectral pass. Every quadratic flux term goes through
  // this, which keeps aliased images of products out of the retained band.
  void deriv23(const std::vector<double>& in, std::vector<double>& out) { deriv_impl(in, out, cut_); }

  // Truncate to the 2/3 band in place.
  void filter23(std::vector<double>& x) {
    load(x);
    fft_inplace(buf_, false);
    zero_above(cut_);
    fft_inplace(buf_, true);
    store(x);
  }

 private:
  void load(const std::vector<double>& x) {
    for (int j = 0; j < n_; ++j) buf_[j] = x[static_cast<std::size_t>(j)];
  }
  void store(std::vector<double>& x) {
    for (int j = 0; j < n_; ++j) x[static_cast<std::size_t>(j)] = buf_[j].real();
  }
  void zero_above(int kmax) {
    for (int j = 0; j < n_; ++j) {
      const int k = j < n_ / 2 ? j : j - n_;
      if (std::abs(k) > kmax) buf_[j] = 0.0;
    }
  }
  void deriv_impl(const std::vector<double>& in, std::vector<double>& out, int kmax) {
    load(in);
    fft_inplace(buf_, false);
    for (int j = 0; j < n_; ++j) {
      const int k = j < n_ / 2 ? j : j - n_;
      if (std::abs(k) > kmax || j == n_ / 2) {
        buf_[j] = 0.0;
      } else {
        buf_[j] *= std::complex<double>(0.0, static_cast<double>(k));
      }
    }
    fft_inplace(buf_, true);
    out.resize(static_cast<std::size_t>(n_));
    store(out);
  }

  int n_;
  int cut_;
  std::vector<std::complex<double>> buf_;
};

inline PeriodicField derivative(const PeriodicField& f) {
  FieldOps ops(f.n);
  PeriodicField r(f.n);
  ops.deriv(f.v, r.v);
  return r;
}

inline PeriodicField dealias23(const PeriodicField& f) {
  FieldOps ops(f.n);
  PeriodicField r = f;
  ops.filter23(r.v);
  return r;
}

// Primitive with zero mean. The input must itself have (numerically) zero
// mean for a periodic primitive to exist; the check tolerance scales with the
// input size so near-zero noise does not trip it.
inline PeriodicField zero_mean_antiderivative(const PeriodicField& f) {
  auto c = spectrum(f);
  const int n = f.n;
  const double scale = std::max(1e-14, 1e-10 * l2_norm(f));
  if (std::abs(c[0].real()) * std::sqrt(kTwoPi) > scale)
    throw std::invalid_argument("zero_mean_antiderivative: input has nonzero mean " +
                                std::to_string(c[0].real()));
  c[0] = 0.0;
  for (int j = 1; j < n; ++j) {
    const int k = j < n / 2 ? j : j - n;
    if (j == n / 2) {
      c[j] = 0.0;
    } else {
      c[j] /= std::complex<double>(0.0, static_cast<double>(k));
    }
  }
  return field_from_spectrum(std::move(c));
}

// Projection onto span{sin(jx), cos(jx) : 1 <= j <= level+1} (zero mean, all
// modes above level+1 removed).
inline PeriodicField project_levels(const PeriodicField& f, int level) {
  auto c = spectrum(f);
  const int n = f.n;
  for (int j = 0; j < n; ++j) {
    const int k = j < n / 2 ? j : j - n;
    if (k == 0 || std::abs(k) > level + 1) c[j] = 0.0;
  }
  return field_from_spectrum(std::move(c));
}

inline double sobolev_norm(const PeriodicField& f, int k) {
  const auto c = spectrum(f);
  const int n = f.n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double m = std::abs(j < n / 2 ? j : j - n);
    double w = 1.0, p = 1.0;
    for (int i = 1; i <= k; ++i) {
      p *= m * m;
      w += p;
    }
    acc += w * std::norm(c[j]);
  }
  return std::sqrt(kTwoPi * acc);
}

// ------------------------------------------------------------ complex fields

inline ComplexField operator+(const ComplexField& a, const ComplexField& b) {
  detail::check_same(a.n, b.n);
  ComplexField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = a.v[j] + b.v[j];
  return r;
}

inline ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  detail::check_same(a.n, b.n);
  ComplexField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = a.v[j] - b.v[j];
  return r;
}

inline ComplexField operator*(std::complex<double> s, const ComplexField& a) {
  ComplexField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = s * a.v[j];
  return r;
}

inline PeriodicField abs2(const ComplexField& a) {
  PeriodicField r(a.n);
  for (int j = 0; j < a.n; ++j) r.v[j] = std::norm(a.v[j]);
  return r;
}

inline double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& z : f.v) s += std::norm(z);
  return std::sqrt(s * kTwoPi / f.n);
}

inline double sobolev_norm(const ComplexField& f, int k) {
  std::vector<std::complex<double>> c = f.v;
  fft_inplace(c, false);
  const int n = f.n;
  const double s = 1.0 / n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double m = std::abs(j < n / 2 ? j : j - n);
    double w = 1.0, p = 1.0;
    for (int i = 1; i <= k; ++i) {
      p *= m * m;
      w += p;
    }
    acc += w * std::norm(c[j] * s);
  }
  return std::sqrt(kTwoPi * acc);
}

}  // namespace scl
