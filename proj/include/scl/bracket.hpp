#pragma once

// Exact bracket decompositions of single high trigonometric modes into
// quadratic interactions of lower ones.
//
// decompose_mode(psi, n) writes a polynomial psi with modes up to n+2 as
//
//     psi = low - sum_i f_i * d/dx f_i,        low, f_i in E_n,
//
// where E_n = span{sin(jx), cos(jx) : 1 <= j <= n+1}. The identities behind
// it, for the top mode q and m >= 1:
//
//   even q = 2m:
//     +sin(2mx) = -(2/m) cos(mx) d cos(mx)
//     -sin(2mx) = -(2/m) sin(mx) d sin(mx)
//     +cos(2mx) = -(1/m) (sin(mx)-cos(mx)) d (sin(mx)-cos(mx))
//     -cos(2mx) = -(1/m) (sin(mx)+cos(mx)) d (sin(mx)+cos(mx))
//   odd q = 2m+1, with h = cos((m+1)x):
//     +(q/2) sin(qx) = -g dg - h dh + (m/2) sin(2mx) + (1/2) sin x,  g = sin((m+1)x) - sin(mx)
//     -(q/2) sin(qx) = -g dg - h dh + (m/2) sin(2mx) - (1/2) sin x,  g = sin((m+1)x) + sin(mx)
//     +(q/2) cos(qx) = -g dg - h dh - (m/2) sin(2mx) - (1/2) cos x,  g = sin((m+1)x) - cos(mx)
//     -(q/2) cos(qx) = -g dg - h dh - (m/2) sin(2mx) + (1/2) cos x,  g = sin((m+1)x) + cos(mx)
//
// Sign-definite amplitudes are absorbed into the factors (square roots), so
// the map is positively homogeneous along each signed coefficient direction.
//
// decompose_pair lifts this to pair-valued controls: given zeta = (z0, z1)
// with modes up to n+2 it produces eta in E_n x E_n and factor pairs
// (xi0_i, xi1_i) in E_n x E_n with
//
//     z0 = eta0 - sum_i xi0_i d xi0_i,
//     z1 = eta1 - sum_i d(xi0_i xi1_i).

#include <cmath>
#include <string>
#include <vector>

#include "scl/errors.hpp"
#include "scl/trig_poly.hpp"

namespace scl {

struct BracketDecomposition {
  TrigPolynomial low;
  std::vector<TrigPolynomial> factors;
};

struct PairedDecomposition {
  TrigPair low;                  // (eta0, eta1)
  std::vector<TrigPair> pairs;   // (xi0_i, xi1_i), unit weights
};

namespace detail {

// Recursive single-term worker: places c * trig(q x) into out, using the
// identities above whenever q exceeds max_mode. Residual terms re-enter
// through the same path, so any q is handled (each recursion strictly lowers
// the top mode).
inline void decompose_term(double c, int q, bool is_sin, int max_mode, BracketDecomposition& out) {
  if (c == 0.0) return;
  if (q <= max_mode) {
    if (is_sin)
      out.low.add_sin(q, c);
    else
      out.low.add_cos(q, c);
    return;
  }
  if (q < 2) throw NotInSpace("decompose_mode: cannot lower mode 1 below level 0");
  if (q % 2 == 0) {
    const int m = q / 2;
    const double a = std::abs(c);
    TrigPolynomial g;
    if (is_sin) {
      g = c > 0.0 ? TrigPolynomial::cos_mode(m, std::sqrt(2.0 * a / m))
                  : TrigPolynomial::sin_mode(m, std::sqrt(2.0 * a / m));
    } else {
      const double r = std::sqrt(a / m);
      g = TrigPolynomial::sin_mode(m, r);
      g.add_cos(m, c > 0.0 ? -r : r);
    }
    if (g.degree() > max_mode)
      throw NotInSpace("decompose_mode: factor mode " + std::to_string(g.degree()) +
                       " exceeds level bound " + std::to_string(max_mode));
    out.factors.push_back(std::move(g));
    return;
  }
  const int m = (q - 1) / 2;
  const double sigma = 2.0 * std::abs(c) / q;
  const double r = std::sqrt(sigma);
  const bool pos = c > 0.0;
  TrigPolynomial g = TrigPolynomial::sin_mode(m + 1, r);
  if (is_sin)
    g.add_sin(m, pos ? -r : r);
  else
    g.add_cos(m, pos ? -r : r);
  TrigPolynomial h = TrigPolynomial::cos_mode(m + 1, r);
  if (g.degree() > max_mode)
    throw NotInSpace("decompose_mode: factor mode " + std::to_string(g.degree()) +
                     " exceeds level bound " + std::to_string(max_mode));
  out.factors.push_back(std::move(g));
  out.factors.push_back(std::move(h));
  // Residual of the odd identity, scaled by sigma, sign flipped with c for
  // sin (the residual's sin(2mx) term is even in the sign split) and kept
  // for cos.
  if (is_sin) {
    decompose_term(sigma * (0.5 * m), 2 * m, true, max_mode, out);
    decompose_term(pos ? 0.5 * sigma : -0.5 * sigma, 1, true, max_mode, out);
  } else {
    decompose_term(-sigma * (0.5 * m), 2 * m, true, max_mode, out);
    decompose_term(pos ? -0.5 * sigma : 0.5 * sigma, 1, false, max_mode, out);
  }
}

}  // namespace detail

inline BracketDecomposition decompose_mode(const TrigPolynomial& psi, int n) {
  if (n < 0) throw NotInSpace("decompose_mode: level must be >= 0");
  const int max_mode = n + 1;
  const double tol = 1e-15 * std::max(1.0, psi.max_abs_coef());
  if (psi.degree(tol) > max_mode + 1)
    throw NotInSpace("decompose_mode: polynomial has mode " + std::to_string(psi.degree(tol)) +
                     ", expected at most " + std::to_string(max_mode + 1));
  BracketDecomposition out;
  for (int q = psi.degree(tol); q >= 1; --q) {
    detail::decompose_term(psi.sin_coef(q), q, true, max_mode, out);
    detail::decompose_term(psi.cos_coef(q), q, false, max_mode, out);
  }
  return out;
}

inline PairedDecomposition decompose_pair(const TrigPair& zeta, int n) {
  PairedDecomposition out;
  BracketDecomposition d0 = decompose_mode(zeta.a, n);
  BracketDecomposition dp = decompose_mode(zeta.b, n);
  BracketDecomposition dm = decompose_mode(-1.0 * zeta.b, n);
  out.low.a = d0.low + dp.low + dm.low;
  out.low.b = dp.low;
  for (auto& f : d0.factors) out.pairs.emplace_back(std::move(f), TrigPolynomial{});
  for (auto& p : dp.factors) {
    TrigPolynomial half = 0.5 * p;
    out.pairs.emplace_back(std::move(p), std::move(half));
  }
  for (auto& q : dm.factors) out.pairs.emplace_back(std::move(q), TrigPolynomial{});
  return out;
}

// ------------------------------------------------------ residual evaluation
// Dense-grid residuals of the defining identities; used by tests and the
// acceptance suite. grid_n must exceed twice the polynomial degree.

inline double mode_identity_residual(const TrigPolynomial& psi, const BracketDecomposition& dec,
                                     int grid_n = 512) {
  PeriodicField r = psi.to_field(grid_n) - dec.low.to_field(grid_n);
  for (const auto& g : dec.factors) {
    r += hadamard(g.to_field(grid_n), g.derivative().to_field(grid_n));
  }
  return linf_norm(r);
}

inline double pair_identity_residual(const TrigPair& zeta, const PairedDecomposition& dec,
                                     int grid_n = 512) {
  PeriodicField r0 = zeta.a.to_field(grid_n) - dec.low.a.to_field(grid_n);
  PeriodicField r1 = zeta.b.to_field(grid_n) - dec.low.b.to_field(grid_n);
  for (const auto& pr : dec.pairs) {
    r0 += hadamard(pr.a.to_field(grid_n), pr.a.derivative().to_field(grid_n));
    // d(xi0 xi1) = xi0' xi1 + xi0 xi1'
    r1 += hadamard(pr.a.derivative().to_field(grid_n), pr.b.to_field(grid_n));
    r1 += hadamard(pr.a.to_field(grid_n), pr.b.derivative().to_field(grid_n));
  }
  return std::max(linf_norm(r0), linf_norm(r1));
}

}  // namespace scl
