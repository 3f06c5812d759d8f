#pragma once

// Iterative radix-2 FFT, self contained so the library stays header-only and
// bit-reproducible across machines and runs (no external plan state).

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace scl {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Roots exp(-2*pi*i*k/n) for k < n/2, cached per size. thread_local keeps the
// cache race-free when harness sweeps run on worker threads.
inline const std::vector<std::complex<double>>& root_table(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> w(n / 2);
  const double step = -2.0 * 3.141592653589793238462643383279502884 / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = step * static_cast<double>(k);
    w[k] = {std::cos(a), std::sin(a)};
  }
  return cache.emplace(n, std::move(w)).first->second;
}

}  // namespace detail

// In-place transform. Forward: X_k = sum_j x_j exp(-2*pi*i*j*k/n).
// Inverse applies the conjugate kernel and divides by n.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) return;
  if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& roots = detail::root_table(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = roots[k * stride];
        if (inverse) w = std::conj(w);
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= s;
  }
}

inline std::vector<std::complex<double>> fft(std::vector<std::complex<double>> a) {
  fft_inplace(a, false);
  return a;
}

inline std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> a) {
  fft_inplace(a, true);
  return a;
}

}  // namespace scl
