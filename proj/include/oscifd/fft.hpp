#pragma once

#include <complex>
#include <numbers>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oscifd/errors.hpp"

namespace oscifd {

using Complex = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Forward twiddles exp(-2 pi i j / n) for j < n/2, computed directly (a
/// multiplicative recurrence would drift by O(n) ulps).
inline const std::vector<Complex>& twiddle_table(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::vector<Complex>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<Complex> tw(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            tw[j] = Complex(std::cos(ang), std::sin(ang));
        }
        it = cache.emplace(n, std::move(tw)).first;
    }
    return it->second;
}

/// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse
/// (inverse is unscaled; callers divide by n).
inline void fft_radix2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    const std::vector<Complex>& tw = twiddle_table(n);
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex w = (sign < 0) ? tw[k * stride] : std::conj(tw[k * stride]);
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

/// Precomputed chirp tables for Bluestein's algorithm at one size.
struct BluesteinPlan {
    std::size_t n = 0;
    std::size_t m = 0;                  // padded power of two >= 2n-1
    std::vector<Complex> chirp;         // w_j = exp(-i pi j^2 / n), j < n
    std::vector<Complex> chirp_fft;     // FFT of the zero-padded conjugate chirp

    explicit BluesteinPlan(std::size_t size) : n(size), m(next_pow2(2 * size - 1)) {
        chirp.resize(n);
        std::vector<Complex> b(m, Complex(0.0, 0.0));
        for (std::size_t j = 0; j < n; ++j) {
            // j^2 mod 2n keeps the phase argument small for large sizes
            const std::size_t j2 = (j * j) % (2 * n);
            const double ang = std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n);
            chirp[j] = Complex(std::cos(ang), -std::sin(ang));
            b[j] = std::conj(chirp[j]);
            if (j != 0) b[m - j] = std::conj(chirp[j]);
        }
        fft_radix2(b, -1);
        chirp_fft = std::move(b);
    }
};

inline const BluesteinPlan& bluestein_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, BluesteinPlan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, BluesteinPlan(n)).first;
    return it->second;
}

inline void fft_bluestein(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    const BluesteinPlan& plan = bluestein_plan(n);
    std::vector<Complex> x(plan.m, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        const Complex c = (sign < 0) ? plan.chirp[j] : std::conj(plan.chirp[j]);
        x[j] = a[j] * c;
    }
    fft_radix2(x, -1);
    if (sign < 0) {
        for (std::size_t j = 0; j < plan.m; ++j) x[j] *= plan.chirp_fft[j];
    } else {
        // inverse transform convolves with the conjugate chirp
        for (std::size_t j = 0; j < plan.m; ++j) x[j] *= std::conj(plan.chirp_fft[j]);
    }
    fft_radix2(x, +1);
    const double scale = 1.0 / static_cast<double>(plan.m);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex c = (sign < 0) ? plan.chirp[j] : std::conj(plan.chirp[j]);
        a[j] = x[j] * c * scale;
    }
}

} // namespace detail

/// In-place forward DFT: a_k <- sum_j a_j exp(-2 pi i j k / n). Unnormalized.
inline void fft_forward(std::vector<Complex>& a) {
    if (a.empty()) throw UnsupportedGridSize("DFT of empty vector");
    if (a.size() == 1) return;
    if (detail::is_pow2(a.size())) detail::fft_radix2(a, -1);
    else detail::fft_bluestein(a, -1);
}

/// In-place inverse DFT including the 1/n normalization.
inline void fft_inverse(std::vector<Complex>& a) {
    if (a.empty()) throw UnsupportedGridSize("DFT of empty vector");
    if (a.size() == 1) return;
    if (detail::is_pow2(a.size())) detail::fft_radix2(a, +1);
    else detail::fft_bluestein(a, +1);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (Complex& v : a) v *= inv;
}

/// Fourier coefficients with the 1/M convention: hat_u_k = (1/M) sum_j u_j e^{-2 pi i jk/M}.
inline std::vector<Complex> fourier_coefficients(const std::vector<Complex>& u) {
    std::vector<Complex> c = u;
    fft_forward(c);
    const double inv = 1.0 / static_cast<double>(u.size());
    for (Complex& v : c) v *= inv;
    return c;
}

} // namespace oscifd
