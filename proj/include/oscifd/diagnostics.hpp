#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/errors.hpp"
#include "oscifd/fft.hpp"

namespace oscifd {

/// Discrete mass sum_j |u_j|^2 (plain sum, no h weight).
inline double discrete_mass(const GridFunction& u) {
    double s = 0.0;
    for (const Complex& v : u.values) s += std::norm(v);
    return s;
}

/// Discrete energy
///   eps^2/2 sum_j |u_{j+1} - u_j|^2 / (h^2 psi(beta))
///   + lambda eps / 2 sum_j |u_j|^4 / tanc(alpha)
/// with periodic wrap at j = M-1.
inline double discrete_energy(const GridFunction& u, const PhysicalSetup& setup,
                              const Discretization& disc) {
    const int M = u.size();
    double grad = 0.0;
    double quart = 0.0;
    for (int j = 0; j < M; ++j) {
        const Complex d = u.values[(j + 1) % M] - u.values[j];
        grad += std::norm(d);
        const double a2 = std::norm(u.values[j]);
        quart += a2 * a2;
    }
    const double e2 = setup.epsilon * setup.epsilon;
    return 0.5 * e2 * grad / (disc.h * disc.h * disc.filters.psi_beta) +
           0.5 * setup.lambda * setup.epsilon * quart / disc.filters.tanc_alpha;
}

/// Discrete Wiener (ell^1 Fourier) norm: sum_k |hat_u_k| with hat_u_k the
/// 1/M-normalized coefficients.
inline double wiener_norm(const GridFunction& u) {
    if (u.values.empty()) return 0.0;
    std::vector<Complex> c = u.values;
    fft_forward(c);
    double s = 0.0;
    for (const Complex& v : c) s += std::abs(v);
    return s / static_cast<double>(u.size());
}

inline double max_abs(const GridFunction& u) {
    double m = 0.0;
    for (const Complex& v : u.values) m = std::max(m, std::abs(v));
    return m;
}

/// Max-norm error against a reference on a node-aligned finer grid
/// (reference size must be an integer multiple of u's size).
inline double max_error(const GridFunction& u, const GridFunction& reference) {
    const int M = u.size();
    const int Mr = reference.size();
    if (M == 0 || Mr % M != 0) {
        throw GridMisaligned("reference grid size " + std::to_string(Mr) +
                             " is not an integer multiple of " + std::to_string(M));
    }
    const int stride = Mr / M;
    double e = 0.0;
    for (int j = 0; j < M; ++j) e = std::max(e, std::abs(u.values[j] - reference.values[j * stride]));
    return e;
}

/// Max-norm error against sampled analytic values.
inline double max_error(const GridFunction& u, const std::vector<Complex>& reference_values) {
    if (u.values.size() != reference_values.size()) throw GridMisaligned("size mismatch");
    double e = 0.0;
    for (std::size_t j = 0; j < reference_values.size(); ++j)
        e = std::max(e, std::abs(u.values[j] - reference_values[j]));
    return e;
}

/// Least-squares slope of log(errors) against log(hs).
inline double fit_order(const std::vector<double>& hs, const std::vector<double>& errors) {
    if (hs.size() != errors.size() || hs.size() < 3) {
        throw DegenerateFit("fit_order needs at least 3 (h, error) pairs");
    }
    const std::size_t n = hs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hs[i] > 0.0) || !(errors[i] > 0.0)) throw DegenerateFit("fit_order needs positive pairs");
        const double x = std::log(hs[i]);
        const double y = std::log(errors[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(n * sxx))) {
        throw DegenerateFit("zero variance in log(h)");
    }
    return (n * sxy - sx * sy) / denom;
}

/// Conserved-quantity time series with running relative drifts.
struct ConservationSeries {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> energy;
    double rel_mass_drift = 0.0;
    double rel_energy_drift = 0.0;

    void append(double t, double m, double e) {
        times.push_back(t);
        mass.push_back(m);
        energy.push_back(e);
        if (mass.size() > 1) {
            const double m0 = mass.front();
            const double e0 = energy.front();
            if (m0 != 0.0) rel_mass_drift = std::max(rel_mass_drift, std::abs(m - m0) / std::abs(m0));
            if (e0 != 0.0) rel_energy_drift = std::max(rel_energy_drift, std::abs(e - e0) / std::abs(e0));
        }
    }
};

} // namespace oscifd
