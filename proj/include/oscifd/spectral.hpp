#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/errors.hpp"
#include "oscifd/fft.hpp"

namespace oscifd {

/// One Strang splitting step for the reference solver: exact half nonlinear
/// phase flow, exact Fourier-diagonal linear flow, half nonlinear flow.
/// Both sub-flows are pointwise/diagonal unimodular, so mass is preserved to
/// round-off.
inline GridFunction strang_step(const GridFunction& u, const PhysicalSetup& setup, double tau_ref) {
    const int M = u.size();
    if (M < 1) throw UnsupportedGridSize("strang_step: empty grid");
    const double L = setup.length();
    GridFunction out;
    out.values = u.values;
    out.time_label = u.time_label + tau_ref;
    auto half_nonlinear = [&](std::vector<Complex>& v) {
        if (setup.lambda == 0.0) return;
        for (Complex& c : v) {
            const double phase = -setup.lambda * std::norm(c) * 0.5 * tau_ref;
            c *= Complex(std::cos(phase), std::sin(phase));
        }
    };
    half_nonlinear(out.values);
    fft_forward(out.values);
    for (int p = 0; p < M; ++p) {
        const long j = (p <= (M - 1) / 2) ? p : p - M;
        const double k = 2.0 * std::numbers::pi * static_cast<double>(j) / L;
        const double phase = -0.5 * setup.epsilon * k * k * tau_ref;
        out.values[p] *= Complex(std::cos(phase), std::sin(phase));
    }
    fft_inverse(out.values);
    half_nonlinear(out.values);
    return out;
}

struct ReferenceDiagnostics {
    bool under_resolved_warning = false;
    std::string message;
};

/// Compose strang_step to the final time T. tau_ref must divide T to
/// round-off. Warns when the grid resolves fewer than ~4 points per carrier
/// wavelength 2 pi eps / kappa.
inline GridFunction run_reference(const GridFunction& u0_highres, const PhysicalSetup& setup,
                                  double tau_ref, double T, ReferenceDiagnostics* diag = nullptr) {
    if (!(tau_ref > 0.0)) throw ConfigError("run_reference: tau_ref must be positive");
    const long n = std::llround(T / tau_ref);
    if (std::abs(static_cast<double>(n) * tau_ref - T) > 1e-9 * std::max(1.0, std::abs(T))) {
        throw ConfigError("run_reference: tau_ref does not divide the final time");
    }
    if (diag) {
        const double per_wavelength =
            u0_highres.size() * (2.0 * std::numbers::pi * setup.epsilon / std::abs(setup.kappa)) / setup.length();
        diag->under_resolved_warning = per_wavelength < 4.0;
        if (diag->under_resolved_warning) {
            diag->message = "reference grid resolves only " + std::to_string(per_wavelength) +
                            " points per carrier wavelength (< 4); reference invalid at this epsilon";
        }
    }
    GridFunction u = u0_highres;
    for (long s = 0; s < n; ++s) u = strang_step(u, setup, tau_ref);
    return u;
}

} // namespace oscifd
