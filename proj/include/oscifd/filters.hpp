#pragma once

#include <cmath>
#include <string>

#include "oscifd/errors.hpp"

namespace oscifd {

/// Filter functions sinc, tanc, phi, psi used by the filtered schemes.
///
/// sinc(z) = sin(z)/z
/// tanc(z) = tan(z)/z
/// phi(z)  = 3/2 sinc(z) - 1/2 cos(z)
/// psi(z)  = (phi(z) - cos(z)) / (z^2/2)
///
/// All four are even and equal 1 at z = 0. Near zero the direct formulas are
/// replaced by truncated Taylor series. psi needs a much wider series window
/// than sinc/tanc: the direct numerator phi - cos loses ~z^{-2} digits to
/// cancellation, so the branch switch sits at |z| = 0.1 where both branches
/// are accurate to ~1e-13.

inline constexpr double kSincSeriesThreshold = 1e-4;
inline constexpr double kPsiSeriesThreshold = 0.1;
inline constexpr double kTancPoleGuard = 1e-8;

inline double eval_sinc(double z) {
    if (std::abs(z) < kSincSeriesThreshold) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

inline double eval_tanc(double z) {
    if (std::abs(std::cos(z)) <= kTancPoleGuard) {
        throw PoleError("tanc(" + std::to_string(z) + "): argument too close to a pole of tan");
    }
    if (std::abs(z) < kSincSeriesThreshold) {
        return 1.0 + z * z / 3.0;
    }
    return std::tan(z) / z;
}

inline double eval_phi(double z) {
    return 1.5 * eval_sinc(z) - 0.5 * std::cos(z);
}

inline double eval_psi(double z) {
    if (std::abs(z) < kPsiSeriesThreshold) {
        // psi(z) = 1 - z^2/10 + z^4/280 - z^6/15120 + O(z^8)
        const double z2 = z * z;
        return 1.0 + z2 * (-1.0 / 10.0 + z2 * (1.0 / 280.0 - z2 / 15120.0));
    }
    return (eval_phi(z) - std::cos(z)) / (z * z / 2.0);
}

/// Cached filter evaluations for one (alpha, beta) pair.
struct FilterValues {
    double sinc_alpha = 1.0;
    double tanc_alpha = 1.0;
    double cos_alpha = 1.0;
    double phi_beta = 1.0;
    double psi_beta = 1.0;
    double sinc_beta = 1.0;
    double cos_beta = 1.0;

    static FilterValues at(double alpha, double beta) {
        FilterValues f;
        f.sinc_alpha = eval_sinc(alpha);
        f.tanc_alpha = eval_tanc(alpha);
        f.cos_alpha = std::cos(alpha);
        f.phi_beta = eval_phi(beta);
        f.psi_beta = eval_psi(beta);
        f.sinc_beta = eval_sinc(beta);
        f.cos_beta = std::cos(beta);
        return f;
    }
};

} // namespace oscifd
