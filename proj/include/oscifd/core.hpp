#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "oscifd/errors.hpp"
#include "oscifd/fft.hpp"
#include "oscifd/filters.hpp"

namespace oscifd {

// ---------------------------------------------------------------------------
// Envelope profiles
// ---------------------------------------------------------------------------

/// Constant profile a0(x) = value.
struct ConstantProfile {
    double value = 1.0;
};

/// Gaussian profile a0(x) = exp(-sigma (x - center)^2).
struct GaussianProfile {
    double sigma = 1.0;
    double center = 0.0;
};

/// Profile given by samples on the uniform periodic grid of the domain,
/// evaluated off the nodes by trigonometric interpolation.
struct TabulatedProfile {
    std::vector<Complex> samples;          // at x_j = domain_left + j L/n
    std::vector<Complex> coefficients;     // cached Fourier coefficients (1/n convention)

    explicit TabulatedProfile(std::vector<Complex> values)
        : samples(std::move(values)), coefficients(fourier_coefficients(samples)) {}
};

using EnvelopeProfile = std::variant<ConstantProfile, GaussianProfile, TabulatedProfile>;

// ---------------------------------------------------------------------------
// Problem data
// ---------------------------------------------------------------------------

/// Continuous problem data: semiclassical parameter, wave number, nonlinearity,
/// periodic domain, final time and the envelope of the initial data.
struct PhysicalSetup {
    double epsilon = 1.0;
    double kappa = 1.0;
    double lambda = 1.0;
    double domain_left = -4.0;
    double domain_right = 4.0;
    double final_time = 1.0;
    EnvelopeProfile envelope = GaussianProfile{};

    double length() const { return domain_right - domain_left; }

    // lambda = 0 is accepted: the linear equation is the setting of the
    // stability studies even though the model problem has lambda != 0.
    void validate() const {
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (kappa == 0.0) throw ConfigError("kappa must be nonzero");
        if (!(domain_right > domain_left)) throw ConfigError("domain_right must exceed domain_left");
        if (!(final_time > 0.0)) throw ConfigError("final_time must be positive");
    }
};

/// Evaluate the envelope profile at x, wrapped periodically into the domain.
inline Complex envelope_value(const EnvelopeProfile& profile, const PhysicalSetup& setup, double x) {
    const double L = setup.length();
    double y = std::fmod(x - setup.domain_left, L);
    if (y < 0.0) y += L;
    return std::visit(
        [&](const auto& p) -> Complex {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantProfile>) {
                return Complex(p.value, 0.0);
            } else if constexpr (std::is_same_v<T, GaussianProfile>) {
                const double xx = setup.domain_left + y;
                const double d = xx - p.center;
                return Complex(std::exp(-p.sigma * d * d), 0.0);
            } else {
                const std::size_t n = p.coefficients.size();
                // frequencies j = -floor(n/2) .. ceil(n/2)-1 reconstruct the samples exactly
                Complex acc(0.0, 0.0);
                for (std::size_t k = 0; k < n; ++k) {
                    const long j = (k <= (n - 1) / 2) ? static_cast<long>(k)
                                                      : static_cast<long>(k) - static_cast<long>(n);
                    const double ang = 2.0 * std::numbers::pi * static_cast<double>(j) * y / L;
                    acc += p.coefficients[k] * Complex(std::cos(ang), std::sin(ang));
                }
                return acc;
            }
        },
        profile);
}

// ---------------------------------------------------------------------------
// Mesh data
// ---------------------------------------------------------------------------

/// Mesh data for one scheme run: spatial and temporal resolution together with
/// the filter arguments alpha = kappa^2 tau / (2 eps), beta = kappa h / eps and
/// their cached filter values.
struct Discretization {
    int M = 0;               // grid points
    long N = 0;              // time steps
    double h = 0.0;          // L / M
    double tau = 0.0;        // realized final time / N
    double alpha = 0.0;
    double beta = 0.0;
    FilterValues filters;
    double rho_eff = 0.0;    // effective consistency constant; 0 in direct mode
    bool consistent = false; // true when (2.5)-planned
    double theta_bound = -1.0; // stability margin when planned for leapfrog; < 0 if absent

    double realized_final_time() const { return tau * static_cast<double>(N); }

    /// Direct construction from user-specified (tau, h); no consistency relation.
    static Discretization direct(const PhysicalSetup& setup, double tau, double h) {
        if (!(tau > 0.0) || !(h > 0.0)) throw ConfigError("tau and h must be positive");
        Discretization d;
        const double L = setup.length();
        d.M = static_cast<int>(std::llround(L / h));
        if (d.M < 2) throw ConfigError("mesh must have at least 2 points");
        d.h = L / d.M;
        d.N = std::max<long>(1, std::llround(setup.final_time / tau));
        d.tau = tau;
        d.alpha = 0.5 * setup.kappa * setup.kappa * d.tau / setup.epsilon;
        d.beta = setup.kappa * d.h / setup.epsilon;
        d.filters = FilterValues::at(d.alpha, d.beta);
        return d;
    }

    /// The same mesh with the time step halved (used by the one-step
    /// Crank-Nicolson form).
    Discretization halved() const {
        Discretization d = *this;
        d.tau = 0.5 * tau;
        d.alpha = 0.5 * alpha;
        d.N = 2 * N;
        d.filters = FilterValues::at(d.alpha, d.beta);
        return d;
    }
};

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

/// Complex state on the M periodic nodes x_j = domain_left + j h at one time level.
struct GridFunction {
    std::vector<Complex> values;
    double time_label = 0.0;

    int size() const { return static_cast<int>(values.size()); }
};

inline double node(const PhysicalSetup& setup, const Discretization& disc, int j) {
    return setup.domain_left + static_cast<double>(j) * disc.h;
}

/// Result flags of sampling the oscillatory initial data.
struct SampleDiagnostics {
    bool periodicity_warning = false;
    std::string message;
};

/// Sample u(0, x_j) = exp(i kappa x_j / eps) a0(x_j).
///
/// Warns (without rejecting) when the carrier exp(i kappa x / eps) is not
/// L-periodic while the envelope has non-negligible boundary support, since
/// the periodic grid then wraps a discontinuity.
inline GridFunction sample_initial_data(const PhysicalSetup& setup, const Discretization& disc,
                                        SampleDiagnostics* diag = nullptr) {
    GridFunction u;
    u.values.resize(disc.M);
    u.time_label = 0.0;
    for (int j = 0; j < disc.M; ++j) {
        const double x = node(setup, disc, j);
        const double phase = setup.kappa * x / setup.epsilon;
        u.values[j] = Complex(std::cos(phase), std::sin(phase)) * envelope_value(setup.envelope, setup, x);
    }
    if (diag) {
        constexpr double kPhaseTol = 1e-9;
        // a gaussian reaching ~1e-7 at the boundary makes the wrap mismatch
        // negligible against any O(eps) error floor of interest
        constexpr double kSupportTol = 1e-6;
        const double cycles = setup.kappa * setup.length() / (2.0 * std::numbers::pi * setup.epsilon);
        const double frac = std::abs(cycles - std::round(cycles));
        const double wrap_mismatch = 2.0 * std::abs(std::sin(std::numbers::pi * frac));
        const double edge = std::max(std::abs(envelope_value(setup.envelope, setup, setup.domain_left)),
                                     std::abs(envelope_value(setup.envelope, setup, setup.domain_right)));
        diag->periodicity_warning = wrap_mismatch > kPhaseTol && edge > kSupportTol;
        if (diag->periodicity_warning) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2e", edge);
            diag->message = "initial data: kappa*L/(2*pi*eps) = " + std::to_string(cycles) +
                            " is not an integer and the envelope reaches " + buf +
                            " at the boundary; the periodic wrap is discontinuous at that scale";
        }
    }
    return u;
}

} // namespace oscifd
