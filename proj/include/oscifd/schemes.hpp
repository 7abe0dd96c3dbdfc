#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/diagnostics.hpp"
#include "oscifd/errors.hpp"
#include "oscifd/fft.hpp"
#include "oscifd/modulation.hpp"

namespace oscifd {

/// Two consecutive time levels of a two-step scheme.
struct TwoLevelState {
    GridFunction u_prev;  // level n-1
    GridFunction u_curr;  // level n
    long step_index = 1;  // index of u_curr
};

enum class CnPredictor { copy_prev, leapfrog_predictor };

/// Controls of the Crank-Nicolson fixed-point solver.
struct CnConfig {
    double fixed_point_tol = 1e-14;  // max-norm
    int max_iterations = 100;
    CnPredictor predictor = CnPredictor::copy_prev;
};

namespace detail {

inline void ensure_finite(const std::vector<Complex>& v, const char* who) {
    for (const Complex& c : v) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw NonFiniteState(std::string(who) + ": state contains NaN/Inf (blow-up)");
        }
    }
}

/// Symbol of the filtered second difference, 2 cos(kh) - 2 phi(beta), on the
/// DFT index grid.
inline std::vector<double> difference_symbol(const Discretization& disc) {
    std::vector<double> sym(disc.M);
    for (int p = 0; p < disc.M; ++p) {
        const double kh = 2.0 * std::numbers::pi * static_cast<double>(p) / disc.M;
        sym[p] = 2.0 * (std::cos(kh) - disc.filters.phi_beta);
    }
    return sym;
}

} // namespace detail

/// One filtered leapfrog step (levels n-1, n -> n, n+1), algebraically
/// equivalent to the symmetric two-step formulation of the scheme.
inline TwoLevelState leapfrog_step(const TwoLevelState& state, const PhysicalSetup& setup,
                                   const Discretization& disc) {
    const int M = disc.M;
    const FilterValues& f = disc.filters;
    const double eps = setup.epsilon;
    const std::vector<Complex>& um = state.u_prev.values;
    const std::vector<Complex>& uc = state.u_curr.values;
    GridFunction next;
    next.values.resize(M);
    next.time_label = state.u_curr.time_label + disc.tau;
    const Complex coeff = Complex(0.0, 2.0 * disc.tau * f.sinc_alpha / eps);
    const double space_pref = 0.5 * eps * eps / (disc.h * disc.h * f.psi_beta);
    const double nl_pref = setup.lambda * eps / f.tanc_alpha;
    for (int j = 0; j < M; ++j) {
        const Complex lap = uc[(j + 1) % M] - 2.0 * f.phi_beta * uc[j] + uc[(j - 1 + M) % M];
        const Complex space = space_pref * lap;
        const Complex nl = (setup.lambda == 0.0) ? Complex(0.0, 0.0) : Complex(nl_pref * std::norm(uc[j])) * uc[j];
        next.values[j] = um[j] + coeff * (space - nl);
    }
    detail::ensure_finite(next.values, "leapfrog_step");
    return TwoLevelState{state.u_curr, std::move(next), state.step_index + 1};
}

/// One filtered Crank-Nicolson map u^{n-1} -> u^{n+1} (it spans 2 tau; the
/// middle level does not enter). The nonlinear density is lagged and the
/// remaining linear circulant system is solved exactly in Fourier space each
/// Picard iteration.
inline GridFunction cn_map(const GridFunction& u_prev, const PhysicalSetup& setup,
                           const Discretization& disc, const CnConfig& cfg) {
    const int M = disc.M;
    const FilterValues& f = disc.filters;
    if (std::abs(f.cos_alpha) < 0.5) {
        // alpha near an odd multiple of pi/2; the one-step form halves alpha,
        // so consistency-planned meshes (alpha near n pi) always land here --
        // use the two-step map or the dominant_term bootstrap instead
        throw CosineTooSmall("cn_map: |cos(alpha)| < 0.5 at alpha = " + std::to_string(disc.alpha));
    }
    const double eps = setup.epsilon;
    const Complex c_t = Complex(0.0, eps / (2.0 * disc.tau * f.sinc_alpha));
    const double c_s = 0.5 * eps * eps / (disc.h * disc.h * f.psi_beta);
    const double inv2cos = 1.0 / (2.0 * f.cos_alpha);
    const std::vector<double> sym = detail::difference_symbol(disc);

    std::vector<Complex> uprev_hat = u_prev.values;
    fft_forward(uprev_hat);
    std::vector<Complex> rhs_fixed(M), mult(M);
    for (int p = 0; p < M; ++p) {
        const Complex lin = c_s * sym[p] * inv2cos;
        mult[p] = c_t + lin;
        rhs_fixed[p] = (c_t - lin) * uprev_hat[p];
    }

    std::vector<Complex> u = u_prev.values;  // copy_prev predictor
    if (cfg.predictor == CnPredictor::leapfrog_predictor) {
        // half-accuracy explicit guess; adequate at large tau
        for (int j = 0; j < M; ++j) {
            const Complex lap =
                u_prev.values[(j + 1) % M] - 2.0 * f.phi_beta * u_prev.values[j] + u_prev.values[(j - 1 + M) % M];
            const Complex space = c_s * lap;
            const Complex nl = setup.lambda * eps * std::norm(u_prev.values[j]) * u_prev.values[j] / f.tanc_alpha;
            u[j] = u_prev.values[j] + Complex(0.0, 2.0 * disc.tau * f.sinc_alpha / eps) * (space - nl);
        }
    }

    std::vector<Complex> work(M);
    const bool linear = (setup.lambda == 0.0);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (linear) {
            for (int p = 0; p < M; ++p) work[p] = rhs_fixed[p] / mult[p];
        } else {
            const double nl_pref = setup.lambda * eps / (2.0 * f.tanc_alpha);
            for (int j = 0; j < M; ++j) {
                const Complex ut = (u[j] + u_prev.values[j]) * inv2cos;
                work[j] = nl_pref * (std::norm(u_prev.values[j]) + std::norm(u[j])) * ut;
            }
            fft_forward(work);
            for (int p = 0; p < M; ++p) work[p] = (rhs_fixed[p] + work[p]) / mult[p];
        }
        fft_inverse(work);
        double delta = 0.0;
        for (int j = 0; j < M; ++j) delta = std::max(delta, std::abs(work[j] - u[j]));
        u.swap(work);
        if (linear || delta <= cfg.fixed_point_tol) {
            detail::ensure_finite(u, "cn_map");
            GridFunction out;
            out.values = std::move(u);
            out.time_label = u_prev.time_label + 2.0 * disc.tau;
            return out;
        }
    }
    throw FixedPointDivergence("cn_map: fixed point not below tol " +
                               std::to_string(cfg.fixed_point_tol) + " within " +
                               std::to_string(cfg.max_iterations) + " iterations");
}

/// Crank-Nicolson step in the two-level interface of the paper: consumes
/// (u^{n-1}, u^n), produces (u^n, u^{n+1}) where u^{n+1} solves the scheme
/// from u^{n-1} over 2 tau.
inline TwoLevelState cn_step(const TwoLevelState& state, const PhysicalSetup& setup,
                             const Discretization& disc, const CnConfig& cfg) {
    GridFunction next = cn_map(state.u_prev, setup, disc, cfg);
    return TwoLevelState{state.u_curr, std::move(next), state.step_index + 1};
}

/// One-step Crank-Nicolson form: the same map with tau/2 substituted, read as
/// u^n -> u^{n+1}; advances time by disc.tau.
inline GridFunction cn_one_step(const GridFunction& u, const PhysicalSetup& setup,
                                const Discretization& disc, const CnConfig& cfg) {
    return cn_map(u, setup, disc.halved(), cfg);
}

enum class BootstrapMode { dominant_term, cn_half };

/// Build the second level u^1 needed by the two-step leapfrog scheme.
inline TwoLevelState bootstrap(const GridFunction& u0, const PhysicalSetup& setup,
                               const Discretization& disc, BootstrapMode mode,
                               const CnConfig& cfg = {}) {
    GridFunction u1;
    if (mode == BootstrapMode::dominant_term) {
        Envelope env(setup);
        u1 = sample_dominant_term(env, setup, disc, u0.time_label + disc.tau);
    } else {
        u1 = cn_one_step(u0, setup, disc, cfg);
    }
    return TwoLevelState{u0, std::move(u1), 1};
}

enum class CnAdvance {
    automatic,  // two_step on consistency-planned meshes, one_step otherwise
    one_step,
    two_step,
};

struct RunOptions {
    Scheme scheme = Scheme::crank_nicolson;
    BootstrapMode bootstrap_mode = BootstrapMode::cn_half;
    CnConfig cn;
    CnAdvance cn_advance = CnAdvance::automatic;
    double blowup_ceiling_factor = 1e6;  // on the initial max norm
    std::function<void(long, const GridFunction&)> observer;
};

struct RunResult {
    GridFunction final_state;
    long blowup_step = -1;  // failing level when the run terminated early

    bool blew_up() const { return blowup_step >= 0; }
};

/// Advance N steps to the realized final time. On blow-up (non-finite values
/// or max norm beyond the ceiling) returns the last finite state together
/// with the failing step index.
inline RunResult run(Scheme scheme, const GridFunction& u0, const PhysicalSetup& setup,
                     const Discretization& disc, const RunOptions& opts = {}) {
    RunResult result;
    const double ceiling = opts.blowup_ceiling_factor * std::max(max_abs(u0), 1e-300);
    auto over_ceiling = [&](const GridFunction& u) { return max_abs(u) > ceiling; };
    if (opts.observer) opts.observer(0, u0);
    if (disc.N == 0) {
        result.final_state = u0;
        return result;
    }

    if (scheme == Scheme::leapfrog) {
        TwoLevelState state;
        try {
            state = bootstrap(u0, setup, disc, opts.bootstrap_mode, opts.cn);
        } catch (const NonFiniteState&) {
            result.final_state = u0;
            result.blowup_step = 1;
            return result;
        }
        if (opts.observer) opts.observer(1, state.u_curr);
        for (long nstep = 1; nstep < disc.N; ++nstep) {
            TwoLevelState next;
            try {
                next = leapfrog_step(state, setup, disc);
            } catch (const NonFiniteState&) {
                result.final_state = state.u_curr;
                result.blowup_step = nstep + 1;
                return result;
            }
            if (over_ceiling(next.u_curr)) {
                result.final_state = state.u_curr;
                result.blowup_step = nstep + 1;
                return result;
            }
            state = std::move(next);
            if (opts.observer) opts.observer(state.step_index, state.u_curr);
        }
        result.final_state = std::move(state.u_curr);
        return result;
    }

    // Crank-Nicolson
    const bool two_step = (opts.cn_advance == CnAdvance::two_step) ||
                          (opts.cn_advance == CnAdvance::automatic && disc.consistent);
    if (two_step) {
        if (disc.N % 2 != 0) {
            throw ConfigError("two-step Crank-Nicolson advance needs an even number of steps");
        }
        GridFunction u = u0;
        for (long pair = 0; pair < disc.N / 2; ++pair) {
            GridFunction next;
            try {
                next = cn_map(u, setup, disc, opts.cn);
            } catch (const NonFiniteState&) {
                result.final_state = u;
                result.blowup_step = 2 * pair + 2;
                return result;
            }
            if (over_ceiling(next)) {
                result.final_state = u;
                result.blowup_step = 2 * pair + 2;
                return result;
            }
            u = std::move(next);
            if (opts.observer) opts.observer(2 * (pair + 1), u);
        }
        result.final_state = std::move(u);
        return result;
    }
    GridFunction u = u0;
    for (long nstep = 0; nstep < disc.N; ++nstep) {
        GridFunction next;
        try {
            next = cn_one_step(u, setup, disc, opts.cn);
        } catch (const NonFiniteState&) {
            result.final_state = u;
            result.blowup_step = nstep + 1;
            return result;
        }
        if (over_ceiling(next)) {
            result.final_state = u;
            result.blowup_step = nstep + 1;
            return result;
        }
        u = std::move(next);
        if (opts.observer) opts.observer(nstep + 1, u);
    }
    result.final_state = std::move(u);
    return result;
}

} // namespace oscifd
