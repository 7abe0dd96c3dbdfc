#pragma once

#include <cmath>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/diagnostics.hpp"

namespace oscifd {

/// Envelope transported by the geometric-optics equation
///   dt a + kappa dx a = -i lambda |a|^2 a,  a(0, x) = a0(x),
/// solved exactly along characteristics: |a| is transported, so
///   a(t, x) = a0(x - kappa t) exp(-i lambda |a0(x - kappa t)|^2 t).
struct Envelope {
    const PhysicalSetup* setup = nullptr;

    explicit Envelope(const PhysicalSetup& s) : setup(&s) {}
};

inline Complex envelope_eval(const Envelope& env, double t, double x) {
    const PhysicalSetup& s = *env.setup;
    const Complex a0 = envelope_value(s.envelope, s, x - s.kappa * t);
    const double phase = -s.lambda * std::norm(a0) * t;
    return a0 * Complex(std::cos(phase), std::sin(phase));
}

/// Dominant geometric-optics term v(t, x) = a(t, x) exp(i (kappa x - kappa^2 t / 2) / eps).
inline Complex dominant_term(const Envelope& env, double epsilon, double t, double x) {
    const PhysicalSetup& s = *env.setup;
    const double phase = (s.kappa * x - 0.5 * s.kappa * s.kappa * t) / epsilon;
    return envelope_eval(env, t, x) * Complex(std::cos(phase), std::sin(phase));
}

/// Samples of v(t, x_j) on the scheme grid.
inline GridFunction sample_dominant_term(const Envelope& env, const PhysicalSetup& setup,
                                         const Discretization& disc, double t) {
    GridFunction v;
    v.values.resize(disc.M);
    v.time_label = t;
    for (int j = 0; j < disc.M; ++j) {
        v.values[j] = dominant_term(env, setup.epsilon, t, node(setup, disc, j));
    }
    return v;
}

/// Defect of the dominant term inserted into a scheme, with its norms.
struct DefectSample {
    std::vector<Complex> values;
    double max_norm = 0.0;
    double wiener_norm = 0.0;
    bool consistency_flag = true;  // false when the mesh does not satisfy the
                                   // consistency relation (defect then O(1))
};

namespace detail {

inline DefectSample finalize_defect(std::vector<Complex> d, bool consistent) {
    DefectSample out;
    out.max_norm = 0.0;
    for (const Complex& v : d) out.max_norm = std::max(out.max_norm, std::abs(v));
    GridFunction g{d, 0.0};
    out.wiener_norm = oscifd::wiener_norm(g);
    out.values = std::move(d);
    out.consistency_flag = consistent;
    return out;
}

} // namespace detail

/// Defect of v in the filtered leapfrog scheme at time t:
///   i eps (v(t+tau) - v(t-tau)) / (2 tau sinc(alpha))
///   + eps^2/2 (v(t, x+h) - 2 phi(beta) v(t, x) + v(t, x-h)) / (h^2 psi(beta))
///   - lambda eps |v|^2 v / tanc(alpha).
inline DefectSample defect_leapfrog(const Envelope& env, const PhysicalSetup& setup,
                                    const Discretization& disc, double t) {
    const FilterValues& f = disc.filters;
    const double eps = setup.epsilon;
    std::vector<Complex> d(disc.M);
    for (int j = 0; j < disc.M; ++j) {
        const double x = node(setup, disc, j);
        const Complex vp = dominant_term(env, eps, t + disc.tau, x);
        const Complex vm = dominant_term(env, eps, t - disc.tau, x);
        const Complex v0 = dominant_term(env, eps, t, x);
        const Complex vxp = dominant_term(env, eps, t, x + disc.h);
        const Complex vxm = dominant_term(env, eps, t, x - disc.h);
        const Complex time_term = Complex(0.0, 1.0) * eps * (vp - vm) / (2.0 * disc.tau * f.sinc_alpha);
        const Complex space_term =
            0.5 * eps * eps * (vxp - 2.0 * f.phi_beta * v0 + vxm) / (disc.h * disc.h * f.psi_beta);
        const Complex nl = setup.lambda * eps * std::norm(v0) * v0 / f.tanc_alpha;
        d[j] = time_term + space_term - nl;
    }
    return detail::finalize_defect(std::move(d), disc.consistent);
}

/// Defect of v in the filtered Crank-Nicolson scheme (u-tilde built from v at t +- tau).
inline DefectSample defect_cn(const Envelope& env, const PhysicalSetup& setup,
                              const Discretization& disc, double t) {
    const FilterValues& f = disc.filters;
    const double eps = setup.epsilon;
    const int M = disc.M;
    // u-tilde is a grid function of x; build it first so the second difference
    // can use shifted nodes directly.
    std::vector<Complex> vt(M), vp(M), vm(M);
    for (int j = 0; j < M; ++j) {
        const double x = node(setup, disc, j);
        vp[j] = dominant_term(env, eps, t + disc.tau, x);
        vm[j] = dominant_term(env, eps, t - disc.tau, x);
        vt[j] = (vp[j] + vm[j]) / (2.0 * f.cos_alpha);
    }
    auto vtilde_at = [&](double x) {
        const Complex a = dominant_term(env, eps, t + disc.tau, x);
        const Complex b = dominant_term(env, eps, t - disc.tau, x);
        return (a + b) / (2.0 * f.cos_alpha);
    };
    std::vector<Complex> d(M);
    for (int j = 0; j < M; ++j) {
        const double x = node(setup, disc, j);
        const Complex time_term = Complex(0.0, 1.0) * eps * (vp[j] - vm[j]) / (2.0 * disc.tau * f.sinc_alpha);
        const Complex space_term = 0.5 * eps * eps *
                                   (vtilde_at(x + disc.h) - 2.0 * f.phi_beta * vt[j] + vtilde_at(x - disc.h)) /
                                   (disc.h * disc.h * f.psi_beta);
        const Complex nl =
            setup.lambda * eps * (std::norm(vm[j]) + std::norm(vp[j])) * vt[j] / (2.0 * f.tanc_alpha);
        d[j] = time_term + space_term - nl;
    }
    return detail::finalize_defect(std::move(d), disc.consistent);
}

} // namespace oscifd
