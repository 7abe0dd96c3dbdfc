#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oscifd/core.hpp"
#include "oscifd/diagnostics.hpp"
#include "oscifd/modulation.hpp"
#include "oscifd/planner.hpp"

using namespace oscifd;

namespace {

PhysicalSetup gaussian_setup(double eps) {
    PhysicalSetup s;
    s.epsilon = eps;
    s.kappa = 1.0;
    s.lambda = 1.0;
    s.domain_left = -4.0;
    s.domain_right = 4.0;
    s.final_time = 1.0;
    s.envelope = GaussianProfile{1.0, 0.0};
    return s;
}

} // namespace

TEST_CASE("envelope at t = 0 is the profile") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    for (double x : {-3.0, -0.5, 0.0, 1.25, 3.9}) {
        CHECK(std::abs(envelope_eval(env, 0.0, x) - envelope_value(s.envelope, s, x)) < 1e-15);
    }
}

TEST_CASE("envelope modulus is transported") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    for (double t : {0.1, 0.6, 1.0, 2.5}) {
        for (double x : {-3.0, 0.0, 0.7, 2.0}) {
            const double lhs = std::abs(envelope_eval(env, t, x));
            const double rhs = std::abs(envelope_value(s.envelope, s, x - s.kappa * t));
            CHECK(lhs == Catch::Approx(rhs).margin(1e-14));
        }
    }
}

TEST_CASE("envelope satisfies the transport equation (finite-difference oracle)") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    const double d = 1e-5;
    double worst = 0.0;
    for (double t : {0.2, 0.5, 0.9}) {
        for (double x : {-1.5, -0.3, 0.4, 1.8}) {
            const Complex at = (envelope_eval(env, t + d, x) - envelope_eval(env, t - d, x)) / (2.0 * d);
            const Complex ax = (envelope_eval(env, t, x + d) - envelope_eval(env, t, x - d)) / (2.0 * d);
            const Complex a = envelope_eval(env, t, x);
            const Complex resid = at + s.kappa * ax + Complex(0.0, s.lambda) * std::norm(a) * a;
            worst = std::max(worst, std::abs(resid));
        }
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("dominant term at t = 0 samples the initial data") {
    PhysicalSetup s = gaussian_setup(1e-3);
    Envelope env(s);
    Discretization d = Discretization::direct(s, 0.1, 8.0 / 32.0);
    const GridFunction u0 = sample_initial_data(s, d);
    const GridFunction v0 = sample_dominant_term(env, s, d, 0.0);
    CHECK(max_error(u0, v0.values) < 1e-13);
}

TEST_CASE("dominant term modulus equals the shifted envelope") {
    PhysicalSetup s = gaussian_setup(1e-3);
    Envelope env(s);
    for (double t : {0.3, 1.0}) {
        for (double x : {-2.0, 0.1, 1.4}) {
            CHECK(std::abs(dominant_term(env, s.epsilon, t, x)) ==
                  Catch::Approx(std::abs(envelope_value(s.envelope, s, x - s.kappa * t))).margin(1e-14));
        }
    }
}

TEST_CASE("linear constant-envelope dominant term solves the linear equation") {
    // lambda = 0, a0 = 1: v = exp(i(kappa x - kappa^2 t/2)/eps) solves
    // i eps v_t + eps^2/2 v_xx = 0; check with central differences
    PhysicalSetup s = gaussian_setup(0.5);
    s.lambda = 0.0;
    s.envelope = ConstantProfile{1.0};
    Envelope env(s);
    const double d = 1e-5;
    const double t = 0.4, x = 0.9;
    const Complex vt = (dominant_term(env, s.epsilon, t + d, x) - dominant_term(env, s.epsilon, t - d, x)) / (2.0 * d);
    const Complex vxx = (dominant_term(env, s.epsilon, t, x + d) - 2.0 * dominant_term(env, s.epsilon, t, x) +
                         dominant_term(env, s.epsilon, t, x - d)) /
                        (d * d);
    const Complex resid = Complex(0.0, s.epsilon) * vt + 0.5 * s.epsilon * s.epsilon * vxx;
    CHECK(std::abs(resid) < 1e-6);
}

TEST_CASE("mass of the dominant term is time independent on the grid") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    Discretization d = Discretization::direct(s, 0.05, 8.0 / 128.0);
    const GridFunction v0 = sample_dominant_term(env, s, d, 0.0);
    const double m0 = discrete_mass(v0) * d.h;
    for (double t : {0.25, 0.5, 1.0}) {
        const GridFunction vt = sample_dominant_term(env, s, d, t);
        CHECK(discrete_mass(vt) * d.h == Catch::Approx(m0).epsilon(1e-10));
    }
}

TEST_CASE("defect vanishes for the linear plane wave") {
    PhysicalSetup s = gaussian_setup(1e-3);
    s.lambda = 0.0;
    s.envelope = ConstantProfile{1.0};
    // periodic carrier so that the wrap is exact
    const double L = s.length();
    const double q = std::round(s.kappa * L / (2.0 * std::numbers::pi * s.epsilon));
    s.epsilon = s.kappa * L / (2.0 * std::numbers::pi * q);
    Envelope env(s);
    PlanRequest req;
    req.setup = s;
    req.rho_target = 4.0;
    req.alpha_branch = 1;
    const PlanResult plan_res = plan(req);
    const Discretization& d = plan_res.disc;
    const DefectSample lf = defect_leapfrog(env, s, d, 0.5);
    const DefectSample cn = defect_cn(env, s, d, 0.5);
    // cancellation is exact up to round-off: each v evaluation carries an
    // absolute phase noise ~ |phase| * machine eps, amplified by the scheme's
    // 1/(tau sinc alpha) and 1/(h^2 psi) prefactors
    const double phase_mag = (std::abs(s.kappa) * 4.0 + 0.5 * s.kappa * s.kappa * 1.0) / s.epsilon;
    const double amp_time = s.epsilon / (2.0 * d.tau * std::abs(d.filters.sinc_alpha));
    const double amp_space = 0.5 * s.epsilon * s.epsilon * (2.0 + 2.0 * std::abs(d.filters.phi_beta)) /
                             (d.h * d.h * std::abs(d.filters.psi_beta));
    const double tol = 8.0 * phase_mag * 2.3e-16 * (amp_time + amp_space);
    CHECK(lf.max_norm < tol);
    CHECK(cn.max_norm < tol);
}

TEST_CASE("zero envelope gives zero defect") {
    PhysicalSetup s = gaussian_setup(1e-2);
    s.envelope = ConstantProfile{0.0};
    Envelope env(s);
    Discretization d = Discretization::direct(s, 0.05, 0.25);
    CHECK(defect_leapfrog(env, s, d, 0.5).max_norm == 0.0);
    CHECK(defect_cn(env, s, d, 0.5).max_norm == 0.0);
}

TEST_CASE("defect flags non-consistent meshes") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    Discretization d = Discretization::direct(s, 0.05, 0.25);
    CHECK_FALSE(defect_leapfrog(env, s, d, 0.5).consistency_flag);
    PlanRequest req;
    req.setup = s;
    req.rho_target = 0.35;
    const PlanResult p = plan(req);
    CHECK(defect_leapfrog(env, s, p.disc, 0.5).consistency_flag);
}

TEST_CASE("cn defect tracks the leapfrog defect on a consistent mesh") {
    PhysicalSetup s = gaussian_setup(1e-2);
    Envelope env(s);
    PlanRequest req;
    req.setup = s;
    req.rho_target = 0.35;
    req.target_M = 60;
    const PlanResult p = plan(req);
    const double dl = defect_leapfrog(env, s, p.disc, 0.5).max_norm;
    const double dc = defect_cn(env, s, p.disc, 0.5).max_norm;
    CHECK(dc < 10.0 * dl);
    CHECK(dl < 10.0 * dc);
}
