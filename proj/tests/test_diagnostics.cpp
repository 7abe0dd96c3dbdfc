#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oscifd/core.hpp"
#include "oscifd/diagnostics.hpp"

using namespace oscifd;
using std::numbers::pi;

namespace {

PhysicalSetup basic_setup() {
    PhysicalSetup s;
    s.epsilon = 0.5;
    s.kappa = 1.0;
    s.lambda = 1.3;
    s.domain_left = -4.0;
    s.domain_right = 4.0;
    s.final_time = 1.0;
    s.envelope = ConstantProfile{1.0};
    return s;
}

GridFunction random_grid(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction u;
    u.values.resize(n);
    for (Complex& v : u.values) v = Complex(dist(gen), dist(gen));
    return u;
}

} // namespace

TEST_CASE("discrete mass basics") {
    GridFunction z;
    z.values.assign(10, Complex(0.0, 0.0));
    CHECK(discrete_mass(z) == 0.0);
    GridFunction ones;
    const int M = 17;
    ones.values.assign(M, Complex(0.6, 0.8));  // unit modulus
    CHECK(discrete_mass(ones) == Catch::Approx(static_cast<double>(M)).epsilon(1e-14));
}

TEST_CASE("mass homogeneity and positivity") {
    const GridFunction u = random_grid(33, 3);
    GridFunction cu = u;
    const Complex c(1.7, -2.2);
    for (Complex& v : cu.values) v *= c;
    CHECK(discrete_mass(cu) == Catch::Approx(std::norm(c) * discrete_mass(u)).epsilon(1e-13));
    CHECK(discrete_mass(u) >= 0.0);
}

TEST_CASE("discrete energy of zero and constant states") {
    PhysicalSetup s = basic_setup();
    const Discretization d = Discretization::direct(s, 0.05, 0.25);
    GridFunction z;
    z.values.assign(d.M, Complex(0.0, 0.0));
    CHECK(discrete_energy(z, s, d) == 0.0);

    const Complex c(0.4, 0.9);
    GridFunction cc;
    cc.values.assign(d.M, c);
    const double expected = 0.5 * s.lambda * s.epsilon * d.M * std::norm(c) * std::norm(c) / d.filters.tanc_alpha;
    CHECK(discrete_energy(cc, s, d) == Catch::Approx(expected).epsilon(1e-13));
}

TEST_CASE("wiener norm of a pure discrete mode is its amplitude") {
    const int M = 40;
    GridFunction u;
    u.values.resize(M);
    for (int j = 0; j < M; ++j) {
        const double ang = 2.0 * pi * 3.0 * j / M;
        u.values[j] = Complex(std::cos(ang), std::sin(ang));
    }
    CHECK(wiener_norm(u) == Catch::Approx(1.0).epsilon(1e-13));
    GridFunction z;
    z.values.assign(M, Complex(0.0, 0.0));
    CHECK(wiener_norm(z) == 0.0);
}

TEST_CASE("wiener norm dominates the max norm") {
    for (unsigned seed = 0; seed < 100; ++seed) {
        const GridFunction u = random_grid(24, seed);
        CHECK(max_abs(u) <= wiener_norm(u) * (1.0 + 1e-12));
    }
}

TEST_CASE("wiener norm is a norm") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        const GridFunction u = random_grid(30, seed);
        const GridFunction v = random_grid(30, seed + 1000);
        GridFunction sum = u;
        for (int j = 0; j < 30; ++j) sum.values[j] += v.values[j];
        CHECK(wiener_norm(sum) <= wiener_norm(u) + wiener_norm(v) + 1e-12);
        GridFunction su = u;
        for (Complex& c : su.values) c *= Complex(0.0, -2.5);
        CHECK(wiener_norm(su) == Catch::Approx(2.5 * wiener_norm(u)).epsilon(1e-12));
    }
}

TEST_CASE("wiener norm is submultiplicative under pointwise products") {
    // band-limited pairs: the discrete product's coefficients are the cyclic
    // convolution, so Young's inequality applies exactly
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int M = 64;
    for (int trial = 0; trial < 20; ++trial) {
        GridFunction f, g;
        f.values.assign(M, Complex(0, 0));
        g.values.assign(M, Complex(0, 0));
        for (int mode = -5; mode <= 5; ++mode) {
            const Complex cf(dist(gen), dist(gen));
            const Complex cg(dist(gen), dist(gen));
            for (int j = 0; j < M; ++j) {
                const double ang = 2.0 * pi * mode * static_cast<double>(j) / M;
                const Complex e(std::cos(ang), std::sin(ang));
                f.values[j] += cf * e;
                g.values[j] += cg * e;
            }
        }
        GridFunction fg;
        fg.values.resize(M);
        for (int j = 0; j < M; ++j) fg.values[j] = f.values[j] * g.values[j];
        CHECK(wiener_norm(fg) <= wiener_norm(f) * wiener_norm(g) * (1.0 + 1e-10));
    }
}

TEST_CASE("max_error basics") {
    const GridFunction u = random_grid(16, 11);
    CHECK(max_error(u, u.values) == 0.0);
    GridFunction v = u;
    v.values[7] += Complex(0.0, 3e-4);
    CHECK(max_error(u, v.values) == Catch::Approx(3e-4).epsilon(1e-12));
}

TEST_CASE("max_error on node-aligned refinements and misaligned grids") {
    GridFunction coarse = random_grid(8, 2);
    GridFunction fine;
    fine.values.assign(24, Complex(0, 0));
    for (int j = 0; j < 8; ++j) fine.values[3 * j] = coarse.values[j];
    CHECK(max_error(coarse, fine) == 0.0);
    GridFunction bad;
    bad.values.assign(20, Complex(0, 0));
    CHECK_THROWS_AS(max_error(coarse, bad), GridMisaligned);
}

TEST_CASE("fit_order recovers exact power laws") {
    std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> e2, e0;
    for (double h : hs) {
        e2.push_back(3.7 * h * h);
        e0.push_back(0.123);
    }
    CHECK(fit_order(hs, e2) == Catch::Approx(2.0).margin(1e-12));
    CHECK(fit_order(hs, e0) == Catch::Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(fit_order({0.1, 0.1, 0.1}, {1.0, 1.0, 1.0}), DegenerateFit);
    CHECK_THROWS_AS(fit_order({0.1, 0.2}, {1.0, 2.0}), DegenerateFit);
}

TEST_CASE("conservation series tracks drifts") {
    ConservationSeries s;
    s.append(0.0, 2.0, -4.0);
    s.append(0.1, 2.0 + 2e-12, -4.0);
    s.append(0.2, 2.0, -4.0 * (1.0 + 3e-9));
    CHECK(s.rel_mass_drift == Catch::Approx(1e-12).epsilon(1e-3));
    CHECK(s.rel_energy_drift == Catch::Approx(3e-9).epsilon(1e-3));
}
