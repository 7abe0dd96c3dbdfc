#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "oscifd/filters.hpp"

using namespace oscifd;
using std::numbers::pi;

namespace {

// Taylor oracles, independent of the implementation branches.
double sinc_series(double z) {
    const double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
}

double phi_series(double z) {
    // phi(z) = 1 - z^4/120 + z^6/2520 - ...
    const double z4 = z * z * z * z;
    return 1.0 - z4 / 120.0 + z4 * z * z / 2520.0;
}

double psi_series(double z) {
    const double z2 = z * z;
    return 1.0 + z2 * (-0.1 + z2 * (1.0 / 280.0 + z2 * (-1.0 / 15120.0 + z2 / 1330560.0)));
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> zs(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) zs[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    return zs;
}

} // namespace

TEST_CASE("sinc at special points") {
    CHECK(eval_sinc(0.0) == 1.0);
    CHECK(std::abs(eval_sinc(pi)) < 1e-15);
    CHECK(eval_sinc(pi / 2) == Catch::Approx(2.0 / pi).epsilon(1e-14));
}

TEST_CASE("tanc at special points and pole") {
    CHECK(eval_tanc(0.0) == 1.0);
    CHECK(eval_tanc(pi / 4) == Catch::Approx(4.0 / pi).epsilon(1e-14));
    CHECK_THROWS_AS(eval_tanc(pi / 2), PoleError);
}

TEST_CASE("phi at special points") {
    CHECK(eval_phi(0.0) == 1.0);
    CHECK(eval_phi(pi) == Catch::Approx(0.5).margin(1e-15));
    // series oracle near zero: phi(0.1) = 1 - 1e-4/120 + O(1e-8)
    CHECK(eval_phi(0.1) == Catch::Approx(phi_series(0.1)).margin(1e-14));
}

TEST_CASE("psi at special points") {
    CHECK(eval_psi(0.0) == 1.0);
    CHECK(eval_psi(pi) == Catch::Approx(3.0 / (pi * pi)).epsilon(1e-13));
    CHECK(eval_psi(0.01) == Catch::Approx(psi_series(0.01)).margin(1e-15));
}

TEST_CASE("series and direct branches agree at the crossovers") {
    // straddle each threshold with a fine log grid
    for (double z : log_spaced(kSincSeriesThreshold / 10, kSincSeriesThreshold * 10, 101)) {
        CHECK(std::abs(eval_sinc(z) - sinc_series(z)) < 1e-12);
        CHECK(std::abs(eval_tanc(z) - (1.0 + z * z / 3.0 + 2.0 * std::pow(z, 4) / 15.0)) < 1e-12);
    }
    for (double z : log_spaced(kPsiSeriesThreshold / 10, kPsiSeriesThreshold * 3, 101)) {
        CHECK(std::abs(eval_psi(z) - psi_series(z)) < 1e-12);
    }
}

TEST_CASE("defining identity of psi") {
    // phi(z) - cos z = psi(z) z^2/2, relative to the scale of the terms (the
    // literal difference drowns in rounding below z ~ 0.1)
    for (double z : log_spaced(1e-6, 10.0, 500)) {
        const double lhs = eval_phi(z) - std::cos(z);
        const double rhs = eval_psi(z) * z * z / 2.0;
        const double scale = std::max({std::abs(eval_phi(z)), std::abs(std::cos(z)), std::abs(rhs)});
        CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
        if (z >= kPsiSeriesThreshold) {
            // away from the cancellation region the identity holds relative to
            // the difference itself
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        }
    }
}

TEST_CASE("filters are even functions") {
    for (double z : {1e-5, 1e-3, 0.05, 0.3, 1.0, 2.7, 9.9}) {
        CHECK(eval_sinc(-z) == eval_sinc(z));
        CHECK(eval_tanc(-z) == eval_tanc(z));
        CHECK(eval_phi(-z) == eval_phi(z));
        CHECK(eval_psi(-z) == eval_psi(z));
    }
}

TEST_CASE("|sinc| bounded by one") {
    for (double z : log_spaced(1e-8, 50.0, 400)) {
        CHECK(std::abs(eval_sinc(z)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("FilterValues caches the identity") {
    const FilterValues f = FilterValues::at(0.7, 2.3);
    CHECK(f.phi_beta - f.cos_beta == Catch::Approx(f.psi_beta * 2.3 * 2.3 / 2.0).epsilon(1e-13));
    CHECK(f.sinc_alpha == eval_sinc(0.7));
    CHECK(f.tanc_alpha == eval_tanc(0.7));
}
