#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/errors.hpp"
#include "oscifd/filters.hpp"

namespace oscifd {

enum class Scheme { leapfrog, crank_nicolson };

/// Left-hand side of the first consistency relation, eps / tanc(alpha).
inline double consistency_alpha(double epsilon, double alpha) {
    return epsilon / eval_tanc(alpha);
}

/// Left-hand side of the second consistency relation, eps sinc(beta) / psi(beta).
inline double consistency_beta(double epsilon, double beta) {
    return epsilon * eval_sinc(beta) / eval_psi(beta);
}

struct PlanRequest {
    PhysicalSetup setup;
    double rho_target = 4.0;
    int alpha_branch = 1;   // start alpha near n pi
    int beta_branch = 1;    // start beta near kappa tau / (m eps)
    double theta_max = 0.9;
    int target_M = 0;       // 0 = no spatial-resolution request
    Scheme scheme = Scheme::crank_nicolson;

    void validate() const {
        setup.validate();
        if (rho_target == 0.0) throw ConfigError("rho_target must be nonzero");
        if (alpha_branch < 1) throw ConfigError("alpha_branch must be a positive integer");
        if (beta_branch < 1) throw ConfigError("beta_branch must be a positive integer");
        if (!(theta_max >= 0.0 && theta_max < 1.0)) throw ConfigError("theta_max must be in [0,1)");
        if (target_M < 0) throw ConfigError("target_M must be positive when given");
    }
};

/// Per-mode linear amplification data of the filtered leapfrog scheme.
struct StabilityReport {
    std::vector<double> mu;                      // mu_k over all discrete wavenumbers
    double mu_max = 0.0;
    double bound_value = 0.0;                    // (eps tau / h^2) |sinc a| (1+|phi|)/|psi|
    double eigen_moduli_max_deviation = 0.0;     // max_k | |lambda_k^+-| - 1 |
};

struct PlanResult {
    Discretization disc;
    double residual_alpha = 0.0;  // |eps/tanc(alpha) - rho_eff|
    double residual_beta = 0.0;   // |eps sinc(beta)/psi(beta) - rho_eff|
    StabilityReport stability;
    bool accepted = false;
};

/// Amplification factors mu_k and the eigenvalue moduli of the one-step
/// companion matrix, for every discrete wavenumber k = 2 pi j / L of the
/// M-point grid.
inline StabilityReport stability_report(const Discretization& disc, double epsilon) {
    if (disc.M < 2) throw ConfigError("stability_report needs M >= 2");
    StabilityReport rep;
    const FilterValues& f = disc.filters;
    const double pref = epsilon * disc.tau / (disc.h * disc.h) * f.sinc_alpha / f.psi_beta;
    rep.bound_value = std::abs(epsilon * disc.tau / (disc.h * disc.h) * f.sinc_alpha) *
                      (1.0 + std::abs(f.phi_beta)) / std::abs(f.psi_beta);
    rep.mu.reserve(disc.M);
    const int jlo = -(disc.M / 2);
    const int jhi = (disc.M + 1) / 2;
    for (int j = jlo; j < jhi; ++j) {
        // k h = 2 pi j / M regardless of the physical domain length
        const double kh = 2.0 * std::numbers::pi * static_cast<double>(j) / disc.M;
        const double mu = pref * (std::cos(kh) - f.phi_beta);
        rep.mu.push_back(mu);
        rep.mu_max = std::max(rep.mu_max, std::abs(mu));
        const std::complex<double> root = std::sqrt(std::complex<double>(1.0 - mu * mu, 0.0));
        const std::complex<double> imu(0.0, mu);
        rep.eigen_moduli_max_deviation =
            std::max({rep.eigen_moduli_max_deviation, std::abs(std::abs(imu + root) - 1.0),
                      std::abs(std::abs(imu - root) - 1.0)});
    }
    return rep;
}

namespace detail {

/// Solve t(a) = eps a cos a - rho sin a = 0 (equivalent to eps/tanc = rho,
/// pole-free) by bisection on the branch interval, then polish the residual
/// of eps/tanc(a) - rho over neighboring doubles.
inline double alpha_root(double epsilon, double rho, int n) {
    const double pi = std::numbers::pi;
    auto t = [&](double a) { return epsilon * a * std::cos(a) - rho * std::sin(a); };
    double lo = n * pi - 0.5 * pi + 1e-12;
    double hi = n * pi + 0.5 * pi - 1e-12;
    double flo = t(lo);
    double fhi = t(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        throw NoRootInBracket("alpha branch " + std::to_string(n) + " contains no sign change");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = t(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if (flo * fm < 0.0) { hi = mid; fhi = fm; }
        else { lo = mid; flo = fm; }
        if (hi - lo <= std::abs(mid) * std::numeric_limits<double>::epsilon()) break;
    }
    double alpha = 0.5 * (lo + hi);
    // Newton on r(a) = eps a / tan a - rho, safeguarded by the bracket
    for (int it = 0; it < 8; ++it) {
        const double ta = std::tan(alpha);
        if (ta == 0.0) break;
        const double r = epsilon * alpha / ta - rho;
        const double dr = epsilon * (1.0 / ta - alpha * (1.0 + ta * ta) / (ta * ta));
        if (dr == 0.0) break;
        const double next = alpha - r / dr;
        if (!(next > lo - 0.5 && next < hi + 0.5)) break;
        if (next == alpha) break;
        alpha = next;
    }
    // residual is ulp-granular near the root; take the best neighboring double
    double best = alpha;
    double best_res = std::abs(consistency_alpha(epsilon, alpha) - rho);
    for (int dir = -1; dir <= 1; dir += 2) {
        double x = alpha;
        for (int s = 0; s < 8; ++s) {
            x = std::nextafter(x, dir < 0 ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity());
            const double r = std::abs(consistency_alpha(epsilon, x) - rho);
            if (r < best_res) { best = x; best_res = r; }
        }
    }
    return best;
}

/// Change of eps/tanc per ulp of alpha near n pi; the achievable alpha residual
/// cannot beat this granularity.
inline double alpha_residual_granularity(double epsilon, double rho, int n) {
    const double a = n * std::numbers::pi;
    const double ulp = std::nextafter(a, std::numeric_limits<double>::infinity()) - a;
    return rho * rho / (epsilon * a) * ulp;
}

} // namespace detail

/// Solve eps / tanc(alpha) = rho for alpha in the branch interval around n pi.
inline double solve_alpha(double epsilon, double rho, int n) {
    if (!(epsilon > 0.0)) throw ConfigError("solve_alpha: epsilon must be positive");
    if (rho == 0.0) throw ConfigError("solve_alpha: rho must be nonzero");
    if (n < 1) throw ConfigError("solve_alpha: branch index n must be a positive integer");
    const double alpha = detail::alpha_root(epsilon, rho, n);
    if (std::abs(std::cos(alpha)) < 0.5) {
        throw CosineTooSmall("solve_alpha: |cos(alpha)| < 0.5 at the root; Crank-Nicolson divides by cos(alpha)");
    }
    return alpha;
}

/// Solve eps sinc(beta) / psi(beta) = rho by safeguarded root finding started
/// at beta_start, staying on the half-line of beta_start. The residual is
/// limited near the poles of the relation by the spacing of doubles; see
/// the granularity note on solve_alpha.
inline double solve_beta(double epsilon, double rho, double beta_start) {
    if (!(epsilon > 0.0)) throw ConfigError("solve_beta: epsilon must be positive");
    if (rho == 0.0) throw ConfigError("solve_beta: rho must be nonzero");
    if (beta_start == 0.0) throw ConfigError("solve_beta: beta_start must be nonzero");
    const double sign = beta_start > 0.0 ? 1.0 : -1.0;
    const double b0 = std::abs(beta_start);
    // F(b) = eps sinc(b) - rho psi(b) is entire; its zeros are exactly the
    // solutions of the consistency relation.
    auto F = [&](double b) { return epsilon * eval_sinc(sign * b) - rho * eval_psi(sign * b); };
    const double step = std::numbers::pi / 8.0;
    double lo = b0, hi = b0;
    double flo = F(b0), fhi = flo;
    bool bracketed = false;
    for (int ring = 0; ring < 2000 && !bracketed; ++ring) {
        const double lo2 = std::max(1e-8, lo - step);
        const double hi2 = hi + step;
        const double flo2 = F(lo2);
        const double fhi2 = F(hi2);
        if (flo2 == 0.0) { lo = hi = lo2; bracketed = true; break; }
        if (fhi2 == 0.0) { lo = hi = hi2; bracketed = true; break; }
        if (flo2 * flo < 0.0) { hi = lo; fhi = flo; lo = lo2; flo = flo2; bracketed = true; }
        else if (fhi2 * fhi < 0.0) { lo = hi; flo = fhi; hi = hi2; fhi = fhi2; bracketed = true; }
        else { lo = lo2; flo = flo2; hi = hi2; fhi = fhi2; }
    }
    if (!bracketed) throw NoConvergence("solve_beta: no sign change found near beta_start");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if (flo * fm < 0.0) { hi = mid; fhi = fm; }
        else { lo = mid; flo = fm; }
        if (hi - lo <= std::abs(mid) * std::numeric_limits<double>::epsilon()) break;
    }
    double beta = sign * 0.5 * (lo + hi);
    if (std::abs(eval_psi(beta)) < 1e-8) {
        throw PsiTooSmall("solve_beta: |psi(beta)| < 1e-8 at the root");
    }
    double best = beta;
    double best_res = std::abs(consistency_beta(epsilon, beta) - rho);
    for (int dir = -1; dir <= 1; dir += 2) {
        double x = beta;
        for (int s = 0; s < 8; ++s) {
            x = std::nextafter(x, dir < 0 ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity());
            const double r = std::abs(consistency_beta(epsilon, x) - rho);
            if (r < best_res) { best = x; best_res = r; }
        }
    }
    return best;
}

namespace detail {

struct MeshCandidate {
    int M = 0;
    double beta = 0.0;
    double rho_eff = 0.0;
};

inline bool candidate_ok(const PhysicalSetup& setup, int n, int M, MeshCandidate& out) {
    if (M < 2) return false;
    const double beta = setup.kappa * (setup.length() / M) / setup.epsilon;
    const double psival = eval_psi(beta);
    if (std::abs(psival) < 1e-300) return false;
    const double rho_eff = consistency_beta(setup.epsilon, beta);
    if (!std::isfinite(rho_eff) || rho_eff == 0.0) return false;
    // achievable alpha residual must stay below tolerance
    if (alpha_residual_granularity(setup.epsilon, rho_eff, n) > 0.75e-12 * std::abs(rho_eff)) return false;
    // keep |tan(alpha)| <= ~0.5 so cos(alpha) is comfortably away from 0
    if (std::abs(rho_eff) < 2.0 * setup.epsilon * n * std::numbers::pi) return false;
    out = MeshCandidate{M, beta, rho_eff};
    return true;
}

} // namespace detail

/// Plan a (2.5)-consistent mesh: solve for beta, snap to an integer grid,
/// recompute the effective rho from the realized mesh width, then solve for
/// alpha against that rho so the consistency relation holds exactly for the
/// discretization actually used. The realized final time N tau may differ
/// from the requested one by less than tau.
inline PlanResult plan(const PlanRequest& request) {
    request.validate();
    const PhysicalSetup& s = request.setup;
    const double L = s.length();
    const int n = request.alpha_branch;

    // (1) provisional beta from the requested branch (or resolution request)
    const double tau_prov = 2.0 * n * std::numbers::pi * s.epsilon / (s.kappa * s.kappa);
    const double beta_seed = (request.target_M > 0)
                                 ? s.kappa * (L / request.target_M) / s.epsilon
                                 : s.kappa * tau_prov / (request.beta_branch * s.epsilon);
    const double beta_hat = solve_beta(s.epsilon, request.rho_target, beta_seed);
    const double h_prov = beta_hat * s.epsilon / s.kappa;

    // (2) snap to an integer grid
    const int M0 = std::max(2, static_cast<int>(std::llround(L / h_prov)));
    detail::MeshCandidate chosen;
    bool have = false;
    if (request.target_M > 0) {
        // keep M within ~18% of the request, favoring rho_eff near the target
        const int mlo = std::max(2, static_cast<int>(std::llround(request.target_M * 0.82)));
        const int mhi = static_cast<int>(std::llround(request.target_M * 1.18));
        double best_score = std::numeric_limits<double>::infinity();
        for (int M = mlo; M <= mhi; ++M) {
            detail::MeshCandidate c;
            if (!detail::candidate_ok(s, n, M, c)) continue;
            const double score = std::abs(c.rho_eff - request.rho_target);
            if (score < best_score) { best_score = score; chosen = c; have = true; }
        }
    } else {
        for (int w = 0; w <= 8 && !have; ++w) {
            for (int M : {M0 + w, M0 - w}) {
                detail::MeshCandidate c;
                if (detail::candidate_ok(s, n, M, c)) { chosen = c; have = true; break; }
            }
        }
    }
    if (!have) throw NoConvergence("plan: no feasible integer grid near the requested resolution");

    // (3) effective rho of the realized mesh
    const double rho_eff = chosen.rho_eff;

    // (4) alpha against rho_eff
    const double alpha_hat = solve_alpha(s.epsilon, rho_eff, n);
    double tau = 2.0 * alpha_hat * s.epsilon / (s.kappa * s.kappa);

    // (5) snap N; prefer hitting final_time exactly when that preserves the
    // residual, otherwise keep the exact consistency root and adjust the
    // realized final time. N is kept even so the Crank-Nicolson two-step map
    // reaches the final time exactly.
    long N = 2 * std::max<long>(1, std::llround(s.final_time / (2.0 * tau)));
    const double tol = 1e-12;
    {
        const double tau_exact_T = s.final_time / static_cast<double>(N);
        const double alpha_try = s.kappa * s.kappa * tau_exact_T / (2.0 * s.epsilon);
        if (std::abs(consistency_alpha(s.epsilon, alpha_try) - rho_eff) <= tol * std::abs(rho_eff)) {
            tau = tau_exact_T;
        } else {
            // absorb the tau -> alpha storage round trip: pick the tau double
            // whose recomputed alpha minimizes the residual
            double best_tau = tau;
            double best_res = std::numeric_limits<double>::infinity();
            for (int dir = -1; dir <= 1; dir += 2) {
                double x = tau;
                for (int step = 0; step < 8; ++step) {
                    const double a = s.kappa * s.kappa * x / (2.0 * s.epsilon);
                    const double r = std::abs(consistency_alpha(s.epsilon, a) - rho_eff);
                    if (r < best_res) { best_res = r; best_tau = x; }
                    x = std::nextafter(x, dir < 0 ? -std::numeric_limits<double>::infinity()
                                                  : std::numeric_limits<double>::infinity());
                }
            }
            tau = best_tau;
        }
    }

    PlanResult result;
    Discretization& d = result.disc;
    d.M = chosen.M;
    d.N = N;
    d.h = L / chosen.M;
    d.tau = tau;
    d.alpha = s.kappa * s.kappa * tau / (2.0 * s.epsilon);
    d.beta = chosen.beta;
    d.filters = FilterValues::at(d.alpha, d.beta);
    d.rho_eff = rho_eff;
    d.consistent = true;
    d.theta_bound = request.theta_max;

    result.residual_alpha = std::abs(consistency_alpha(s.epsilon, d.alpha) - rho_eff);
    result.residual_beta = std::abs(consistency_beta(s.epsilon, d.beta) - rho_eff);

    // (6) stability data
    result.stability = stability_report(d, s.epsilon);
    const bool residuals_ok =
        result.residual_alpha <= tol * std::abs(rho_eff) && result.residual_beta <= tol * std::abs(rho_eff);
    if (request.scheme == Scheme::leapfrog && result.stability.bound_value > request.theta_max) {
        throw StabilityViolation(
            "plan: leapfrog stability bound " + std::to_string(result.stability.bound_value) +
            " exceeds theta_max " + std::to_string(request.theta_max) +
            "; decrease tau (smaller alpha branch) or coarsen the grid (larger beta branch)");
    }
    result.accepted = residuals_ok;
    return result;
}

} // namespace oscifd
