#pragma once

#include <atomic>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oscifd/config.hpp"
#include "oscifd/csv.hpp"
#include "oscifd/diagnostics.hpp"
#include "oscifd/modulation.hpp"
#include "oscifd/planner.hpp"
#include "oscifd/schemes.hpp"
#include "oscifd/spectral.hpp"

namespace oscifd {

// Exit-code contract of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitStabilityRejected = 2;
inline constexpr int kExitBlowUp = 3;

namespace detail {

inline int sweep_threads(std::size_t jobs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("OSCIFD_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Run fn(i) for i in [0, jobs) on a bounded pool; results must be written to
/// pre-sized slots so output order is deterministic.
template <typename Fn>
inline void parallel_for(std::size_t jobs, Fn&& fn) {
    const int nthreads = sweep_threads(jobs);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                fn(i);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace detail

/// Planner request derived from the experiment config, optionally retargeted
/// to the mesh width h (used by sweeps).
inline PlanRequest plan_request_for(const ExperimentConfig& cfg, std::optional<double> h = {}) {
    PlanRequest req;
    req.setup = cfg.setup;
    req.rho_target = cfg.rho;
    req.alpha_branch = cfg.alpha_branch;
    req.beta_branch = cfg.beta_branch;
    req.theta_max = cfg.theta_max;
    req.target_M = cfg.target_M;
    req.scheme = cfg.scheme == SchemeChoice::leapfrog ? Scheme::leapfrog : Scheme::crank_nicolson;
    if (h) {
        req.target_M = std::max(2, static_cast<int>(std::llround(cfg.setup.length() / *h)));
        if (cfg.alpha_branch_rule == AlphaBranchRule::scale_with_h) {
            const double tau_want = cfg.tau_over_h * (*h);
            const double tau_unit = 2.0 * std::numbers::pi * cfg.setup.epsilon / (cfg.setup.kappa * cfg.setup.kappa);
            req.alpha_branch = std::max(1, static_cast<int>(std::llround(tau_want / tau_unit)));
        }
    }
    return req;
}

/// Discretization for one run, in either mode. When h is given in direct mode
/// the sweep rule tau = tau_coeff * h^tau_power overrides the fixed tau.
inline Discretization make_discretization(const ExperimentConfig& cfg, std::optional<double> h = {},
                                          PlanResult* plan_out = nullptr) {
    if (cfg.mode == DiscretizationMode::direct) {
        const double hh = h.value_or(cfg.h);
        if (!(hh > 0.0)) throw ConfigError("direct mode needs a positive h");
        double tt = cfg.tau;
        if (h && cfg.tau_coeff > 0.0) tt = cfg.tau_coeff * std::pow(hh, cfg.tau_power);
        if (!(tt > 0.0)) throw ConfigError("direct mode needs a positive tau");
        return Discretization::direct(cfg.setup, tt, hh);
    }
    PlanResult res = plan(plan_request_for(cfg, h));
    if (plan_out) *plan_out = res;
    return res.disc;
}

inline RunOptions run_options(const ExperimentConfig& cfg) {
    RunOptions opts;
    opts.bootstrap_mode = cfg.bootstrap_mode;
    opts.cn = cfg.cn;
    opts.cn_advance = cfg.cn_advance;
    opts.blowup_ceiling_factor = cfg.blowup_ceiling;
    return opts;
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

struct PlanCommandResult {
    std::string report;
    int exit_code = kExitOk;
};

inline PlanCommandResult cmd_plan(const ExperimentConfig& cfg) {
    std::ostringstream os;
    PlanCommandResult out;
    if (cfg.mode == DiscretizationMode::direct) {
        const Discretization d = make_discretization(cfg);
        const StabilityReport rep = stability_report(d, cfg.setup.epsilon);
        os << "direct discretization (no consistency relation)\n";
        os << "  M = " << d.M << "  N = " << d.N << "\n";
        os << "  h = " << CsvWriter::format(d.h) << "  tau = " << CsvWriter::format(d.tau) << "\n";
        os << "  alpha = " << CsvWriter::format(d.alpha) << "  beta = " << CsvWriter::format(d.beta) << "\n";
        os << "  sinc(alpha) = " << CsvWriter::format(d.filters.sinc_alpha)
           << "  tanc(alpha) = " << CsvWriter::format(d.filters.tanc_alpha) << "\n";
        os << "  phi(beta) = " << CsvWriter::format(d.filters.phi_beta)
           << "  psi(beta) = " << CsvWriter::format(d.filters.psi_beta) << "\n";
        os << "  mu_max = " << CsvWriter::format(rep.mu_max)
           << "  bound_value = " << CsvWriter::format(rep.bound_value) << "\n";
        out.report = os.str();
        out.exit_code = kExitOk;
        return out;
    }
    try {
        PlanResult res;
        const Discretization d = make_discretization(cfg, {}, &res);
        os << "consistency-planned discretization\n";
        os << "  alpha = " << CsvWriter::format(d.alpha) << "  beta = " << CsvWriter::format(d.beta) << "\n";
        os << "  tau = " << CsvWriter::format(d.tau) << "  h = " << CsvWriter::format(d.h) << "\n";
        os << "  M = " << d.M << "  N = " << d.N
           << "  realized final time = " << CsvWriter::format(d.realized_final_time()) << "\n";
        os << "  rho_eff = " << CsvWriter::format(d.rho_eff) << "\n";
        os << "  residual_alpha = " << CsvWriter::format(res.residual_alpha)
           << "  residual_beta = " << CsvWriter::format(res.residual_beta) << "\n";
        os << "  mu_max = " << CsvWriter::format(res.stability.mu_max)
           << "  bound_value = " << CsvWriter::format(res.stability.bound_value) << "\n";
        os << "  accepted = " << (res.accepted ? "yes" : "no") << "\n";
        out.exit_code = res.accepted ? kExitOk : kExitError;
    } catch (const StabilityViolation& e) {
        os << "stability rejection: " << e.what() << "\n";
        out.exit_code = kExitStabilityRejected;
    }
    out.report = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunCommandResult {
    int exit_code = kExitOk;
    long blowup_step = -1;
    double realized_final_time = 0.0;
};

inline RunCommandResult cmd_run(const ExperimentConfig& cfg, std::ostream& csv_out) {
    const Scheme scheme = cfg.single_scheme();
    const Discretization d = make_discretization(cfg);
    GridFunction u0 = sample_initial_data(cfg.setup, d);
    const RunResult res = run(scheme, u0, cfg.setup, d, run_options(cfg));
    CsvWriter csv(csv_out);
    csv.row({"x", "re_u", "im_u", "abs_u"});
    for (int j = 0; j < d.M; ++j) {
        const Complex v = res.final_state.values[j];
        csv.row({CsvWriter::format(node(cfg.setup, d, j)), CsvWriter::format(v.real()),
                 CsvWriter::format(v.imag()), CsvWriter::format(std::abs(v))});
    }
    RunCommandResult out;
    out.blowup_step = res.blowup_step;
    out.realized_final_time = res.final_state.time_label;
    out.exit_code = res.blew_up() ? kExitBlowUp : kExitOk;
    return out;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

struct ConvergePoint {
    double h = 0.0;
    double tau = 0.0;
    int M = 0;
    long N = 0;
    double err_vs_reference = -1.0;     // < 0 -> unavailable
    double err_vs_dominant = -1.0;
    std::string error;                  // nonempty when the run failed
};

struct ConvergeResult {
    std::vector<ConvergePoint> points;
    double order_vs_reference = std::numeric_limits<double>::quiet_NaN();
    double order_vs_dominant = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline long lcm_long(long a, long b) {
    return a / std::gcd(a, b) * b;
}

} // namespace detail

inline ConvergeResult converge(const ExperimentConfig& cfg, const std::vector<double>& h_list) {
    const Scheme scheme = cfg.single_scheme();
    ConvergeResult result;
    result.points.resize(h_list.size());

    // discretizations first; the reference grid must subsample onto each mesh
    std::vector<std::optional<Discretization>> discs(h_list.size());
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        ConvergePoint& pt = result.points[i];
        pt.h = h_list[i];
        try {
            discs[i] = make_discretization(cfg, h_list[i]);
            pt.h = discs[i]->h;
            pt.tau = discs[i]->tau;
            pt.M = discs[i]->M;
            pt.N = discs[i]->N;
        } catch (const Error& e) {
            pt.error = e.what();
        }
    }

    GridFunction reference;
    bool have_reference = false;
    if (cfg.reference_enabled) {
        long lcm = 1;
        for (const auto& d : discs)
            if (d) lcm = detail::lcm_long(lcm, d->M);
        const long m_ref = lcm * cfg.m_ref_multiple;
        if (m_ref > 2'000'000) throw ConfigError("reference grid would need " + std::to_string(m_ref) +
                                                 " points; disable the reference for this sweep");
        Discretization dref;
        dref.M = static_cast<int>(m_ref);
        dref.h = cfg.setup.length() / static_cast<double>(m_ref);
        GridFunction u0 = sample_initial_data(cfg.setup, dref);
        reference = run_reference(u0, cfg.setup, cfg.tau_ref, cfg.setup.final_time);
        have_reference = true;
    }

    Envelope env(cfg.setup);
    detail::parallel_for(h_list.size(), [&](std::size_t i) {
        ConvergePoint& pt = result.points[i];
        if (!discs[i]) return;
        const Discretization& d = *discs[i];
        try {
            GridFunction u0 = sample_initial_data(cfg.setup, d);
            const RunResult res = run(scheme, u0, cfg.setup, d, run_options(cfg));
            if (res.blew_up()) {
                pt.error = "blow-up at step " + std::to_string(res.blowup_step);
                return;
            }
            const double t_final = res.final_state.time_label;
            if (have_reference) {
                // the reference is computed at the requested final time; the
                // realized time of a planned mesh may differ by < tau, which is
                // part of the measured error and reported as-is
                pt.err_vs_reference = max_error(res.final_state, reference);
            }
            GridFunction v = sample_dominant_term(env, cfg.setup, d, t_final);
            pt.err_vs_dominant = max_error(res.final_state, v.values);
        } catch (const Error& e) {
            pt.error = e.what();
        }
    });

    auto fit = [&](auto getter) {
        std::vector<double> hs, errs;
        for (const ConvergePoint& pt : result.points) {
            const double e = getter(pt);
            if (pt.error.empty() && e > 0.0) {
                hs.push_back(pt.h);
                errs.push_back(e);
            }
        }
        if (hs.size() < 3) return std::numeric_limits<double>::quiet_NaN();
        try {
            return fit_order(hs, errs);
        } catch (const DegenerateFit&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    result.order_vs_reference = fit([](const ConvergePoint& p) { return p.err_vs_reference; });
    result.order_vs_dominant = fit([](const ConvergePoint& p) { return p.err_vs_dominant; });
    return result;
}

inline void write_converge_csv(const ConvergeResult& result, std::ostream& out) {
    CsvWriter csv(out);
    csv.row({"h", "tau", "M", "N", "err_vs_reference", "err_vs_dominant_term", "error"});
    for (const ConvergePoint& pt : result.points) {
        csv.row({CsvWriter::format(pt.h), CsvWriter::format(pt.tau), std::to_string(pt.M), std::to_string(pt.N),
                 pt.err_vs_reference >= 0.0 ? CsvWriter::format(pt.err_vs_reference) : "",
                 pt.err_vs_dominant >= 0.0 ? CsvWriter::format(pt.err_vs_dominant) : "",
                 CsvWriter::quote(pt.error)});
    }
    if (!std::isnan(result.order_vs_reference)) {
        csv.row({"fit_order_vs_reference", CsvWriter::format(result.order_vs_reference), "", "", "", "", ""});
    }
    if (!std::isnan(result.order_vs_dominant)) {
        csv.row({"fit_order_vs_dominant_term", CsvWriter::format(result.order_vs_dominant), "", "", "", "", ""});
    }
}

// ---------------------------------------------------------------------------
// conserve
// ---------------------------------------------------------------------------

struct ConserveResult {
    ConservationSeries series;
    long blowup_step = -1;
    double blowup_time = 0.0;
    int exit_code = kExitOk;
};

inline ConserveResult conserve(const ExperimentConfig& cfg, Scheme scheme) {
    ConserveResult out;
    const Discretization d = make_discretization(cfg);
    // the conserved energy belongs to the map actually iterated: the halved
    // filters for the one-step Crank-Nicolson form, the full ones otherwise
    const bool one_step_cn =
        scheme == Scheme::crank_nicolson &&
        (cfg.cn_advance == CnAdvance::one_step || (cfg.cn_advance == CnAdvance::automatic && !d.consistent));
    const Discretization d_energy = one_step_cn ? d.halved() : d;
    GridFunction u0 = sample_initial_data(cfg.setup, d);
    RunOptions opts = run_options(cfg);
    const long stride = cfg.stride;
    opts.observer = [&](long step, const GridFunction& u) {
        if (step % stride != 0 && step != d.N) return;
        out.series.append(u.time_label, discrete_mass(u), discrete_energy(u, cfg.setup, d_energy));
    };
    const RunResult res = run(scheme, u0, cfg.setup, d, opts);
    if (res.blew_up()) {
        out.blowup_step = res.blowup_step;
        out.blowup_time = static_cast<double>(res.blowup_step) * d.tau;
        out.exit_code = kExitBlowUp;
    }
    return out;
}

inline void write_conserve_csv(const ConserveResult& result, std::ostream& out) {
    CsvWriter csv(out);
    csv.row({"t", "mass", "energy", "rel_mass_drift", "rel_energy_drift"});
    const ConservationSeries& s = result.series;
    double m0 = s.mass.empty() ? 0.0 : s.mass.front();
    double e0 = s.energy.empty() ? 0.0 : s.energy.front();
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double md = (m0 != 0.0) ? std::abs(s.mass[i] - m0) / std::abs(m0) : 0.0;
        const double ed = (e0 != 0.0) ? std::abs(s.energy[i] - e0) / std::abs(e0) : 0.0;
        csv.row({CsvWriter::format(s.times[i]), CsvWriter::format(s.mass[i]), CsvWriter::format(s.energy[i]),
                 CsvWriter::format(md), CsvWriter::format(ed)});
    }
    if (result.blowup_step >= 0) {
        csv.row({"blowup_time", CsvWriter::format(result.blowup_time), "", "", ""});
    }
}

// ---------------------------------------------------------------------------
// defect
// ---------------------------------------------------------------------------

struct DefectPoint {
    double tau = 0.0;
    double h = 0.0;
    double defect_max = 0.0;
    double defect_wiener = 0.0;
    std::string error;
};

inline std::vector<DefectPoint> defect_sweep(const ExperimentConfig& cfg, const std::vector<double>& h_list) {
    if (cfg.mode != DiscretizationMode::planner) {
        throw ConfigError("the defect sweep needs planner mode (consistent meshes)");
    }
    const Scheme scheme = cfg.single_scheme();
    // the defect needs a consistent mesh but never iterates the scheme, so the
    // leapfrog stability gate does not apply to the planning here
    ExperimentConfig mesh_cfg = cfg;
    mesh_cfg.scheme = SchemeChoice::crank_nicolson;
    std::vector<DefectPoint> points(h_list.size());
    Envelope env(cfg.setup);
    detail::parallel_for(h_list.size(), [&](std::size_t i) {
        DefectPoint& pt = points[i];
        try {
            const Discretization d = make_discretization(mesh_cfg, h_list[i]);
            pt.tau = d.tau;
            pt.h = d.h;
            const double t_half = 0.5 * cfg.setup.final_time;
            const DefectSample sample = (scheme == Scheme::leapfrog)
                                            ? defect_leapfrog(env, cfg.setup, d, t_half)
                                            : defect_cn(env, cfg.setup, d, t_half);
            pt.defect_max = sample.max_norm;
            pt.defect_wiener = sample.wiener_norm;
        } catch (const Error& e) {
            pt.error = e.what();
        }
    });
    return points;
}

inline void write_defect_csv(const std::vector<DefectPoint>& points, std::ostream& out) {
    CsvWriter csv(out);
    csv.row({"tau", "h", "defect_max", "defect_wiener", "error"});
    for (const DefectPoint& pt : points) {
        csv.row({CsvWriter::format(pt.tau), CsvWriter::format(pt.h), CsvWriter::format(pt.defect_max),
                 CsvWriter::format(pt.defect_wiener), CsvWriter::quote(pt.error)});
    }
}

} // namespace oscifd
