// Experiment driver for the filtered finite difference solvers.
//
// Subcommands: plan | run | converge | conserve | defect
// Exit codes: 0 success, 1 solver/config error, 2 stability rejection,
//             3 blow-up detected.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscifd/experiments.hpp"

namespace {

std::vector<double> parse_h_list(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw oscifd::ConfigError("--h-list is empty");
    return out;
}

/// Stream sink: --output path or stdout.
struct OutputSink {
    std::ofstream file;
    std::ostream* stream = &std::cout;

    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file.open(path, std::ios::binary);
            if (!file) throw oscifd::ConfigError("cannot open output file: " + path);
            stream = &file;
        }
    }
};

std::string scheme_suffix(oscifd::Scheme s) {
    return s == oscifd::Scheme::leapfrog ? "leapfrog" : "crank_nicolson";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"filtered finite difference experiments for the semiclassical NLS"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string output_path;
    std::string h_list_spec;
    bool quiet = false;
    app.add_option("--config", config_path, "TOML experiment configuration")->required();
    app.add_option("--output", output_path, "output CSV path (default: stdout)");
    app.add_option("--h-list", h_list_spec, "comma-separated mesh widths for sweeps");
    app.add_flag("--quiet", quiet, "suppress informational messages");

    auto* cmd_plan = app.add_subcommand("plan", "solve the consistency relation and report the mesh");
    auto* cmd_run = app.add_subcommand("run", "advance the configured scheme and write the final state");
    auto* cmd_converge = app.add_subcommand("converge", "error sweep over --h-list");
    auto* cmd_conserve = app.add_subcommand("conserve", "mass/energy time series");
    auto* cmd_defect = app.add_subcommand("defect", "dominant-term defect sweep over --h-list");

    CLI11_PARSE(app, argc, argv);

    try {
        const oscifd::ExperimentConfig cfg = oscifd::load_config_file(config_path);
        if (!quiet) {
            oscifd::Discretization probe;
            // surface the initial-data periodicity warning for any command that samples it
            try {
                probe = oscifd::Discretization::direct(cfg.setup, cfg.setup.final_time,
                                                       cfg.setup.length() / 16.0);
                oscifd::SampleDiagnostics diag;
                oscifd::sample_initial_data(cfg.setup, probe, &diag);
                if (diag.periodicity_warning) std::cerr << "warning: " << diag.message << "\n";
            } catch (const oscifd::Error&) {
            }
        }

        if (cmd_plan->parsed()) {
            const oscifd::PlanCommandResult res = oscifd::cmd_plan(cfg);
            OutputSink sink(output_path);
            *sink.stream << res.report;
            return res.exit_code;
        }

        if (cmd_run->parsed()) {
            OutputSink sink(output_path);
            const oscifd::RunCommandResult res = oscifd::cmd_run(cfg, *sink.stream);
            if (!quiet) {
                std::cerr << "run finished at t = " << res.realized_final_time;
                if (res.blowup_step >= 0) std::cerr << " (blow-up at step " << res.blowup_step << ")";
                std::cerr << "\n";
            }
            return res.exit_code;
        }

        if (cmd_converge->parsed()) {
            const std::vector<double> hs = parse_h_list(h_list_spec);
            const oscifd::ConvergeResult res = oscifd::converge(cfg, hs);
            OutputSink sink(output_path);
            oscifd::write_converge_csv(res, *sink.stream);
            return oscifd::kExitOk;
        }

        if (cmd_conserve->parsed()) {
            if (cfg.scheme == oscifd::SchemeChoice::both) {
                if (output_path.empty()) {
                    throw oscifd::ConfigError("scheme 'both' needs --output; two files are written");
                }
                int code = oscifd::kExitOk;
                for (oscifd::Scheme s : {oscifd::Scheme::leapfrog, oscifd::Scheme::crank_nicolson}) {
                    const oscifd::ConserveResult res = oscifd::conserve(cfg, s);
                    OutputSink sink(output_path + "." + scheme_suffix(s) + ".csv");
                    oscifd::write_conserve_csv(res, *sink.stream);
                    if (res.exit_code != oscifd::kExitOk) code = res.exit_code;
                }
                return code;
            }
            const oscifd::ConserveResult res = oscifd::conserve(cfg, cfg.single_scheme());
            OutputSink sink(output_path);
            oscifd::write_conserve_csv(res, *sink.stream);
            return res.exit_code;
        }

        if (cmd_defect->parsed()) {
            const std::vector<double> hs = parse_h_list(h_list_spec);
            const auto points = oscifd::defect_sweep(cfg, hs);
            OutputSink sink(output_path);
            oscifd::write_defect_csv(points, *sink.stream);
            return oscifd::kExitOk;
        }
    } catch (const oscifd::StabilityViolation& e) {
        std::cerr << "stability rejection: " << e.what() << "\n";
        return oscifd::kExitStabilityRejected;
    } catch (const oscifd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oscifd::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oscifd::kExitError;
    }
    return oscifd::kExitError;
}
