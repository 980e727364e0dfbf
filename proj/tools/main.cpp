#include <chrono>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "effsim/harness.hpp"

namespace {

using namespace effsim;

struct CliOptions {
    std::string config;
    std::string out;
    std::string subcommand;
    long long seed = -1;
    int threads = -1;
    bool quiet = false;
};

constexpr const char* kCommonKeys =
    "Common keys: kind (required, must match the subcommand), out, seed,\n"
    "threads (0 uses EFFSIM_THREADS, then the hardware count), tol, tau.\n"
    "Lists are comma separated; '#' starts a comment.";

void add_shared_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config, "Path to a key = value config file")
        ->required();
    cmd->add_option("--out", opt.out, "Output CSV path (overrides the config's out key)");
    cmd->add_option("--seed", opt.seed, "Seed override for the run");
    cmd->add_option("--threads", opt.threads,
                    "Worker thread override; without it the config, then EFFSIM_THREADS, "
                    "then the hardware count decide");
    cmd->add_flag("--quiet", opt.quiet, "Suppress progress output on stderr");
    cmd->callback([cmd, &opt] { opt.subcommand = cmd->get_name(); });
}

std::string resolve_out(const CliOptions& opt, const std::string& config_out,
                        const std::string& fallback) {
    if (!opt.out.empty()) return opt.out;
    if (!config_out.empty()) return config_out;
    return fallback;
}

int run_sweep_command(const CliOptions& opt) {
    ExperimentConfig cfg = load_config(opt.config);
    if (to_string(cfg.kind) != opt.subcommand)
        throw std::invalid_argument("config kind '" + to_string(cfg.kind) +
                                    "' does not match subcommand '" + opt.subcommand + "'");
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.threads >= 0) cfg.threads = opt.threads;

    const std::string path = resolve_out(opt, cfg.out, to_string(cfg.kind) + ".csv");
    const auto start = std::chrono::steady_clock::now();

    if (cfg.kind == ExperimentKind::Bounds) {
        const auto rows = run_bounds(cfg);
        write_results(rows, path);
        if (!opt.quiet)
            std::cerr << "bounds: wrote " << rows.size() << " rows to " << path << "\n";
        return 0;
    }
    if (cfg.kind == ExperimentKind::FtOverhead) {
        const auto result = run_ft(cfg);
        write_results(result, cfg.ft, path);
        if (!opt.quiet)
            std::cerr << "ft-overhead: xi_l=" << result.xi_l
                      << " required_l=" << result.required_l << ", wrote " << path << "\n";
        return 0;
    }

    const auto rows = run_experiment(cfg);
    write_results(rows, cfg.kind, path);
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    if (!opt.quiet) {
        std::cerr << to_string(cfg.kind) << ": wrote " << rows.size() << " rows to " << path
                  << " in " << elapsed << " ms\n";
        if (cfg.kind == ExperimentKind::Validate) {
            double worst = 0.0;
            for (const auto& row : rows) worst = std::max(worst, row.abs_error);
            std::cerr << "validate: max deviation " << worst << "\n";
        }
    }
    return 0;
}

int run_fit_command(const CliOptions& opt) {
    const FitConfig cfg = load_fit_config(opt.config);
    const auto rows = read_results(cfg.input);
    const FitResult fit = run_fit(cfg, rows);
    const std::string path = resolve_out(opt, cfg.out, "fit.csv");
    write_results(fit, path);
    if (!opt.quiet)
        std::cerr << "fit: slope=" << fit.slope << " r_squared=" << fit.r_squared
                  << " points=" << fit.points << ", wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Sweep driver for the fermion-chain simulation mappings.\n"
        "Every subcommand reads a flat key = value config and writes CSV."};
    app.require_subcommand(1);
    CliOptions opt;

    add_shared_options(
        app.add_subcommand(
               "validate",
               std::string("Compare the covariance engine against the dense oracle.\n"
                           "Keys: N (list, each <= 6), h, g, tau.\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "trotter-sweep",
               std::string("Product-formula sweep over sizes, step counts, and noise.\n"
                           "Keys: N (list), T (list), p_order, noise (list), h, g, tau,\n"
                           "periodic, placement (all-modes | touched-modes).\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "floquet-sweep",
               std::string("Stroboscopic-drive sweep over sizes, windows, and noise.\n"
                           "Keys: N (list), uptau (list), p_order (0 or 1), noise (list),\n"
                           "h0, h1, g0, g1, tau, periodic. p_order 1 needs h0 = 0, g0 = 0.\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "sw-sweep",
               std::string("Projected weak-coupling sweep over sizes, couplings, noise.\n"
                           "Keys: N (list, even, >= 4), uptau (list), p_order (0 or 1),\n"
                           "noise (list), tau.\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "bounds",
               std::string("Evaluate the rigorous error-versus-noise tradeoff curves.\n"
                           "Keys: mapping (trotter | floquet-magnus | schrieffer-wolff),\n"
                           "p_order, noise (list), d, tau, c_map, c_noise.\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "ft-overhead",
               std::string("Concatenated-code overhead for a target accuracy.\n"
                           "Keys: xi0, xi_th, code_t, levels, delta, tau, d, p_order,\n"
                           "c_map, c_noise.\n") +
                   kCommonKeys),
        opt);
    add_shared_options(
        app.add_subcommand(
               "fit",
               "Least-squares power-law fit over a results CSV.\n"
               "Keys: input (required), x_column, y_column, out, and optional\n"
               "filter_experiment, filter_N, filter_p, filter_noise."),
        opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (opt.subcommand == "fit") return run_fit_command(opt);
        return run_sweep_command(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
