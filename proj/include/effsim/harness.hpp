#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effsim/bounds.hpp"
#include "effsim/trotter.hpp"

namespace effsim {

enum class ExperimentKind { Validate, TrotterSweep, FloquetSweep, SwSweep, Bounds, FtOverhead };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Validate;
    double h = 1.0;
    double g = 0.5;
    double h0 = 1.0;
    double h1 = 0.5;
    double g0 = 1.0;
    double g1 = 0.5;
    double tau = 1.0;
    std::vector<int> sizes;
    std::vector<int> steps;
    std::vector<double> windows;
    std::vector<double> noises{0.0};
    int p = 2;
    bool periodic = false;
    NoisePlacement placement = NoisePlacement::PerLayerAllModes;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    MappingKind mapping = MappingKind::Trotter;
    int d = 1;
    BoundConstants constants;
    FTParams ft;
};

// Strict line-oriented `key = value` text: `#` starts a comment, lists are
// comma separated, unknown or repeated keys are errors, and every diagnostic
// names the offending key and line. Defaults follow the chain demos
// (h = 1.0, g = 0.5, h0 = g0 = 1, h1 = g1 = 0.5, tau = 1.0).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

struct SweepRow {
    std::string experiment;
    std::string mode;  // validate rows: exact | discrete | continuous
    int N = 0;
    double control = 0.0;  // step count T or window uptau
    int p = 0;
    double noise = 0.0;
    double observable_sim = 0.0;
    double observable_target = 0.0;
    double abs_error = 0.0;
    double t_sim = 0.0;
    double wall_time_ms = 0.0;  // in-memory diagnostic, never written to CSV
};

// Evaluates the full grid of the four sweep kinds, possibly across threads
// (cfg.threads, else the EFFSIM_THREADS variable, else the hardware count);
// results land in a canonical sort order independent of scheduling. Engine
// failures abort the run with the grid point named. The bounds kinds have
// no grid rows and are served by run_bounds / run_ft instead.
std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg);

std::vector<TradeoffResult> run_bounds(const ExperimentConfig& cfg);
FTOverhead run_ft(const ExperimentConfig& cfg);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
    std::string x_name;
    std::string y_name;
};

// Least squares on (log x, log y) over the retained rows. Columns: N, T,
// uptau, control, p, noise, observable_sim, observable_target, abs_error,
// t_sim. Needs at least 4 retained points, all positive.
FitResult fit_power_law(const std::vector<SweepRow>& rows, const std::string& x_column,
                        const std::string& y_column,
                        const std::function<bool(const SweepRow&)>& filter = {});

// CSV with `\n` line ends and doubles in scientific notation with 12
// significant digits; byte output is deterministic for identical inputs, so
// the wall-time diagnostic stays out of the file. Sweep columns:
//   validate:       experiment,N,mode,noise,observable_sim,observable_target,abs_error,t_sim
//   trotter-sweep:  experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim
//   floquet-sweep,
//   sw-sweep:       experiment,N,uptau,p,noise,observable_sim,observable_target,abs_error,t_sim
void write_results(const std::vector<SweepRow>& rows, ExperimentKind kind,
                   const std::string& path);
// Columns: experiment,mapping,p,d,tau,noise,control,alpha_exponent,error_bound,t_sim_bound.
void write_results(const std::vector<TradeoffResult>& rows, const std::string& path);
// Columns: experiment,xi0,xi_th,code_t,levels,delta,xi_l,optimal_t,total_error,required_l.
void write_results(const FTOverhead& row, const FTParams& params, const std::string& path);
// Columns: x_column,y_column,slope,intercept,r_squared,points.
void write_results(const FitResult& fit, const std::string& path);

// Reads back any of the sweep schemas above.
std::vector<SweepRow> read_results(const std::string& path);

struct FitConfig {
    std::string input;
    std::string x_column;
    std::string y_column;
    std::optional<std::string> filter_experiment;
    std::optional<int> filter_N;
    std::optional<int> filter_p;
    std::optional<double> filter_noise;
    std::string out;
};

FitConfig load_fit_config(const std::string& path);
FitConfig parse_fit_config(const std::string& text, const std::string& origin);

// Applies the fit config's equality filters and runs fit_power_law.
FitResult run_fit(const FitConfig& cfg, const std::vector<SweepRow>& rows);

}  // namespace effsim
