#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "effsim/bounds.hpp"
#include "effsim/dense.hpp"
#include "effsim/floquet.hpp"
#include "effsim/gaussian.hpp"
#include "effsim/harness.hpp"
#include "effsim/lattice.hpp"
#include "effsim/schrieffer_wolff.hpp"
#include "effsim/trotter.hpp"

namespace py = pybind11;
using namespace effsim;

namespace {

BoundConstants make_constants(double c_map, double c_noise) {
    BoundConstants constants;
    constants.c_map = c_map;
    constants.c_noise = c_noise;
    return constants;
}

SweepRow trotter_point(int N, double h, double g, double tau, int T, int p, double noise,
                       bool periodic, const std::string& placement) {
    NoisePlacement where;
    if (placement == "all-modes")
        where = NoisePlacement::PerLayerAllModes;
    else if (placement == "touched-modes")
        where = NoisePlacement::PerLayerTouchedModes;
    else
        throw std::invalid_argument("placement must be all-modes or touched-modes");

    const auto bonds = chain_bond_hamiltonians(N, h, g, periodic);
    const auto split = even_odd_split(bonds, 1);
    const auto formula = suzuki_formula(p, split.K);
    const auto initial = vacuum_state(N);

    SweepRow row;
    row.experiment = "trotter-sweep";
    row.N = N;
    row.control = T;
    row.p = p;
    row.noise = noise;
    row.t_sim = T;
    row.observable_target =
        mean_occupation(evolve_exact(initial, total_hamiltonian(bonds), tau));
    const std::optional<DepolSpec> spec =
        noise > 0 ? std::optional<DepolSpec>(
                        DepolSpec::probability(DepolSpec::all_modes(N), noise))
                  : std::nullopt;
    row.observable_sim = run_trotter(initial, split, formula, tau, T, spec, where).observable;
    row.abs_error = std::abs(row.observable_sim - row.observable_target);
    return row;
}

SWRun sw_point(int n, int p, double tau, double eps, double gamma, double tol) {
    const SWDemo demo = sw_demo(n, p);
    return run_sw(demo.M, demo.P, demo.H0, p, demo.initial, demo.O, tau, eps, gamma, tol);
}

}  // namespace

PYBIND11_MODULE(_effsim, m) {
    m.doc() = "free-fermion simulation lab: mappings, noise, bounds, sweeps";

    m.def("lr_velocity", &lr_velocity, py::arg("a"), py::arg("Z"), py::arg("J"));
    m.def("nu_d", &nu_d, py::arg("x"), py::arg("d"), py::arg("a"), py::arg("tail_tol") = 1e-12);
    m.def("lr_observable_bound", &lr_observable_bound, py::arg("sizeX"), py::arg("normO"),
          py::arg("normK"), py::arg("t"), py::arg("dist"), py::arg("a"), py::arg("Z"),
          py::arg("c_LR"));

    m.def(
        "mean_occupation_after_quench",
        [](int N, double h, double g, double tau) {
            const auto H = build_quadratic(N, QuadSpec::combo(h, g));
            return mean_occupation(evolve_exact(vacuum_state(N), H, tau));
        },
        py::arg("N"), py::arg("h"), py::arg("g"), py::arg("tau"));

    py::class_<SweepRow>(m, "SweepRow")
        .def(py::init<>())
        .def_readwrite("experiment", &SweepRow::experiment)
        .def_readwrite("mode", &SweepRow::mode)
        .def_readwrite("N", &SweepRow::N)
        .def_readwrite("control", &SweepRow::control)
        .def_readwrite("p", &SweepRow::p)
        .def_readwrite("noise", &SweepRow::noise)
        .def_readwrite("observable_sim", &SweepRow::observable_sim)
        .def_readwrite("observable_target", &SweepRow::observable_target)
        .def_readwrite("abs_error", &SweepRow::abs_error)
        .def_readwrite("t_sim", &SweepRow::t_sim)
        .def_readonly("wall_time_ms", &SweepRow::wall_time_ms)
        .def("__repr__", [](const SweepRow& r) {
            return "SweepRow(" + r.experiment + ", N=" + std::to_string(r.N) +
                   ", abs_error=" + std::to_string(r.abs_error) + ")";
        });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("kind",
                               [](const ExperimentConfig& c) { return to_string(c.kind); })
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("out", &ExperimentConfig::out);

    m.def("parse_config", &parse_config, py::arg("text"), py::arg("origin") = "inline");
    m.def("load_config", &load_config, py::arg("path"));
    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "write_results",
        [](const std::vector<SweepRow>& rows, const std::string& kind,
           const std::string& path) {
            write_results(rows, experiment_kind_from(kind), path);
        },
        py::arg("rows"), py::arg("kind"), py::arg("path"));
    m.def("read_results", &read_results, py::arg("path"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("r_squared", &FitResult::r_squared)
        .def_readonly("points", &FitResult::points)
        .def_readonly("x_name", &FitResult::x_name)
        .def_readonly("y_name", &FitResult::y_name);

    m.def(
        "fit_power_law",
        [](const std::vector<SweepRow>& rows, const std::string& x, const std::string& y) {
            return fit_power_law(rows, x, y);
        },
        py::arg("rows"), py::arg("x_column"), py::arg("y_column"));

    m.def("trotter_point", &trotter_point, py::arg("N"), py::arg("h"), py::arg("g"),
          py::arg("tau"), py::arg("T"), py::arg("p") = 2, py::arg("noise") = 0.0,
          py::arg("periodic") = false, py::arg("placement") = "all-modes");

    py::class_<FloquetRun>(m, "FloquetRun")
        .def_readonly("observable_sim", &FloquetRun::observable_sim)
        .def_readonly("observable_target", &FloquetRun::observable_target)
        .def_readonly("abs_error", &FloquetRun::abs_error)
        .def_readonly("t_sim", &FloquetRun::t_sim)
        .def_readonly("n_periods", &FloquetRun::n_periods);

    m.def("floquet_point", &run_floquet, py::arg("N"), py::arg("h0"), py::arg("h1"),
          py::arg("g0"), py::arg("g1"), py::arg("p"), py::arg("tau"), py::arg("period"),
          py::arg("gamma") = 0.0, py::arg("tol") = 1e-9, py::arg("periodic") = false);

    py::class_<SWRun>(m, "SWRun")
        .def_readonly("observable_sim", &SWRun::observable_sim)
        .def_readonly("observable_target", &SWRun::observable_target)
        .def_readonly("abs_error", &SWRun::abs_error)
        .def_readonly("t_sim", &SWRun::t_sim);

    m.def("sw_point", &sw_point, py::arg("n"), py::arg("p"), py::arg("tau"), py::arg("eps"),
          py::arg("gamma") = 0.0, py::arg("tol") = 1e-9);

    py::class_<TradeoffResult>(m, "TradeoffResult")
        .def_property_readonly("mapping",
                               [](const TradeoffResult& r) { return to_string(r.mapping); })
        .def_readonly("p", &TradeoffResult::p)
        .def_readonly("d", &TradeoffResult::d)
        .def_readonly("gamma", &TradeoffResult::gamma)
        .def_readonly("tau", &TradeoffResult::tau)
        .def_readonly("control", &TradeoffResult::control)
        .def_readonly("alpha_exponent", &TradeoffResult::alpha_exponent)
        .def_readonly("error_bound", &TradeoffResult::error_bound)
        .def_readonly("t_sim_bound", &TradeoffResult::t_sim_bound);

    m.def(
        "trotter_tradeoff",
        [](int p, int d, double gamma, double tau, double c_map, double c_noise) {
            return trotter_tradeoff(p, d, gamma, tau, make_constants(c_map, c_noise));
        },
        py::arg("p"), py::arg("d"), py::arg("gamma"), py::arg("tau") = 1.0,
        py::arg("c_map") = 1.0, py::arg("c_noise") = 1.0);
    m.def(
        "fm_tradeoff",
        [](int p, int d, double gamma, double tau, double c_map, double c_noise) {
            return fm_tradeoff(p, d, gamma, tau, make_constants(c_map, c_noise));
        },
        py::arg("p"), py::arg("d"), py::arg("gamma"), py::arg("tau") = 1.0,
        py::arg("c_map") = 1.0, py::arg("c_noise") = 1.0);
    m.def(
        "sw_tradeoff",
        [](int p, int d, double gamma, double tau, double c_map, double c_noise) {
            return sw_tradeoff(p, d, gamma, tau, make_constants(c_map, c_noise));
        },
        py::arg("p"), py::arg("d"), py::arg("gamma"), py::arg("tau") = 1.0,
        py::arg("c_map") = 1.0, py::arg("c_noise") = 1.0);

    py::class_<FTOverhead>(m, "FTOverhead")
        .def_readonly("xi_l", &FTOverhead::xi_l)
        .def_readonly("optimal_t", &FTOverhead::optimal_t)
        .def_readonly("total_error", &FTOverhead::total_error)
        .def_readonly("required_l", &FTOverhead::required_l);

    m.def("concatenated_rate", &concatenated_rate, py::arg("xi0"), py::arg("xi_th"),
          py::arg("t"), py::arg("levels"));
    m.def(
        "ft_overhead",
        [](double xi0, double xi_th, int t, int levels, double delta, double tau, int d,
           int p, double c_map, double c_noise) {
            FTParams params;
            params.xi0 = xi0;
            params.xi_th = xi_th;
            params.t = t;
            params.levels = levels;
            params.delta = delta;
            params.tau = tau;
            params.d = d;
            params.p = p;
            return ft_overhead(params, make_constants(c_map, c_noise));
        },
        py::arg("xi0"), py::arg("xi_th"), py::arg("t") = 1, py::arg("levels") = 0,
        py::arg("delta") = 1e-3, py::arg("tau") = 1.0, py::arg("d") = 1, py::arg("p") = 2,
        py::arg("c_map") = 1.0, py::arg("c_noise") = 1.0);

    m.def(
        "trotter_bound",
        [](int p, int d, int T, double tau, int sizeX, double normO, double a0, double Z,
           double c_LR, double Cp) {
            TrotterBoundParams params;
            params.p = p;
            params.d = d;
            params.T = T;
            params.tau = tau;
            params.sizeX = sizeX;
            params.normO = normO;
            params.a0 = a0;
            params.Z = Z;
            params.c_LR = c_LR;
            params.Cp = Cp;
            return trotter_bound(params);
        },
        py::arg("p"), py::arg("d"), py::arg("T"), py::arg("tau") = 1.0,
        py::arg("sizeX") = 1, py::arg("normO") = 1.0, py::arg("a0") = 1.0,
        py::arg("Z") = 2.0, py::arg("c_LR") = 0.0, py::arg("Cp") = 0.0);
}
