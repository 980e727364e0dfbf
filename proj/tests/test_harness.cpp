#include "effsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "effsim/gaussian.hpp"
#include "effsim/trotter.hpp"

namespace {

using namespace effsim;

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("effsim-harness-" + name)).string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

template <typename Fn>
std::string thrown_message(Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

void check_mentions(const std::string& message, const std::string& needle) {
    CHECK_MESSAGE(message.find(needle) != std::string::npos,
                  "expected '" << needle << "' in: " << message);
}

std::vector<SweepRow> quadratic_rows() {
    std::vector<SweepRow> rows;
    for (int T : {1, 2, 3, 4, 5}) {
        SweepRow row;
        row.experiment = "trotter-sweep";
        row.N = 8;
        row.control = T;
        row.p = 2;
        row.noise = 0.0;
        row.abs_error = 3.0 * T * T;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("config parser fills defaults for a minimal sweep") {
    const auto cfg = parse_config("kind = trotter-sweep\nN = 8\nT = 8\n", "inline");
    CHECK(cfg.kind == ExperimentKind::TrotterSweep);
    CHECK(cfg.sizes == std::vector<int>{8});
    CHECK(cfg.steps == std::vector<int>{8});
    CHECK(cfg.h == 1.0);
    CHECK(cfg.g == 0.5);
    CHECK(cfg.tau == 1.0);
    CHECK(cfg.p == 2);
    CHECK(cfg.noises == std::vector<double>{0.0});
    CHECK(cfg.periodic == false);
    CHECK(cfg.placement == NoisePlacement::PerLayerAllModes);
    CHECK(cfg.threads == 0);
    CHECK(cfg.tol == 1e-9);
}

TEST_CASE("config parser reads comments lists and flags") {
    const std::string text =
        "# sweep over two sizes\n"
        "kind = trotter-sweep\n"
        "N = 4, 8\n"
        "T = 2,4,  8\n"
        "noise = 0, 1e-3\n"
        "p_order = 4  # fourth order formula\n"
        "periodic = true\n"
        "placement = touched-modes\n"
        "tau = 2.5\n"
        "seed = 7\n"
        "threads = 3\n"
        "out = /tmp/rows.csv\n"
        "\n";
    const auto cfg = parse_config(text, "inline");
    CHECK(cfg.sizes == std::vector<int>{4, 8});
    CHECK(cfg.steps == std::vector<int>{2, 4, 8});
    CHECK(cfg.noises == std::vector<double>{0.0, 1e-3});
    CHECK(cfg.p == 4);
    CHECK(cfg.periodic == true);
    CHECK(cfg.placement == NoisePlacement::PerLayerTouchedModes);
    CHECK(cfg.tau == 2.5);
    CHECK(cfg.seed == 7);
    CHECK(cfg.threads == 3);
    CHECK(cfg.out == "/tmp/rows.csv");
}

TEST_CASE("malformed input names the offending line and key") {
    check_mentions(thrown_message([] {
                       parse_config("kind = trotter-sweep\nN = 8\nT 8\n", "demo.cfg");
                   }),
                   "demo.cfg line 3");
    check_mentions(thrown_message([] {
                       parse_config("kind = trotter-sweep\nN = 8\nT = 8\nbogus = 1\n",
                                    "demo.cfg");
                   }),
                   "unknown key 'bogus'");
    check_mentions(thrown_message([] {
                       parse_config("kind = validate\nN = 4\nN = 5\n", "demo.cfg");
                   }),
                   "repeated key 'N'");
    check_mentions(thrown_message([] { parse_config("N = 4\n", "demo.cfg"); }),
                   "missing required key 'kind'");
    check_mentions(thrown_message([] {
                       parse_config("kind = trotter-sweep\nN = 8\n", "demo.cfg");
                   }),
                   "missing required key 'T'");
    check_mentions(thrown_message([] {
                       parse_config("kind = trotter-sweep\nN = 8\nT = eight\n", "demo.cfg");
                   }),
                   "'T' is not an integer: 'eight'");
    check_mentions(thrown_message([] { parse_config("kind = warp\n", "demo.cfg"); }),
                   "unknown experiment kind 'warp'");
    CHECK_THROWS_AS(parse_config("kind = trotter-sweep\nN = 8\nT = 8\nnoise =\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/effsim.cfg"), std::invalid_argument);
}

TEST_CASE("config parser enforces per-kind constraints") {
    CHECK_THROWS_AS(parse_config("kind = validate\nN = 7\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = sw-sweep\nN = 5\nuptau = 0.1\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = sw-sweep\nN = 2\nuptau = 0.1\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config("kind = floquet-sweep\nN = 8\nuptau = 0.5\np_order = 2\n", "inline"),
        std::invalid_argument);
    check_mentions(thrown_message([] {
                       parse_config("kind = floquet-sweep\nN = 8\nuptau = 0.5\np_order = 1\n",
                                    "inline");
                   }),
                   "h0 = 0 and g0 = 0");
    CHECK_NOTHROW(parse_config(
        "kind = floquet-sweep\nN = 8\nuptau = 0.5\np_order = 1\nh0 = 0\ng0 = 0\n",
        "inline"));
    CHECK_THROWS_AS(
        parse_config("kind = trotter-sweep\nN = 5\nT = 4\nperiodic = true\n", "inline"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config("kind = trotter-sweep\nN = 8\nT = 4\nplacement = everywhere\n",
                     "inline"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config("kind = trotter-sweep\nN = 8\nT = 4\nnoise = 1.5\n", "inline"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = trotter-sweep\nN = 8\nT = 0\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = trotter-sweep\nN = 8\nT = 4\ntol = -1\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config("kind = trotter-sweep\nN = 8\nT = 4\nthreads = -2\n", "inline"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = bounds\nmapping = magic\np_order = 2\nnoise = 1e-3\n",
                                 "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = bounds\nmapping = trotter\np_order = 2\n", "inline"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("kind = ft-overhead\nxi0 = 1e-3\n", "inline"),
                    std::invalid_argument);
}

TEST_CASE("noise zero reproduces the direct noiseless run") {
    const auto cfg =
        parse_config("kind = trotter-sweep\nN = 6\nT = 4\nnoise = 0\n", "inline");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].noise == 0.0);

    const auto bonds = chain_bond_hamiltonians(6, cfg.h, cfg.g, false);
    const auto split = even_odd_split(bonds, 1);
    const auto direct = run_trotter(vacuum_state(6), split, suzuki_formula(2, split.K),
                                    cfg.tau, 4, std::nullopt);
    CHECK(rows[0].observable_sim == direct.observable);
    CHECK(rows[0].t_sim == 4.0);
}

TEST_CASE("experiment grid covers the full product exactly once") {
    const auto cfg = parse_config(
        "kind = trotter-sweep\nN = 4, 6\nT = 2, 4, 8\nnoise = 0, 1e-3\n", "inline");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 12);
    std::set<std::tuple<int, double, double>> seen;
    for (const auto& row : rows) {
        seen.insert({row.N, row.control, row.noise});
        CHECK(row.abs_error == std::abs(row.observable_sim - row.observable_target));
        CHECK(row.experiment == "trotter-sweep");
        CHECK(row.p == 2);
        CHECK(row.wall_time_ms >= 0.0);
    }
    CHECK(seen.size() == 12);
    CHECK(std::is_sorted(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.N, a.control, a.noise) < std::tie(b.N, b.control, b.noise);
    }));
}

TEST_CASE("thread count never changes the written bytes") {
    const std::string base =
        "kind = trotter-sweep\nN = 4, 8\nT = 2, 4\nnoise = 0, 1e-3\np_order = 2\n";
    const std::string p1 = temp_path("threads1.csv");
    const std::string p4 = temp_path("threads4.csv");
    const std::string penv = temp_path("threadsenv.csv");

    auto cfg = parse_config(base + "threads = 1\n", "inline");
    write_results(run_experiment(cfg), cfg.kind, p1);
    cfg = parse_config(base + "threads = 4\n", "inline");
    write_results(run_experiment(cfg), cfg.kind, p4);

    setenv("EFFSIM_THREADS", "2", 1);
    cfg = parse_config(base, "inline");
    write_results(run_experiment(cfg), cfg.kind, penv);
    unsetenv("EFFSIM_THREADS");

    const std::string bytes = read_file(p1);
    CHECK(bytes == read_file(p4));
    CHECK(bytes == read_file(penv));
    CHECK(bytes.find("wall") == std::string::npos);
    std::remove(p1.c_str());
    std::remove(p4.c_str());
    std::remove(penv.c_str());
}

TEST_CASE("validate kind agrees with the dense oracle") {
    const auto cfg = parse_config("kind = validate\nN = 2, 3, 4\n", "inline");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 9);
    for (const auto& row : rows) {
        CHECK(row.abs_error < 1e-7);
        if (row.mode == "exact") {
            CHECK(row.noise == 0.0);
            CHECK(row.abs_error < 1e-9);
        }
        if (row.mode == "discrete") CHECK(row.noise == 0.05);
        if (row.mode == "continuous") CHECK(row.noise == 0.01);
    }
    for (int N : {2, 3, 4}) {
        std::set<std::string> modes;
        for (const auto& row : rows)
            if (row.N == N) modes.insert(row.mode);
        CHECK(modes == std::set<std::string>{"exact", "discrete", "continuous"});
    }
}

TEST_CASE("engine failures carry their grid point") {
    const auto cfg = parse_config(
        "kind = floquet-sweep\nN = 2\nuptau = 0.5\nperiodic = true\n", "inline");
    const std::string message = thrown_message([&] { run_experiment(cfg); });
    check_mentions(message, "floquet-sweep grid point N=2");
    check_mentions(message, "control=0.5");

    const auto bounds_cfg = parse_config(
        "kind = bounds\nmapping = trotter\np_order = 2\nnoise = 1e-3\n", "inline");
    CHECK_THROWS_AS(run_experiment(bounds_cfg), std::invalid_argument);
}

TEST_CASE("csv writer emits a bare header for an empty sweep") {
    const std::string path = temp_path("empty.csv");
    write_results({}, ExperimentKind::TrotterSweep, path);
    CHECK(read_file(path) ==
          "experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim\n");
    write_results({}, ExperimentKind::Validate, path);
    CHECK(read_file(path) ==
          "experiment,N,mode,noise,observable_sim,observable_target,abs_error,t_sim\n");
    std::remove(path.c_str());
}

TEST_CASE("csv round trip is a byte-level fixed point") {
    SweepRow row;
    row.experiment = "floquet-sweep";
    row.N = 8;
    row.control = 1.0 / 3.0;
    row.p = 1;
    row.noise = 1e-3;
    row.observable_sim = 0.123456789012345;
    row.observable_target = 0.12;
    row.abs_error = std::abs(row.observable_sim - row.observable_target);
    row.t_sim = 45.0;
    row.wall_time_ms = 1234.5;

    const std::string first = temp_path("roundtrip1.csv");
    const std::string second = temp_path("roundtrip2.csv");
    write_results({row}, ExperimentKind::FloquetSweep, first);

    const std::string bytes = read_file(first);
    check_mentions(bytes, "3.33333333333e-01");
    check_mentions(bytes, "1.23456789012e-01");
    CHECK(bytes.find('\r') == std::string::npos);
    CHECK(bytes.back() == '\n');

    const auto back = read_results(first);
    REQUIRE(back.size() == 1);
    CHECK(back[0].experiment == "floquet-sweep");
    CHECK(back[0].N == 8);
    CHECK(back[0].p == 1);
    CHECK(back[0].t_sim == 45.0);
    CHECK(back[0].wall_time_ms == 0.0);

    write_results(back, ExperimentKind::FloquetSweep, second);
    CHECK(bytes == read_file(second));
    std::remove(first.c_str());
    std::remove(second.c_str());
}

TEST_CASE("results reader rejects damaged files") {
    CHECK_THROWS_AS(read_results("/nonexistent/rows.csv"), std::runtime_error);

    const std::string path = temp_path("damaged.csv");
    {
        std::ofstream out(path, std::ios::binary);
        out << "who,knows\n";
    }
    check_mentions(thrown_message([&] { read_results(path); }), "unrecognized results header");
    {
        std::ofstream out(path, std::ios::binary);
        out << "experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim\n";
        out << "trotter-sweep,8,4\n";
    }
    check_mentions(thrown_message([&] { read_results(path); }), "expected 9 fields");
    {
        std::ofstream out(path, std::ios::binary);
        out << "experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim\n";
        out << "trotter-sweep,8,4,2,zero,0,0,0,0\n";
    }
    check_mentions(thrown_message([&] { read_results(path); }), "malformed field");
    std::remove(path.c_str());
}

TEST_CASE("power-law fit recovers an exact quadratic") {
    const auto rows = quadratic_rows();
    const auto fit = fit_power_law(rows, "T", "abs_error");
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.points == 5);
    CHECK(fit.x_name == "T");
    CHECK(fit.y_name == "abs_error");
}

TEST_CASE("power-law fit rejects unusable data") {
    auto rows = quadratic_rows();
    rows.resize(3);
    CHECK_THROWS_AS(fit_power_law(rows, "T", "abs_error"), std::invalid_argument);

    auto zero = quadratic_rows();
    zero[2].abs_error = 0.0;
    CHECK_THROWS_AS(fit_power_law(zero, "T", "abs_error"), std::invalid_argument);

    CHECK_THROWS_AS(fit_power_law(quadratic_rows(), "wall_time", "abs_error"),
                    std::invalid_argument);
}

TEST_CASE("fit filters pick out the matching rows") {
    auto rows = quadratic_rows();
    for (int T : {1, 2, 3, 4, 5}) {
        SweepRow noisy;
        noisy.experiment = "trotter-sweep";
        noisy.N = 16;
        noisy.control = T;
        noisy.p = 4;
        noisy.noise = 1e-3;
        noisy.abs_error = 7.0 * T * T * T;
        rows.push_back(noisy);
    }

    FitConfig cfg;
    cfg.input = "unused";
    cfg.x_column = "T";
    cfg.y_column = "abs_error";
    cfg.filter_N = 16;
    cfg.filter_p = 4;
    cfg.filter_noise = 1e-3;
    const auto fit = run_fit(cfg, rows);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.points == 5);

    cfg.filter_N = 8;
    cfg.filter_p.reset();
    cfg.filter_noise.reset();
    CHECK(run_fit(cfg, rows).slope == doctest::Approx(2.0).epsilon(1e-9));

    cfg.filter_experiment = "floquet-sweep";
    CHECK_THROWS_AS(run_fit(cfg, rows), std::invalid_argument);
}

TEST_CASE("fit config parser validates its keys") {
    const auto cfg = parse_fit_config(
        "input = rows.csv\nx_column = T\ny_column = abs_error\nfilter_N = 8\n", "inline");
    CHECK(cfg.input == "rows.csv");
    CHECK(cfg.x_column == "T");
    CHECK(cfg.y_column == "abs_error");
    REQUIRE(cfg.filter_N.has_value());
    CHECK(*cfg.filter_N == 8);
    CHECK_FALSE(cfg.filter_p.has_value());

    CHECK_THROWS_AS(parse_fit_config("x_column = T\ny_column = abs_error\n", "inline"),
                    std::invalid_argument);
    check_mentions(thrown_message([] {
                       parse_fit_config("input = a\nx_column = T\ny_column = e\nblah = 1\n",
                                        "inline");
                   }),
                   "unknown key 'blah'");
}

TEST_CASE("bounds configs route to the tradeoff calculators") {
    const auto cfg = parse_config(
        "kind = bounds\nmapping = trotter\np_order = 2\nnoise = 1e-4, 1e-3\ntau = 2\n",
        "inline");
    const auto rows = run_bounds(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].gamma == 1e-4);
    CHECK(rows[1].gamma == 1e-3);
    CHECK(rows[0].alpha_exponent == doctest::Approx(0.5));
    CHECK(rows[0].error_bound < rows[1].error_bound);

    const std::string path = temp_path("bounds.csv");
    write_results(rows, path);
    const std::string bytes = read_file(path);
    check_mentions(bytes,
                   "experiment,mapping,p,d,tau,noise,control,alpha_exponent,error_bound,"
                   "t_sim_bound");
    check_mentions(bytes, "bounds,trotter,2,1,");
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 3);
    std::remove(path.c_str());

    const auto sweep_cfg = parse_config("kind = validate\nN = 2\n", "inline");
    CHECK_THROWS_AS(run_bounds(sweep_cfg), std::invalid_argument);
}

TEST_CASE("overhead configs route to the concatenation model") {
    const auto cfg = parse_config(
        "kind = ft-overhead\nxi0 = 1e-3\nxi_th = 1e-2\ncode_t = 1\nlevels = 2\n"
        "delta = 1e-3\n",
        "inline");
    const auto result = run_ft(cfg);
    CHECK(result.xi_l == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(result.required_l >= 0);
    CHECK(result.total_error > 0.0);

    const std::string path = temp_path("ft.csv");
    write_results(result, cfg.ft, path);
    const std::string bytes = read_file(path);
    check_mentions(bytes,
                   "experiment,xi0,xi_th,code_t,levels,delta,xi_l,optimal_t,total_error,"
                   "required_l");
    check_mentions(bytes, "ft-overhead,");
    std::remove(path.c_str());

    CHECK_THROWS_AS(run_ft(parse_config("kind = validate\nN = 2\n", "inline")),
                    std::invalid_argument);
}

TEST_CASE("fit results serialize with the shared format") {
    const auto fit = fit_power_law(quadratic_rows(), "T", "abs_error");
    const std::string path = temp_path("fit.csv");
    write_results(fit, path);
    const std::string bytes = read_file(path);
    check_mentions(bytes, "x_column,y_column,slope,intercept,r_squared,points");
    check_mentions(bytes, "T,abs_error,2.00000000000e+00");
    check_mentions(bytes, ",5\n");
    std::remove(path.c_str());
}

TEST_CASE("golden validate results stay frozen") {
    const auto cfg = parse_config("kind = validate\nN = 2, 3\n", "inline");
    const std::string path = temp_path("golden-check.csv");
    write_results(run_experiment(cfg), cfg.kind, path);
    CHECK(read_file(path) == read_file(std::string(EFFSIM_GOLDEN_DIR) + "/validate.csv"));
    std::remove(path.c_str());
}
