#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "effsim/dense.hpp"
#include "effsim/lattice.hpp"
#include "effsim/schrieffer_wolff.hpp"

using namespace effsim;

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// The averaged conjugation orbit is periodic in s with period one because the
// projector sum has integer spectrum, so a uniform Riemann sum with more nodes
// than twice the largest spectral gap reproduces the integral exactly.
Matrix average_by_uniform_orbit(const Matrix& a, const Matrix& p_total, int nodes) {
    Matrix acc = Matrix::Zero(a.rows(), a.cols());
    for (int k = 0; k < nodes; ++k) {
        const double s = static_cast<double>(k) / nodes;
        const Matrix u = (kI * 2.0 * std::numbers::pi * s * p_total).exp();
        acc += u * a * u.adjoint();
    }
    return acc / static_cast<double>(nodes);
}

Matrix strip_average(const DenseOperator& a, const ProjectorFamily& p) {
    return a.m - project_time_average(a, p).m;
}

}  // namespace

TEST_CASE("projector family rejects malformed parts") {
    CHECK_THROWS_AS(ProjectorFamily::build({}), std::invalid_argument);

    Matrix bond = Matrix::Zero(4, 4);
    bond(1, 1) = 1.0;
    bond(2, 2) = 1.0;
    const SupportSet full{0, 1, 2, 3};

    std::vector<DenseOperator> mismatched;
    mismatched.push_back(DenseOperator{4, embed(bond, SupportSet{0, 1}, full)});
    mismatched.push_back(DenseOperator{2, bond});
    CHECK_THROWS_AS(ProjectorFamily::build(std::move(mismatched)), std::invalid_argument);

    std::vector<DenseOperator> scaled;
    scaled.push_back(DenseOperator{4, 2.0 * embed(bond, SupportSet{0, 1}, full)});
    CHECK_THROWS_AS(ProjectorFamily::build(std::move(scaled)), std::invalid_argument);

    Matrix plus = Matrix::Zero(4, 4);
    plus(1, 1) = plus(2, 2) = 0.5;
    plus(1, 2) = plus(2, 1) = 0.5;
    std::vector<DenseOperator> clashing;
    clashing.push_back(DenseOperator{4, embed(bond, SupportSet{1, 2}, full)});
    clashing.push_back(DenseOperator{4, embed(plus, SupportSet{0, 1}, full)});
    CHECK_THROWS_AS(ProjectorFamily::build(std::move(clashing)), std::invalid_argument);
}

TEST_CASE("time average keeps commuting operators and kills cross blocks") {
    const SWDemo demo = sw_demo(4, 0);

    const DenseOperator kept = project_time_average(demo.P.total, demo.P);
    CHECK(operator_norm(kept.m - demo.P.total.m) < 1e-12);

    const DenseOperator averaged = project_time_average(demo.M, demo.P);
    CHECK(operator_norm(commutator(averaged.m, demo.P.total.m)) < 1e-12);

    const DenseOperator off{demo.n, strip_average(demo.M, demo.P)};
    CHECK(operator_norm(project_time_average(off, demo.P).m) < 1e-12);

    const DenseOperator twice = project_time_average(averaged, demo.P);
    CHECK(operator_norm(twice.m - averaged.m) < 1e-12);

    CHECK(operator_norm(averaged.m) <= operator_norm(demo.M.m) + 1e-12);
}

TEST_CASE("time average matches a uniform orbit sum") {
    const SWDemo demo = sw_demo(4, 0);
    const Matrix oracle = average_by_uniform_orbit(demo.M.m, demo.P.total.m, 16);
    CHECK(operator_norm(project_time_average(demo.M, demo.P).m - oracle) < 1e-10);

    Matrix lopsided = demo.M.m;
    lopsided(0, 3) += 0.7;
    lopsided(3, 0) += 0.7;
    const DenseOperator probe{demo.n, lopsided};
    const Matrix oracle2 = average_by_uniform_orbit(probe.m, demo.P.total.m, 16);
    CHECK(operator_norm(project_time_average(probe, demo.P).m - oracle2) < 1e-10);
}

TEST_CASE("sector solve inverts the projector commutator") {
    const SWDemo demo = sw_demo(4, 0);
    const Matrix y = strip_average(demo.M, demo.P);
    const Matrix x = solve_sector_commutator(y, demo.P);
    CHECK(operator_norm(commutator(x, demo.P.total.m) - y) < 1e-10);

    CHECK_THROWS_AS(solve_sector_commutator(demo.M.m, demo.P), std::logic_error);
}

TEST_CASE("the two off-block constructions differ by the circle factor") {
    const SWDemo demo = sw_demo(4, 0);
    const Matrix y = strip_average(demo.M, demo.P);
    const Matrix spectral = solve_sector_commutator(y, demo.P);
    const Matrix quadrature = omega_double_integral(y, demo.P);
    CHECK(operator_norm(spectral - 2.0 * std::numbers::pi * quadrature) < 1e-8);
}

TEST_CASE("conjugation identity holds to high precision") {
    for (int n : {4, 6}) {
        const SWDemo demo = sw_demo(n, 0);
        for (int p : {0, 1, 2}) {
            for (double eps : {0.05, 0.2}) {
                const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, eps, p);
                const Matrix u = sw.omega.exp();
                const Matrix lhs =
                    u.adjoint() * (eps * demo.M.m + demo.P.total.m) * u;
                const Matrix rhs =
                    eps * sw.effective + demo.P.total.m + eps * sw.remainder;
                CHECK(operator_norm(lhs - rhs) < 1e-9);
            }
        }
    }
}

TEST_CASE("effective generator stays block diagonal under an unitary flow") {
    const SWDemo demo = sw_demo(6, 0);
    const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, 0.1, 2);

    CHECK(operator_norm(commutator(sw.effective, demo.P.total.m)) < 1e-8);
    CHECK(operator_norm(sw.omega + sw.omega.adjoint()) < 1e-12);

    const Matrix u = sw.omega.exp();
    const Matrix id = Matrix::Identity(u.rows(), u.cols());
    CHECK(operator_norm(u * u.adjoint() - id) < 1e-12);
}

TEST_CASE("commuting input needs no rotation") {
    const SWDemo demo = sw_demo(4, 0);
    const SWExpansion sw = sw_recursion_dense(demo.H0, demo.P, 0.2, 1);
    CHECK(operator_norm(sw.omega) < 1e-12);
    CHECK(operator_norm(sw.effective - demo.H0.m) < 1e-12);
    CHECK(operator_norm(sw.remainder) < 1e-12);
}

TEST_CASE("generator orders scale with their promised power") {
    const SWDemo demo = sw_demo(4, 0);
    const std::vector<double> epss{0.05, 0.1, 0.2, 0.4};
    std::vector<std::vector<double>> norms(3);
    for (double eps : epss) {
        const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, eps, 2);
        for (int q = 0; q < 3; ++q)
            norms[static_cast<std::size_t>(q)].push_back(
                std::log(operator_norm(sw.omegas[static_cast<std::size_t>(q)])));
    }
    std::vector<double> logs;
    for (double eps : epss) logs.push_back(std::log(eps));
    for (int q = 0; q < 3; ++q) {
        const double slope = fit_slope(logs, norms[static_cast<std::size_t>(q)]);
        CHECK(std::abs(slope - (q + 1)) < 0.2);
    }
}

TEST_CASE("remainder shrinks at the order promised by the expansion") {
    const SWDemo demo = sw_demo(4, 0);
    const std::vector<double> epss{0.05, 0.1, 0.2};
    std::vector<double> logs;
    for (double eps : epss) logs.push_back(std::log(eps));
    for (int p : {0, 1, 2}) {
        std::vector<double> norms;
        for (double eps : epss) {
            const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, eps, p);
            norms.push_back(std::log(operator_norm(sw.remainder)));
        }
        CHECK(fit_slope(logs, norms) >= p + 1 - 0.3);
    }
}

TEST_CASE("remainder stays below its certified envelope") {
    const SWDemo demo = sw_demo(4, 0);
    for (int p : {0, 1}) {
        const SWConstants con =
            sw_constants(demo.star_norm_M, demo.star_norm_P, demo.w, p);
        CHECK(std::isfinite(con.c_p));
        for (double eps : {0.02, 0.05, 0.1}) {
            const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, eps, p);
            CHECK(operator_norm(sw.remainder) <= con.c_p * std::pow(eps, p + 1));
        }
    }
}

TEST_CASE("norm recursion matches its hand-expanded first step") {
    const double nm = 2.0, np = 1.0, w = 4.0;
    const SWConstants base = sw_constants(nm, np, w, 0);
    REQUIRE(base.gammas.size() == 1);
    CHECK(base.gammas[0] == doctest::Approx(nm));
    CHECK(base.w_p == doctest::Approx(0.0));
    CHECK(base.c_p == doctest::Approx(2.0 * std::max(nm, np)));

    const SWConstants first = sw_constants(nm, np, w, 1);
    REQUIRE(first.gammas.size() == 2);
    CHECK(first.gammas[1] == doctest::Approx(2.0 * w * nm * nm));
    CHECK(first.w_p == doctest::Approx(w * nm));
    const double biggest = std::max({nm, np, w * nm});
    CHECK(first.c_p == doctest::Approx(2.0 * biggest * std::exp(2.0 * biggest)));

    const SWConstants second = sw_constants(nm, np, w, 2);
    CHECK(second.gammas[2] >= second.gammas[1]);

    CHECK_THROWS_AS(sw_constants(0.0, np, w, 1), std::invalid_argument);
    CHECK_THROWS_AS(sw_constants(nm, np, w, -1), std::invalid_argument);
}

TEST_CASE("first order effective model matches its closed form") {
    const SWDemo demo = sw_demo(6, 1);
    for (double eps : {0.1, 0.3}) {
        const SWExpansion sw = sw_recursion_dense(demo.M, demo.P, eps, 1);
        CHECK(operator_norm(sw.effective - eps * demo.H0.m) < 1e-12);
    }
}

TEST_CASE("dressed run rejects observables that leave the sectors") {
    const SWDemo demo = sw_demo(4, 0);
    CHECK_THROWS_AS(run_sw(demo.M, demo.P, demo.H0, 0, demo.initial, demo.M, 1.0,
                           0.1, 0.0, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_sw(demo.M, demo.P, demo.H0, 0, demo.initial, demo.O, 1.0,
                           -0.1, 0.0, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS(sw_demo(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(sw_demo(4, 2), std::invalid_argument);
}

TEST_CASE("block diagonal generator reproduces its target exactly") {
    const SWDemo demo = sw_demo(4, 0);
    const SWRun run =
        run_sw(demo.H0, demo.P, demo.H0, 0, demo.initial, demo.O, 1.0, 0.1, 0.0, 1e-9);
    CHECK(run.abs_error < 1e-10);
    CHECK(run.t_sim == doctest::Approx(10.0));
}

TEST_CASE("error grows about linearly in the coupling for the plain run") {
    const SWDemo demo = sw_demo(6, 0);
    std::vector<double> logs, errs;
    for (double eps : {0.02, 0.028, 0.04, 0.057, 0.08, 0.113, 0.16}) {
        const SWRun run =
            run_sw(demo.M, demo.P, demo.H0, 0, demo.initial, demo.O, 1.0, eps, 0.0, 1e-9);
        logs.push_back(std::log(eps));
        errs.push_back(std::log(run.abs_error));
    }
    const double slope = fit_slope(logs, errs);
    CHECK(slope > 0.9);
    CHECK(slope < 1.4);
}

TEST_CASE("noise carves an interior optimum into the coupling") {
    const SWDemo demo = sw_demo(6, 1);
    const std::vector<double> epss{0.13, 0.2, 0.32, 0.5};
    std::vector<double> errs;
    for (double eps : epss)
        errs.push_back(run_sw(demo.M, demo.P, demo.H0, 1, demo.initial, demo.O, 1.0,
                              eps, 1e-2, 1e-8)
                           .abs_error);
    std::size_t best = 0;
    for (std::size_t i = 1; i < errs.size(); ++i)
        if (errs[i] < errs[best]) best = i;
    CHECK(best > 0);
    CHECK(best < errs.size() - 1);
    CHECK(errs.front() > errs[best]);
    CHECK(errs.back() > errs[best]);
}
