#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "effsim/dense.hpp"
#include "effsim/gaussian.hpp"

using namespace effsim;

TEST_CASE("vacuum and number operators") {
    const auto vac = vacuum_dense(3);
    CHECK_NOTHROW(vac.check());
    const auto id = DenseOperator{3, Matrix::Identity(8, 8)};
    CHECK(expectation(vac, id) == doctest::Approx(1.0));
    for (int i = 0; i < 3; ++i)
        CHECK(expectation(vac, jw_mode_number(3, i)) == doctest::Approx(0.0));

    const auto n0 = jw_mode_number(1, 0);
    CHECK(std::abs(n0.m(0, 0)) < 1e-15);
    CHECK(std::abs(n0.m(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("quadratic JW embedding matches the number operator") {
    const int N = 2;
    const auto quad = jordan_wigner_dense(build_quadratic(N, QuadSpec::mu()));
    const Matrix expected =
        jw_number_total(N).m - (N / 2.0) * Matrix::Identity(1 << N, 1 << N);
    CHECK((quad.m - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("iQ is Hermitian and traceless") {
    const auto q = jordan_wigner_dense(build_quadratic(2, QuadSpec::iq()));
    CHECK_NOTHROW(q.check_hermitian());
    CHECK(std::abs(q.m.trace()) < 1e-12);
}

TEST_CASE("commutator quadratic equals the dense commutator") {
    const int N = 3;
    const auto comm = jordan_wigner_dense(build_quadratic(N, QuadSpec::commutator()));
    const Matrix md = jordan_wigner_dense(build_quadratic(N, QuadSpec::mu())).m;
    const Matrix qd = jordan_wigner_dense(build_quadratic(N, QuadSpec::iq())).m;
    const Matrix expected = Complex(0, -1) * (md * qd - qd * md);
    CHECK((comm.m - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("many-body spectrum assembles from the single-particle one") {
    const int N = 4;
    const auto H = build_quadratic(N, QuadSpec::combo(1.0, 0.5));
    const auto dense = jordan_wigner_dense(H);

    Eigen::SelfAdjointEigenSolver<Matrix> es(dense.m);
    std::vector<double> many(es.eigenvalues().data(), es.eigenvalues().data() + (1 << N));

    // single-particle energies: positive imaginary parts of eig(A)
    Eigen::EigenSolver<RealMatrix> ea(H.A);
    std::vector<double> eps;
    for (int k = 0; k < 2 * N; ++k) {
        const double im = ea.eigenvalues()(k).imag();
        if (im > 1e-12) eps.push_back(im);
    }
    REQUIRE(eps.size() == static_cast<size_t>(N));

    std::vector<double> assembled;
    for (int mask = 0; mask < (1 << N); ++mask) {
        double e = 0.0;
        for (int k = 0; k < N; ++k) e += ((mask >> k) & 1 ? 0.5 : -0.5) * eps[k];
        assembled.push_back(e);
    }
    std::sort(many.begin(), many.end());
    std::sort(assembled.begin(), assembled.end());
    for (int i = 0; i < (1 << N); ++i)
        CHECK(many[i] == doctest::Approx(assembled[i]).epsilon(1e-9));
}

TEST_CASE("unitary limit of the Lindblad integrator") {
    const int N = 3;
    const auto H = jordan_wigner_dense(build_quadratic(N, QuadSpec::combo(1.0, 0.5)));
    const auto vac = vacuum_dense(N);

    const auto exact = evolve_lindblad_dense(vac, {{H, nullptr}}, {}, 0.0, 0.0, 1.3, 1e-12);
    const auto stepped =
        evolve_lindblad_dense(vac, {{H, [](double) { return 1.0; }}}, {}, 0.0, 0.0, 1.3, 1e-12);
    CHECK((exact.rho - stepped.rho).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_NOTHROW(exact.check());
    CHECK_NOTHROW(stepped.check());
}

TEST_CASE("pure dissipation relaxes to the mode-replacement fixed point") {
    const double gamma = 0.7;
    const auto vac = vacuum_dense(2);
    for (double t : {0.3, 1.0, 2.5}) {
        const auto out = evolve_lindblad_dense(vac, {}, {0}, gamma, 0.0, t, 1e-11);
        const double expected = 0.5 * (1.0 - std::exp(-gamma * t));
        CHECK(expectation(out, jw_mode_number(2, 0)) == doctest::Approx(expected).epsilon(1e-8));
        CHECK(expectation(out, jw_mode_number(2, 1)) == doctest::Approx(0.0).epsilon(1e-10));
        CHECK_NOTHROW(out.check());
    }
}

TEST_CASE("discrete channel consistency p = 1 - exp(-gamma t)") {
    const int N = 3;
    // correlate the modes first so off-diagonal sectors are exercised
    const auto H = jordan_wigner_dense(build_quadratic(N, QuadSpec::combo(1.0, 0.5)));
    const auto state = evolve_lindblad_dense(vacuum_dense(N), {{H, nullptr}}, {}, 0.0, 0.0, 0.9, 1e-12);

    const double gamma = 0.4, t = 0.8;
    const auto continuous = evolve_lindblad_dense(state, {}, {1}, gamma, 0.0, t, 1e-12);
    const auto discrete = depolarize_mode_dense(state, 1, 1.0 - std::exp(-gamma * t));
    CHECK((continuous.rho - discrete.rho).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("depolarize_mode_dense endpoints") {
    const int N = 2;
    const auto H = jordan_wigner_dense(build_quadratic(N, QuadSpec::combo(1.0, 0.5)));
    const auto state = evolve_lindblad_dense(vacuum_dense(N), {{H, nullptr}}, {}, 0.0, 0.0, 0.7, 1e-12);

    const auto same = depolarize_mode_dense(state, 0, 0.0);
    CHECK((same.rho - state.rho).cwiseAbs().maxCoeff() < 1e-15);

    const auto mixed = depolarize_mode_dense(state, 0, 1.0);
    CHECK(expectation(mixed, jw_mode_number(N, 0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(mixed.rho.trace() - Complex(1.0)) < 1e-12);
    CHECK_NOTHROW(mixed.check());

    CHECK_THROWS(depolarize_mode_dense(state, 0, 1.5));
    CHECK_THROWS(depolarize_mode_dense(state, 5, 0.1));
}

TEST_CASE("trace preservation under noisy evolution") {
    const int N = 3;
    const auto H = jordan_wigner_dense(build_quadratic(N, QuadSpec::combo(1.0, 0.5)));
    const auto out = evolve_lindblad_dense(vacuum_dense(N), {{H, nullptr}}, {0, 1, 2}, 0.05, 0.0,
                                           1.0, 1e-11);
    CHECK(std::abs(out.rho.trace() - Complex(1.0)) < 1e-10);
    CHECK_NOTHROW(out.check());
}

TEST_CASE("expectation rejects a non-real trace") {
    const auto vac = vacuum_dense(1);
    DenseState plus;
    plus.n = 1;
    plus.rho = Matrix::Constant(2, 2, Complex(0.5, 0.0));
    DenseOperator bad;
    bad.n = 1;
    bad.m = Matrix::Zero(2, 2);
    bad.m(0, 1) = Complex(0, 1);
    CHECK_THROWS(expectation(plus, bad));
    CHECK(expectation(vac, jw_mode_number(1, 0)) == doctest::Approx(0.0));
}

TEST_CASE("random local operators are reproducible and well formed") {
    const auto lat = Lattice::chain(10);
    const auto a = random_local_operator(lat, 2.0, 4.0, 1.0, 42);
    const auto b = random_local_operator(lat, 2.0, 4.0, 1.0, 42);
    const auto c = random_local_operator(lat, 2.0, 4.0, 1.0, 43);
    REQUIRE(a.terms.size() == b.terms.size());
    for (size_t i = 0; i < a.terms.size(); ++i) {
        CHECK(a.terms[i].support == b.terms[i].support);
        CHECK((*a.terms[i].matrix - *b.terms[i].matrix).cwiseAbs().maxCoeff() == 0.0);
    }
    const bool differs = a.terms.size() != c.terms.size() || star_norm(a) != star_norm(c);
    CHECK(differs);
    CHECK_NOTHROW(a.check());
}

TEST_CASE("density matrix invariant checks") {
    DenseState bad;
    bad.n = 1;
    bad.rho = Matrix::Zero(2, 2);
    bad.rho(0, 0) = 1.5;
    bad.rho(1, 1) = -0.5;
    CHECK_THROWS(bad.check());
}
