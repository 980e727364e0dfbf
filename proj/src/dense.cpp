#include "effsim/dense.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "effsim/ode.hpp"

namespace effsim {

namespace {

const Complex I_unit(0.0, 1.0);

Matrix pauli(char which) {
    Matrix m(2, 2);
    switch (which) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -I_unit, I_unit, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::logic_error("unknown Pauli label");
    }
    return m;
}

void require_cap(int n) {
    if (n < 1 || n > kDenseQubitCap)
        throw std::invalid_argument("dense path supports 1.." +
                                    std::to_string(kDenseQubitCap) + " qubits");
}

// Single-qubit Pauli string, site 0 leftmost.
Matrix pauli_string(int n, const std::string& labels) {
    Matrix out = pauli(labels[0]);
    for (int i = 1; i < n; ++i) out = kron(out, pauli(labels[i]));
    return out;
}

// Kraus set of the fermionic replacement of mode i by the maximally mixed
// mode state: the twirl over {I, c_{2i}, c_{2i+1}, i c_{2i} c_{2i+1}} in the
// Jordan-Wigner representation. This is the mode-algebra partial trace plus
// re-embedding; it leaves even monomials in the other modes' Majoranas
// untouched, which a qubit-local replacement at site i would not (the
// strings of higher modes cross site i).
struct ModeTwirl {
    Matrix c0, c1, d;
};

ModeTwirl make_mode_twirl(int n, int i);

Matrix mode_replace_twirl(const Matrix& rho, const ModeTwirl& k) {
    return 0.25 * (rho + k.c0 * rho * k.c0 + k.c1 * rho * k.c1 + k.d * rho * k.d);
}

}  // namespace

void DenseOperator::check_hermitian(double tol) const {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("operator is not Hermitian within tolerance");
}

void DenseState::check() const {
    if (std::abs(rho.trace() - Complex(1.0)) > 1e-10)
        throw std::invalid_argument("density matrix trace differs from 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
}

DenseState vacuum_dense(int n) {
    require_cap(n);
    const Eigen::Index dim = Eigen::Index(1) << n;
    DenseState s;
    s.n = n;
    s.rho = Matrix::Zero(dim, dim);
    s.rho(0, 0) = 1.0;
    return s;
}

namespace {

ModeTwirl make_mode_twirl(int n, int i) {
    ModeTwirl k;
    k.c0 = jw_majorana(n, 2 * i).m;
    k.c1 = jw_majorana(n, 2 * i + 1).m;
    k.d = I_unit * k.c0 * k.c1;
    return k;
}

}  // namespace

DenseOperator jw_majorana(int N, int j) {
    require_cap(N);
    if (j < 0 || j >= 2 * N) throw std::invalid_argument("Majorana index out of range");
    const int site = j / 2;
    std::string labels(N, 'I');
    for (int k = 0; k < site; ++k) labels[k] = 'Z';
    labels[site] = (j % 2 == 0) ? 'X' : 'Y';
    DenseOperator op;
    op.n = N;
    op.m = pauli_string(N, labels);
    return op;
}

DenseOperator jordan_wigner_dense(const QuadraticHamiltonian& H) {
    require_cap(H.N);
    H.check();
    const int N = H.N;
    std::vector<Matrix> c(2 * N);
    for (int j = 0; j < 2 * N; ++j) c[j] = jw_majorana(N, j).m;
    const Eigen::Index dim = Eigen::Index(1) << N;
    Matrix m = Matrix::Zero(dim, dim);
    for (int j = 0; j < 2 * N; ++j)
        for (int k = 0; k < 2 * N; ++k)
            if (H.A(j, k) != 0.0) m += (I_unit / 4.0) * H.A(j, k) * (c[j] * c[k]);
    DenseOperator op;
    op.n = N;
    op.m = std::move(m);
    op.check_hermitian(1e-12 * (1.0 + H.A.cwiseAbs().maxCoeff()));
    return op;
}

DenseOperator jw_mode_number(int N, int i) {
    require_cap(N);
    if (i < 0 || i >= N) throw std::invalid_argument("mode index out of range");
    std::string labels(N, 'I');
    labels[i] = 'Z';
    const Eigen::Index dim = Eigen::Index(1) << N;
    DenseOperator op;
    op.n = N;
    op.m = 0.5 * (Matrix::Identity(dim, dim) - pauli_string(N, labels));
    return op;
}

DenseOperator jw_number_total(int N) {
    require_cap(N);
    const Eigen::Index dim = Eigen::Index(1) << N;
    Matrix m = Matrix::Zero(dim, dim);
    for (int i = 0; i < N; ++i) m += jw_mode_number(N, i).m;
    DenseOperator op;
    op.n = N;
    op.m = std::move(m);
    return op;
}

DenseOperator assemble_dense(const LocalOperator& op) {
    const int n = op.lattice.sites();
    require_cap(n);
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    const SupportSet full(all);
    const Eigen::Index dim = Eigen::Index(1) << n;
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto& term : op.terms) {
        if (!term.matrix) throw std::invalid_argument("term has no matrix");
        m += embed(*term.matrix, term.support, full);
    }
    DenseOperator out;
    out.n = n;
    out.m = std::move(m);
    return out;
}

DenseState evolve_lindblad_dense(const DenseState& state, const std::vector<DenseDriveTerm>& drive,
                                 const std::vector<int>& noisy_modes, double gamma, double t0,
                                 double t1, double tol) {
    const int n = state.n;
    const Eigen::Index dim = state.rho.rows();
    for (const auto& term : drive)
        if (term.H.m.rows() != dim) throw std::invalid_argument("drive dimension mismatch");
    for (int i : noisy_modes)
        if (i < 0 || i >= n) throw std::invalid_argument("noise mode index out of range");

    bool constant = true;
    for (const auto& term : drive)
        if (term.coeff) constant = false;

    if (gamma == 0.0 && constant) {
        Matrix H = Matrix::Zero(dim, dim);
        for (const auto& term : drive) H += term.H.m;
        const Matrix U = (-I_unit * (t1 - t0) * H).exp();
        DenseState out;
        out.n = n;
        out.rho = U * state.rho * U.adjoint();
        return out;
    }

    std::vector<ModeTwirl> twirls;
    twirls.reserve(noisy_modes.size());
    for (int i : noisy_modes) twirls.push_back(make_mode_twirl(n, i));

    auto rhs = [&](double t, const Matrix& rho) -> Matrix {
        Matrix H = Matrix::Zero(dim, dim);
        for (const auto& term : drive) H += (term.coeff ? term.coeff(t) : 1.0) * term.H.m;
        Matrix out = -I_unit * (H * rho - rho * H);
        for (const auto& k : twirls) out += gamma * (mode_replace_twirl(rho, k) - rho);
        return out;
    };
    auto hermitize = [](Matrix& rho) { rho = 0.5 * (rho + rho.adjoint().eval()); };
    DenseState out;
    out.n = n;
    out.rho = rk45_integrate_projected(state.rho, t0, t1, tol, rhs, hermitize,
                                       "evolve_lindblad_dense");
    return out;
}

DenseState depolarize_mode_dense(const DenseState& state, int i, double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("depolarizing probability outside [0,1]");
    if (i < 0 || i >= state.n) throw std::invalid_argument("mode index out of range");
    DenseState out;
    out.n = state.n;
    out.rho = (1.0 - p) * state.rho + p * mode_replace_twirl(state.rho, make_mode_twirl(state.n, i));
    return out;
}

double expectation(const DenseState& state, const DenseOperator& O) {
    const Complex tr = (O.m * state.rho).trace();
    if (std::abs(tr.imag()) > 1e-9)
        throw std::runtime_error("expectation value has imaginary part " +
                                 std::to_string(tr.imag()));
    return tr.real();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

LocalOperator random_local_operator(const Lattice& lattice, double a, double Z, double J,
                                    std::uint64_t seed) {
    if (a <= 0 || Z <= 0 || J <= 0)
        throw std::invalid_argument("random_local_operator requires positive a, Z, J");
    const int N = lattice.sites();
    const int max_len = std::min(N, static_cast<int>(a) + 1);
    LocalOperator op;
    op.lattice = lattice;
    std::vector<int> overlap_count;
    for (int s = 0; s < N; ++s) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(rng) > 0.8) continue;
        int len = 1 + static_cast<int>(unif(rng) * max_len);
        len = std::min({len, max_len, N - s});
        std::vector<int> sites(len);
        for (int k = 0; k < len; ++k) sites[k] = s + k;
        const SupportSet support{std::vector<int>(sites)};

        const Eigen::Index dim = Eigen::Index(1) << len;
        Matrix m(dim, dim);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index r = 0; r < dim; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = Complex(gauss(rng), gauss(rng));
        const double target = J * (0.1 + 0.9 * unif(rng));
        m *= target / operator_norm(m);

        // only accept the term if it keeps every overlap count within Z
        std::vector<int> hits;
        for (size_t j = 0; j < op.terms.size(); ++j)
            if (op.terms[j].support.overlaps(support)) hits.push_back(static_cast<int>(j));
        if (static_cast<double>(hits.size()) > Z) continue;
        bool blocked = false;
        for (int j : hits)
            if (overlap_count[j] + 1 > Z) blocked = true;
        if (blocked) continue;
        for (int j : hits) ++overlap_count[j];
        overlap_count.push_back(static_cast<int>(hits.size()));
        op.terms.push_back(LocalTerm::dense(support, std::move(m)));
    }
    op.bounds = LocalityBounds{a, Z, J};
    op.check();
    return op;
}

}  // namespace effsim
