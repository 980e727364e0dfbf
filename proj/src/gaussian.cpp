#include "effsim/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "effsim/ode.hpp"

namespace effsim {

void QuadraticHamiltonian::check() const {
    if (A.rows() != 2 * N || A.cols() != 2 * N)
        throw std::invalid_argument("A must be 2N x 2N");
    if ((A + A.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("A must be antisymmetric");
}

void CovarianceState::check() const {
    if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0)
        throw std::invalid_argument("Gamma must be square with even dimension");
    if ((gamma + gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("Gamma must be antisymmetric");
    Eigen::JacobiSVD<RealMatrix> svd(gamma);
    if (svd.singularValues().size() > 0 && svd.singularValues()(0) > 1 + 1e-9)
        throw std::invalid_argument("Gamma has a singular value above 1");
}

DepolSpec DepolSpec::probability(std::vector<int> modes, double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("depolarizing probability outside [0,1]");
    DepolSpec s;
    s.modes = std::move(modes);
    s.p = p;
    return s;
}

DepolSpec DepolSpec::rate(std::vector<int> modes, double gamma) {
    if (gamma < 0) throw std::invalid_argument("depolarizing rate must be nonnegative");
    DepolSpec s;
    s.modes = std::move(modes);
    s.gamma = gamma;
    return s;
}

std::vector<int> DepolSpec::all_modes(int N) {
    std::vector<int> m(N);
    for (int i = 0; i < N; ++i) m[i] = i;
    return m;
}

static RealMatrix a_matrix_mu(int N) {
    RealMatrix A = RealMatrix::Zero(2 * N, 2 * N);
    for (int i = 0; i < N; ++i) {
        A(2 * i, 2 * i + 1) = 1.0;
        A(2 * i + 1, 2 * i) = -1.0;
    }
    return A;
}

static RealMatrix a_matrix_iq(int N, bool periodic) {
    RealMatrix A = RealMatrix::Zero(2 * N, 2 * N);
    for (int i = 0; i + 1 < N; ++i) {
        A(2 * i, 2 * i + 2) = 2.0;
        A(2 * i + 2, 2 * i) = -2.0;
    }
    if (periodic) {
        A(2 * (N - 1), 0) += 2.0;
        A(0, 2 * (N - 1)) += -2.0;
    }
    return A;
}

QuadraticHamiltonian build_quadratic(int N, const QuadSpec& spec) {
    if (N < 2 && spec.kind != QuadSpec::Mu)
        throw std::invalid_argument("build_quadratic requires N >= 2");
    if (N < 1) throw std::invalid_argument("build_quadratic requires N >= 1");
    if (spec.periodic && N < 3)
        throw std::invalid_argument("periodic chains need N >= 3");
    QuadraticHamiltonian H;
    H.N = N;
    switch (spec.kind) {
        case QuadSpec::Mu:
            H.A = a_matrix_mu(N);
            H.label = "mu";
            break;
        case QuadSpec::IQ:
            H.A = a_matrix_iq(N, spec.periodic);
            H.label = "iQ";
            break;
        case QuadSpec::Combo:
            H.A = spec.c1 * a_matrix_mu(N) + spec.c2 * a_matrix_iq(N, spec.periodic);
            H.label = "combo";
            break;
        case QuadSpec::CommutatorMuIQ: {
            const RealMatrix Am = a_matrix_mu(N);
            const RealMatrix Aq = a_matrix_iq(N, spec.periodic);
            H.A = Am * Aq - Aq * Am;
            H.label = "[mu,Q]";
            break;
        }
        default:
            throw std::invalid_argument("unknown quadratic spec");
    }
    H.check();
    return H;
}

CovarianceState vacuum_state(int N) {
    if (N < 1) throw std::invalid_argument("vacuum_state requires N >= 1");
    CovarianceState s;
    s.gamma = RealMatrix::Zero(2 * N, 2 * N);
    for (int i = 0; i < N; ++i) {
        s.gamma(2 * i, 2 * i + 1) = -1.0;
        s.gamma(2 * i + 1, 2 * i) = 1.0;
    }
    return s;
}

RealMatrix orthogonal_exp(const RealMatrix& A, double s) {
    const RealMatrix As = A * s;
    return As.exp();
}

CovarianceState evolve_exact(const CovarianceState& state, const QuadraticHamiltonian& H,
                             double t) {
    if (state.modes() != H.N) throw std::invalid_argument("mode count mismatch");
    const RealMatrix O = orthogonal_exp(H.A, t);
    return apply_orthogonal(state, O);
}

CovarianceState apply_orthogonal(const CovarianceState& state, const RealMatrix& O) {
    if (O.rows() != state.gamma.rows() || O.cols() != state.gamma.cols())
        throw std::invalid_argument("orthogonal dimension mismatch");
    CovarianceState out;
    out.gamma = O * state.gamma * O.transpose();
    return out;
}

std::vector<double> mode_occupations(const CovarianceState& state) {
    const int N = state.modes();
    std::vector<double> n(N);
    for (int i = 0; i < N; ++i) n[i] = 0.5 * (1.0 + state.gamma(2 * i, 2 * i + 1));
    return n;
}

double mean_occupation(const CovarianceState& state) {
    const auto n = mode_occupations(state);
    double sum = 0.0;
    for (double v : n) sum += v;
    return sum / static_cast<double>(n.size());
}

// 1 if the Majorana index belongs to a listed mode.
static std::vector<int> noisy_flags(int N, const std::vector<int>& modes) {
    std::vector<int> flag(N, 0);
    for (int m : modes) {
        if (m < 0 || m >= N) throw std::invalid_argument("noise mode index out of range");
        flag[m] = 1;
    }
    return flag;
}

CovarianceState depolarize_modes(const CovarianceState& state, const DepolSpec& spec) {
    if (spec.p < 0 || spec.p > 1) throw std::invalid_argument("depolarizing probability outside [0,1]");
    const int N = state.modes();
    const auto flag = noisy_flags(N, spec.modes);
    CovarianceState out = state;
    const double keep = 1.0 - spec.p;
    const int dim = 2 * N;
    for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
            const int mj = j / 2;
            const int mk = k / 2;
            int count = 0;
            if (mj == mk) {
                count = flag[mj];
            } else {
                count = flag[mj] + flag[mk];
            }
            if (count == 1)
                out.gamma(j, k) *= keep;
            else if (count == 2)
                out.gamma(j, k) *= keep * keep;
        }
    }
    return out;
}

CovarianceState evolve_noisy_ode(const CovarianceState& state, const std::vector<DriveTerm>& drive,
                                 const DepolSpec& noise, double t0, double t1, double tol) {
    const int N = state.modes();
    const int dim = 2 * N;
    for (const auto& term : drive)
        if (term.H.N != N) throw std::invalid_argument("drive mode count mismatch");
    const auto flag = noisy_flags(N, noise.modes);
    RealMatrix D = RealMatrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
            D(j, k) = (j / 2 == k / 2) ? flag[j / 2] : flag[j / 2] + flag[k / 2];

    const double gamma = noise.gamma;
    auto rhs = [&](double t, const RealMatrix& g) -> RealMatrix {
        RealMatrix A = RealMatrix::Zero(dim, dim);
        for (const auto& term : drive) A += term.coeff(t) * term.H.A;
        RealMatrix out = A * g - g * A;
        if (gamma > 0) out -= gamma * D.cwiseProduct(g);
        return out;
    };
    auto antisymmetrize = [](RealMatrix& g) { g = 0.5 * (g - g.transpose().eval()); };
    CovarianceState out;
    out.gamma =
        rk45_integrate_projected(state.gamma, t0, t1, tol, rhs, antisymmetrize, "evolve_noisy_ode");
    return out;
}

}  // namespace effsim
