#include "effsim/schrieffer_wolff.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "effsim/ode.hpp"

namespace effsim {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double parity_sign(int k) { return k % 2 == 0 ? 1.0 : -1.0; }

// Ordered compositions of `total` into parts >= 1.
template <typename Visit>
void for_each_composition(int total, Visit&& visit) {
    std::vector<int> parts;
    auto walk = [&](auto&& self, int rest) -> void {
        if (rest == 0) {
            visit(parts);
            return;
        }
        for (int part = 1; part <= rest; ++part) {
            parts.push_back(part);
            self(self, rest - part);
            parts.pop_back();
        }
    };
    walk(walk, total);
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix to_sector_basis(const ProjectorFamily& P, const Matrix& A) {
    return P.basis.adjoint() * A * P.basis;
}

Matrix from_sector_basis(const ProjectorFamily& P, const Matrix& A) {
    return P.basis * A * P.basis.adjoint();
}

Matrix sector_average(const Matrix& A, const ProjectorFamily& P) {
    Matrix B = to_sector_basis(P, A);
    const int dim = static_cast<int>(B.rows());
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
            if (P.spectrum[static_cast<size_t>(j)] != P.spectrum[static_cast<size_t>(k)])
                B(j, k) = 0.0;
    return from_sector_basis(P, B);
}

// Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    Eigen::VectorXd weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    return {es.eigenvalues(), weights};
}

Matrix hermitian_exp(const Matrix& H, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index j = 0; j < phases.size(); ++j)
        phases[j] = std::exp(-kI * es.eigenvalues()[j] * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix replace_qubit_mixed(const Matrix& rho, int n, int site) {
    const int dim = static_cast<int>(rho.rows());
    const int stride = 1 << (n - 1 - site);
    Matrix out = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (i & stride) continue;
        for (int j = 0; j < dim; ++j) {
            if (j & stride) continue;
            const Complex t = 0.5 * (rho(i, j) + rho(i | stride, j | stride));
            out(i, j) = t;
            out(i | stride, j | stride) = t;
        }
    }
    return out;
}

}  // namespace

ProjectorFamily ProjectorFamily::build(std::vector<DenseOperator> projectors) {
    if (projectors.empty()) throw std::invalid_argument("projector family needs at least one part");
    const int n = projectors.front().n;
    for (const auto& part : projectors) {
        if (part.n != n)
            throw std::invalid_argument("projector family parts disagree on qubit count");
        part.check_hermitian(1e-10);
        if (operator_norm(part.m * part.m - part.m) > 1e-10)
            throw std::invalid_argument("projector family part is not idempotent");
    }
    for (size_t a = 0; a < projectors.size(); ++a)
        for (size_t b = a + 1; b < projectors.size(); ++b)
            if (operator_norm(commutator(projectors[a].m, projectors[b].m)) > 1e-10)
                throw std::invalid_argument("projector family parts do not commute");

    ProjectorFamily family;
    family.n = n;
    const int dim = static_cast<int>(projectors.front().m.rows());
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& part : projectors) sum += part.m;
    family.parts = std::move(projectors);
    family.total = DenseOperator{n, sum};

    Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
    family.spectrum.reserve(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        const double lambda = es.eigenvalues()[j];
        const double rounded = std::round(lambda);
        if (std::abs(lambda - rounded) > 1e-8)
            throw std::invalid_argument("projector sum spectrum is not integer");
        family.spectrum.push_back(static_cast<int>(rounded));
    }
    family.basis = es.eigenvectors();
    return family;
}

DenseOperator project_time_average(const DenseOperator& A, const ProjectorFamily& P) {
    if (A.n != P.n) throw std::invalid_argument("operator and projector family sizes differ");
    return DenseOperator{A.n, sector_average(A.m, P)};
}

Matrix solve_sector_commutator(const Matrix& Y, const ProjectorFamily& P) {
    Matrix B = to_sector_basis(P, Y);
    const int dim = static_cast<int>(B.rows());
    const double scale = 1.0 + B.cwiseAbs().maxCoeff();
    Matrix X = Matrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
            const int gap = P.spectrum[static_cast<size_t>(k)] - P.spectrum[static_cast<size_t>(j)];
            if (gap == 0) {
                if (std::abs(B(j, k)) > 1e-9 * scale)
                    throw std::logic_error(
                        "commutator equation has no solution on diagonal sector blocks");
                continue;
            }
            X(j, k) = B(j, k) / static_cast<double>(gap);
        }
    }
    return from_sector_basis(P, X);
}

Matrix omega_double_integral(const Matrix& Y, const ProjectorFamily& P, int points) {
    if (points < 2) throw std::invalid_argument("quadrature needs at least two points");
    const Matrix B = to_sector_basis(P, Y);
    const int dim = static_cast<int>(B.rows());
    const auto [nodes, weights] = gauss_legendre(points);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    Matrix acc = Matrix::Zero(dim, dim);
    Eigen::VectorXcd phase(dim);
    for (int a = 0; a < points; ++a) {
        const double s1 = 0.5 * (nodes[a] + 1.0);
        const double w1 = 0.5 * weights[a];
        for (int b = 0; b < points; ++b) {
            const double s2 = s1 * 0.5 * (nodes[b] + 1.0);
            const double w2 = s1 * 0.5 * weights[b];
            for (int j = 0; j < dim; ++j)
                phase[j] = std::exp(kI * (two_pi * s2 * P.spectrum[static_cast<size_t>(j)]));
            acc += (w1 * w2) * (phase * phase.adjoint()).cwiseProduct(B);
        }
    }
    return from_sector_basis(P, kI * acc);
}

SWExpansion sw_recursion_dense(const DenseOperator& M, const ProjectorFamily& P, double eps,
                               int p) {
    if (p < 0 || p > 2) throw std::invalid_argument("expansion order must be 0, 1, or 2");
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    if (M.n != P.n) throw std::invalid_argument("coupling and projector family sizes differ");
    M.check_hermitian(1e-10);

    const Matrix& Pm = P.total.m;
    const int dim = static_cast<int>(Pm.rows());

    SWExpansion out;
    out.p = p;
    out.eps = eps;
    out.g.push_back(M.m);
    out.effective = Matrix::Zero(dim, dim);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    for (int q = 1; q <= p + 1; ++q) {
        const Matrix& prev = out.g[static_cast<size_t>(q - 1)];
        const Matrix avg = sector_average(prev, P);
        out.effective += avg;
        const Matrix rhs = eps * (prev - avg);

        Matrix omega_q = solve_sector_commutator(rhs, P);
        const Matrix via_integral = omega_double_integral(rhs, P);
        const double scale = 1.0 + operator_norm(omega_q);
        if (operator_norm(omega_q - two_pi * via_integral) > 1e-8 * scale)
            throw std::logic_error("sector solve and quadrature disagree");
        out.omegas.push_back(std::move(omega_q));

        if (q > p) break;
        Matrix g = Matrix::Zero(dim, dim);
        for_each_composition(q, [&](const std::vector<int>& parts) {
            const int k = static_cast<int>(parts.size());
            Matrix nested = M.m;
            for (int idx = k - 1; idx >= 0; --idx)
                nested = commutator(out.omegas[static_cast<size_t>(parts[idx] - 1)], nested);
            g += (parity_sign(k) / factorial(k)) * nested;
        });
        for_each_composition(q + 1, [&](const std::vector<int>& parts) {
            const int k = static_cast<int>(parts.size());
            if (k < 2) return;
            Matrix nested = Pm;
            for (int idx = k - 1; idx >= 0; --idx)
                nested = commutator(out.omegas[static_cast<size_t>(parts[idx] - 1)], nested);
            g += (parity_sign(k) / (factorial(k) * eps)) * nested;
        });
        out.g.push_back(std::move(g));
    }

    out.omega = Matrix::Zero(dim, dim);
    for (const Matrix& w : out.omegas) out.omega += w;

    const Matrix base = eps * M.m + Pm;
    Matrix series = base;
    Matrix term = base;
    const double omega_norm = operator_norm(out.omega);
    const double base_norm = operator_norm(base);
    double term_bound = base_norm;
    for (int k = 1; k <= 200; ++k) {
        term = (-1.0 / k) * commutator(out.omega, term);
        series += term;
        term_bound *= 2.0 * omega_norm / (k + 1);
        if (term_bound * std::exp(2.0 * omega_norm) < 1e-12 * (1.0 + base_norm)) break;
    }

    Matrix collected = Matrix::Zero(dim, dim);
    for (const Matrix& gq : out.g) collected += gq;
    out.remainder = (series + commutator(out.omega, Pm) - Pm - eps * collected) / eps;
    return out;
}

SWConstants sw_constants(double star_norm_M, double star_norm_P, double w, int p) {
    if (star_norm_M <= 0 || star_norm_P <= 0 || w <= 0)
        throw std::invalid_argument("norm inputs must be positive");
    if (p < 0) throw std::invalid_argument("order must be non-negative");

    SWConstants out;
    out.gammas.push_back(star_norm_M);
    for (int q = 1; q <= p; ++q) {
        double total = 0.0;
        for_each_composition(q, [&](const std::vector<int>& parts) {
            const int k = static_cast<int>(parts.size());
            double prod = 1.0;
            for (int part : parts) prod *= out.gammas[static_cast<size_t>(part - 1)];
            total += std::pow(2.0 * w, k) / factorial(k) * star_norm_M * prod;
        });
        for_each_composition(q + 1, [&](const std::vector<int>& parts) {
            const int k = static_cast<int>(parts.size());
            if (k < 2 || k > q) return;
            double prod = 1.0;
            for (int part : parts) prod *= out.gammas[static_cast<size_t>(part - 1)];
            total += std::pow(2.0 * w, k) / factorial(k) * prod * star_norm_P;
        });
        out.gammas.push_back(total);
    }

    for (int q = 0; q < p; ++q) out.w_p = std::max(out.w_p, w * out.gammas[static_cast<size_t>(q)]);
    double biggest = std::max(star_norm_M, star_norm_P);
    for (int j = 1; j <= p; ++j) {
        double w_j = 0.0;
        for (int q = 0; q < j; ++q) w_j = std::max(w_j, w * out.gammas[static_cast<size_t>(q)]);
        biggest = std::max(biggest, w_j);
    }
    out.c_p = 2.0 * biggest * std::exp(2.0 * p * biggest);
    return out;
}

SWRun run_sw(const DenseOperator& M, const ProjectorFamily& P, const DenseOperator& H0, int p,
             const DenseState& initial, const DenseOperator& O, double tau_target, double eps,
             double gamma, double tol) {
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    if (gamma < 0) throw std::invalid_argument("gamma must be non-negative");
    if (tau_target < 0) throw std::invalid_argument("tau_target must be non-negative");
    if (tol <= 0) throw std::invalid_argument("tol must be positive");
    const double o_scale = 1.0 + operator_norm(O.m);
    if (operator_norm(commutator(O.m, P.total.m)) > 1e-8 * o_scale)
        throw std::invalid_argument("observable must commute with the projector sum");

    SWRun out;
    out.t_sim = tau_target / std::pow(eps, p + 1);
    const Matrix h_sim = eps * M.m + P.total.m;
    const int n = M.n;

    DenseState sim = initial;
    if (gamma == 0) {
        const Matrix u = hermitian_exp(h_sim, out.t_sim);
        sim.rho = u * initial.rho * u.adjoint();
    } else {
        auto rhs = [&](double, const Matrix& rho) {
            Matrix d = -kI * commutator(h_sim, rho);
            for (int site = 0; site < n; ++site)
                d += gamma * (replace_qubit_mixed(rho, n, site) - rho);
            return d;
        };
        auto hermitize = [](Matrix& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); };
        sim.rho = rk45_integrate_projected(initial.rho, 0.0, out.t_sim, tol, rhs, hermitize,
                                           "sw lindblad");
    }

    DenseState target = initial;
    const Matrix u_target = hermitian_exp(H0.m, tau_target);
    target.rho = u_target * initial.rho * u_target.adjoint();

    out.observable_sim = expectation(sim, O);
    out.observable_target = expectation(target, O);
    out.abs_error = std::abs(out.observable_sim - out.observable_target);
    return out;
}

SWDemo sw_demo(int n, int p) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("demo chain needs even n >= 4");
    if (p != 0 && p != 1) throw std::invalid_argument("demo supports orders 0 and 1");

    std::vector<int> all_sites(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) all_sites[static_cast<size_t>(s)] = s;
    const SupportSet full(all_sites);
    const Lattice chain = Lattice::chain(n);

    Matrix bond = Matrix::Zero(4, 4);
    bond(1, 1) = 1.0;
    bond(2, 2) = 1.0;
    Matrix hop = Matrix::Zero(4, 4);
    hop(1, 2) = 1.0;
    hop(2, 1) = 1.0;

    std::vector<DenseOperator> parts;
    LocalOperator p_local{chain, {}, std::nullopt};
    for (int b = 0; b + 1 < n; b += 2) {
        const SupportSet support{b, b + 1};
        parts.push_back(DenseOperator{n, embed(bond, support, full)});
        p_local.terms.push_back(LocalTerm::dense(support, bond));
    }

    SWDemo demo;
    demo.n = n;
    demo.p = p;
    demo.P = ProjectorFamily::build(std::move(parts));
    demo.star_norm_P = star_norm(p_local);

    LocalOperator m_local{chain, {}, std::nullopt};
    if (p == 0) {
        for (int b = 0; b + 1 < n; ++b)
            m_local.terms.push_back(LocalTerm::dense(SupportSet{b, b + 1}, hop));
        demo.M = assemble_dense(m_local);
        demo.H0 = project_time_average(demo.M, demo.P);
        demo.w = 4.0;
    } else {
        std::vector<DenseOperator> window_parts;
        window_parts.push_back(DenseOperator{4, embed(bond, SupportSet{0, 1}, SupportSet{0, 1, 2, 3})});
        window_parts.push_back(DenseOperator{4, embed(bond, SupportSet{2, 3}, SupportSet{0, 1, 2, 3})});
        const ProjectorFamily window = ProjectorFamily::build(std::move(window_parts));
        const Matrix hop_window = embed(hop, SupportSet{1, 2}, SupportSet{0, 1, 2, 3});
        const Matrix stripped =
            hop_window - project_time_average(DenseOperator{4, hop_window}, window).m;
        for (int b = 1; b + 2 < n; b += 2)
            m_local.terms.push_back(
                LocalTerm::dense(SupportSet{b - 1, b, b + 1, b + 2}, stripped));
        demo.M = assemble_dense(m_local);
        const Matrix x_hat = solve_sector_commutator(demo.M.m, demo.P);
        const Matrix second = -0.5 * commutator(x_hat, demo.M.m);
        demo.H0 = project_time_average(DenseOperator{n, second}, demo.P);
        demo.w = 16.0;
    }
    demo.star_norm_M = star_norm(m_local);

    demo.O = jw_mode_number(n, n / 2);

    const double theta = std::numbers::pi / 8.0;
    Matrix bond_single(4, 1);
    bond_single.setZero();
    bond_single(1, 0) = std::cos(theta);
    bond_single(2, 0) = std::sin(theta);
    Matrix bond_empty(4, 1);
    bond_empty.setZero();
    bond_empty(0, 0) = 1.0;

    Matrix psi = Matrix::Ones(1, 1);
    const int bonds = n / 2;
    for (int b = 0; b < bonds; ++b)
        psi = kron(psi, p == 1 && b == bonds - 1 ? bond_empty : bond_single);
    DenseState initial;
    initial.n = n;
    initial.rho = psi * psi.adjoint();
    demo.initial = initial;

    return demo;
}

}  // namespace effsim
