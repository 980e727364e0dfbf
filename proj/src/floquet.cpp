#include "effsim/floquet.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "effsim/dense.hpp"
#include "effsim/ode.hpp"

namespace effsim {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

const QuadraticHamiltonian& quad_of(const PeriodicTerm& term) {
    const auto* q = std::get_if<QuadraticHamiltonian>(&term.generator);
    if (!q) throw std::invalid_argument("term generator is not quadratic");
    return *q;
}

const LocalOperator& local_of(const PeriodicTerm& term) {
    const auto* l = std::get_if<LocalOperator>(&term.generator);
    if (!l) throw std::invalid_argument("term generator is not a local operator");
    return *l;
}

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

}  // namespace

bool PeriodicDrive::quadratic() const {
    for (const auto& term : terms)
        if (!std::holds_alternative<QuadraticHamiltonian>(term.generator)) return false;
    return true;
}

void PeriodicDrive::check(double tol) const {
    if (period <= 0) throw std::invalid_argument("period must be positive");
    if (terms.empty()) throw std::invalid_argument("drive has no terms");
    for (const auto& term : terms) {
        if (!term.coeff) throw std::invalid_argument("term has no coefficient function");
        for (int k = 0; k < 7; ++k) {
            const double t = period * (k + 0.29) / 7.0;
            const double a = term.coeff(t);
            const double b = term.coeff(t + period);
            if (std::abs(a - b) > tol * (1.0 + std::abs(a)))
                throw std::invalid_argument("drive coefficient is not periodic");
        }
    }
}

std::vector<DriveTerm> PeriodicDrive::drive_terms() const {
    std::vector<DriveTerm> out;
    out.reserve(terms.size());
    for (const auto& term : terms) out.push_back({quad_of(term), term.coeff});
    return out;
}

PeriodicDrive PeriodicDrive::chain_demo(int N, double h0, double h1, double g0, double g1,
                                        double period, bool periodic) {
    PeriodicDrive d;
    d.period = period;
    const double w = 2.0 * std::numbers::pi / period;
    d.terms.push_back({[h0, h1, w](double t) { return h0 + h1 * std::cos(w * t); },
                       build_quadratic(N, QuadSpec::mu())});
    d.terms.push_back({[g0, g1, w](double t) { return g0 + g1 * std::sin(w * t); },
                       build_quadratic(N, QuadSpec::iq(periodic))});
    d.check();
    return d;
}

PeriodicDrive PeriodicDrive::chain_demo_dense(int n, double h0, double h1, double g0, double g1,
                                              double period) {
    Matrix Z(2, 2), Y(2, 2), X(2, 2);
    Z << 1, 0, 0, -1;
    Y << 0, -kI, kI, 0;
    X << 0, 1, 1, 0;

    const Lattice lat = Lattice::chain(n);
    LocalOperator sites{lat, {}, LocalityBounds{0.0, 0.0, 0.5}};
    for (int i = 0; i < n; ++i) sites.terms.push_back(LocalTerm::dense({i}, -0.5 * Z));
    sites.check();

    LocalOperator bonds{lat, {}, LocalityBounds{1.0, 2.0, 1.0}};
    for (int i = 0; i + 1 < n; ++i) bonds.terms.push_back(LocalTerm::dense({i, i + 1}, kron(Y, X)));
    bonds.check();

    PeriodicDrive d;
    d.period = period;
    const double w = 2.0 * std::numbers::pi / period;
    d.terms.push_back(
        {[h0, h1, w](double t) { return h0 + h1 * std::cos(w * t); }, std::move(sites)});
    d.terms.push_back(
        {[g0, g1, w](double t) { return g0 + g1 * std::sin(w * t); }, std::move(bonds)});
    d.check();
    return d;
}

Matrix FMExpansion::omega_at(double t) const {
    if (!dense) throw std::invalid_argument("flow generators exist on the dense path only");
    Matrix out = Matrix::Zero(h_eff_dense.rows(), h_eff_dense.cols());
    for (const auto& om : omegas) out += om.evaluate(t);
    return out;
}

Matrix FMExpansion::omega_dot_at(double t) const {
    if (!dense) throw std::invalid_argument("flow generators exist on the dense path only");
    Matrix out = Matrix::Zero(h_eff_dense.rows(), h_eff_dense.cols());
    for (const auto& om : omegas) out += om.derivative().evaluate(t);
    return out;
}

Matrix FMExpansion::conjugated_drive_at(double t, int* terms_used) const {
    const Matrix H = h_poly.evaluate(t);
    const Matrix Om = omega_at(t);
    const Matrix Od = omega_dot_at(t);
    const double x = 2.0 * operator_norm(Om);
    const double scale = operator_norm(H) + operator_norm(Od);

    Matrix ad_h = H;
    Matrix ad_od = Od;
    Matrix sum = H - kI * Od;
    int k = 0;
    while (std::pow(x, k + 1) / factorial(k + 1) * std::exp(x) * scale >
           1e-12 * (1.0 + operator_norm(H))) {
        ++k;
        if (k > 60)
            throw std::runtime_error("truncation not converged: conjugation series tail too slow");
        ad_h = Om * ad_h - ad_h * Om;
        ad_od = Om * ad_od - ad_od * Om;
        const double s = parity_sign(k);
        sum += (s / factorial(k)) * ad_h - kI * (s / factorial(k + 1)) * ad_od;
    }
    if (terms_used) *terms_used = k;
    return sum;
}

Matrix FMExpansion::remainder_at(double t, int* terms_used) const {
    return conjugated_drive_at(t, terms_used) - h_eff_dense;
}

void FMExpansion::check(double tol) const {
    if (dense) {
        if ((h_eff_dense - h_eff_dense.adjoint().eval()).cwiseAbs().maxCoeff() > tol)
            throw std::runtime_error("effective Hamiltonian is not Hermitian");
        for (const auto& g : g_means)
            if ((g - g.adjoint().eval()).cwiseAbs().maxCoeff() > tol)
                throw std::runtime_error("degree average is not Hermitian");
        for (const auto& om : omegas)
            if (om.evaluate(0.0).cwiseAbs().maxCoeff() > tol)
                throw std::runtime_error("flow generator does not vanish at t = 0");
    } else {
        h_eff.check();
        for (const auto& v : terms) v.check();
    }
}

FMExpansion magnus_effective_quadratic(const PeriodicDrive& drive, int p, double quad_tol) {
    drive.check();
    if (!drive.quadratic()) throw std::invalid_argument("drive generators must be quadratic");
    if (p < 0 || p > 2) throw std::invalid_argument("p must be 0, 1, or 2");
    if (quad_tol <= 0) throw std::invalid_argument("quad_tol must be positive");

    const double period = drive.period;
    const int K = static_cast<int>(drive.terms.size());
    std::vector<RealMatrix> A;
    std::vector<std::function<double(double)>> f;
    for (const auto& term : drive.terms) {
        const auto& q = quad_of(term);
        q.check();
        if (!A.empty() && q.A.rows() != A.front().rows())
            throw std::invalid_argument("drive terms act on different mode counts");
        A.push_back(q.A);
        f.push_back(term.coeff);
    }
    const int N = quad_of(drive.terms.front()).N;
    const Eigen::Index n2 = A.front().rows();

    FMExpansion out;
    out.p = p;
    out.period = period;
    out.dense = false;

    RealMatrix A0 = RealMatrix::Zero(n2, n2);
    for (int j = 0; j < K; ++j)
        A0 += (integrate_adaptive(f[j], 0.0, period, quad_tol) / period) * A[j];
    out.terms.push_back({N, A0, "degree 0"});

    if (p >= 1) {
        Eigen::MatrixXd S2(K, K);
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k) {
                if (j == k) {
                    S2(j, k) = 0.0;
                    continue;
                }
                auto outer = [&](double s1) {
                    return f[j](s1) * integrate_adaptive(f[k], 0.0, s1, quad_tol * 0.1);
                };
                S2(j, k) = integrate_adaptive(outer, 0.0, period, quad_tol);
            }
        RealMatrix A1 = RealMatrix::Zero(n2, n2);
        for (int j = 0; j < K; ++j)
            for (int k = j + 1; k < K; ++k)
                A1 += (S2(j, k) - S2(k, j)) * (A[j] * A[k] - A[k] * A[j]);
        A1 /= 2.0 * period * period;
        out.terms.push_back({N, A1, "degree 1"});
    }

    if (p >= 2) {
        RealMatrix A2 = RealMatrix::Zero(n2, n2);
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l) {
                    auto inner = [&](double s2) {
                        return f[k](s2) * integrate_adaptive(f[l], 0.0, s2, quad_tol * 0.01);
                    };
                    auto outer = [&](double s1) {
                        return f[j](s1) * integrate_adaptive(inner, 0.0, s1, quad_tol * 0.1);
                    };
                    const double S3 = integrate_adaptive(outer, 0.0, period, quad_tol);
                    const RealMatrix inner_kl = A[k] * A[l] - A[l] * A[k];
                    const RealMatrix inner_kj = A[k] * A[j] - A[j] * A[k];
                    A2 += S3 * ((A[j] * inner_kl - inner_kl * A[j]) +
                                (A[l] * inner_kj - inner_kj * A[l]));
                }
        A2 /= 6.0 * period * period * period;
        out.terms.push_back({N, A2, "degree 2"});
    }

    RealMatrix total = RealMatrix::Zero(n2, n2);
    double power = 1.0;
    for (int q = 0; q <= p; ++q) {
        total += power * out.terms[static_cast<size_t>(q)].A;
        power *= period;
    }
    out.h_eff = {N, total, "effective"};
    out.check();
    return out;
}

FMExpansion fm_recursion_dense(const PeriodicDrive& drive, int p, int grid) {
    drive.check();
    if (drive.quadratic())
        throw std::invalid_argument("dense recursion needs local-operator generators");
    if (p < 0 || p > 3) throw std::invalid_argument("p must be in [0, 3]");

    const double period = drive.period;
    TrigPoly H;
    bool first = true;
    for (const auto& term : drive.terms) {
        const Matrix payload = assemble_dense(local_of(term)).m;
        const TrigPoly piece =
            fit_scalar_trig(term.coeff, period, grid, 1e-9).times(payload);
        H = first ? piece : H + piece;
        first = false;
    }

    FMExpansion out;
    out.p = p;
    out.period = period;
    out.dense = true;
    out.h_poly = H;
    out.h_eff_dense = Matrix::Zero(H.rows(), H.cols());

    std::vector<TrigPoly> omega_dots;
    for (int q = 0; q <= p; ++q) {
        TrigPoly G = H;
        if (q > 0) {
            G = TrigPoly::zero(period, H.rows(), H.cols());
            for_each_composition(q, [&](const std::vector<int>& parts) {
                const int k = static_cast<int>(parts.size());
                TrigPoly nested = H;
                for (int idx = k - 1; idx >= 0; --idx)
                    nested = commutator(out.omegas[static_cast<size_t>(parts[idx] - 1)], nested);
                G = G + (std::complex<double>(parity_sign(k) / factorial(k)) * nested);
            });
            for (int m = 1; m <= q; ++m) {
                for_each_composition(q + 1 - m, [&](const std::vector<int>& parts) {
                    const int k = static_cast<int>(parts.size());
                    TrigPoly nested = omega_dots[static_cast<size_t>(m - 1)];
                    for (int idx = k - 1; idx >= 0; --idx)
                        nested =
                            commutator(out.omegas[static_cast<size_t>(parts[idx] - 1)], nested);
                    G = G + ((kI * parity_sign(k + 1) / factorial(k + 1)) * nested);
                });
            }
        }
        const Matrix mean = G.mean();
        out.g_means.push_back(mean);
        out.h_eff_dense += mean;

        double scale = 0.0;
        for (const auto& c : G.coeffs) scale = std::max(scale, c.cwiseAbs().maxCoeff());
        TrigPoly centered = (G - TrigPoly::constant(period, mean)).truncated(1e-15 * (1.0 + scale));
        TrigPoly omega = std::complex<double>(0.0, -1.0) * centered.integral_from_zero();
        omega_dots.push_back(omega.derivative());
        out.omegas.push_back(std::move(omega));
    }
    out.check();
    return out;
}

FMConstants fm_constants(double star_norm_H, int p) {
    if (star_norm_H <= 0) throw std::invalid_argument("star_norm_H must be positive");
    if (p < 0) throw std::invalid_argument("p must be nonnegative");
    std::vector<double> g(static_cast<size_t>(p) + 1);
    g[0] = star_norm_H;
    for (int q = 1; q <= p; ++q) {
        double total = 0.0;
        for_each_composition(q, [&](const std::vector<int>& parts) {
            double prod = 1.0;
            for (int i : parts) prod *= g[static_cast<size_t>(i - 1)];
            const int k = static_cast<int>(parts.size());
            total += std::pow(2.0, k) / factorial(k) * prod * g[0];
        });
        for (int m = 1; m <= q; ++m) {
            for_each_composition(q + 1 - m, [&](const std::vector<int>& parts) {
                double prod = 1.0;
                for (int i : parts) prod *= g[static_cast<size_t>(i - 1)];
                const int k = static_cast<int>(parts.size());
                total += std::pow(2.0, k + 1) / factorial(k + 1) * prod * g[static_cast<size_t>(m - 1)];
            });
        }
        g[static_cast<size_t>(q)] = total;
    }
    FMConstants out;
    out.gammas = g;
    out.gamma_max = g[0];
    for (int q = 0; q < p; ++q) out.gamma_max = std::max(out.gamma_max, g[static_cast<size_t>(q)]);
    out.c_p = (out.gamma_max + 1.0) * std::exp(4.0 * p * out.gamma_max);
    return out;
}

FloquetRun run_floquet(int N, double h0, double h1, double g0, double g1, int p,
                       double tau_target, double period, double gamma, double tol,
                       bool periodic) {
    if (p != 0 && p != 1) throw std::invalid_argument("p must be 0 or 1");
    if (tau_target <= 0 || period <= 0) throw std::invalid_argument("times must be positive");
    if (gamma < 0) throw std::invalid_argument("gamma must be nonnegative");
    if (tol <= 0) throw std::invalid_argument("tol must be positive");

    const PeriodicDrive drive = PeriodicDrive::chain_demo(N, h0, h1, g0, g1, period, periodic);

    QuadraticHamiltonian target;
    if (p == 0) {
        target = build_quadratic(N, QuadSpec::combo(h0, g0, periodic));
    } else {
        const FMExpansion fm = magnus_effective_quadratic(drive, 1, std::min(tol, 1e-10));
        const double v0 = fm.terms[0].A.cwiseAbs().maxCoeff();
        if (v0 > 1e-9 * (1.0 + std::abs(h1) + std::abs(g1)))
            throw std::invalid_argument("p = 1 needs a zero-mean drive");
        target = fm.terms[1];
    }

    FloquetRun run;
    run.n_periods = std::max<long>(1, std::lround(tau_target / std::pow(period, p + 1)));
    run.t_sim = static_cast<double>(run.n_periods) * period;

    const CovarianceState initial = vacuum_state(N);
    run.observable_target = mean_occupation(evolve_exact(initial, target, tau_target));

    if (gamma == 0.0) {
        const auto terms = drive.drive_terms();
        const Eigen::Index n2 = 2 * static_cast<Eigen::Index>(N);
        auto rhs = [&](double t, const RealMatrix& O) {
            RealMatrix At = RealMatrix::Zero(n2, n2);
            for (const auto& term : terms) At += term.coeff(t) * term.H.A;
            return RealMatrix(At * O);
        };
        RealMatrix O = rk45_integrate(RealMatrix(RealMatrix::Identity(n2, n2)), 0.0, period, tol,
                                      rhs, "floquet period map");
        Eigen::JacobiSVD<RealMatrix> svd(O, Eigen::ComputeThinU | Eigen::ComputeThinV);
        O = svd.matrixU() * svd.matrixV().transpose();
        RealMatrix powered = RealMatrix::Identity(n2, n2);
        RealMatrix base = O;
        long e = run.n_periods;
        while (e > 0) {
            if (e & 1) powered = powered * base;
            base = base * base;
            e >>= 1;
        }
        run.observable_sim = mean_occupation(apply_orthogonal(initial, powered));
    } else {
        const CovarianceState evolved =
            evolve_noisy_ode(initial, drive.drive_terms(),
                             DepolSpec::rate(DepolSpec::all_modes(N), gamma), 0.0, run.t_sim, tol);
        run.observable_sim = mean_occupation(evolved);
    }
    run.abs_error = std::abs(run.observable_sim - run.observable_target);
    return run;
}

}  // namespace effsim
