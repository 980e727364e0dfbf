#include "effsim/trotter.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace effsim {

namespace {

void append_stage(std::vector<Stage>& stages, int slot, double coeff) {
    if (!stages.empty() && stages.back().slot == slot) {
        stages.back().coeff += coeff;
        return;
    }
    stages.push_back({slot, coeff});
}

void append_scaled(std::vector<Stage>& out, const std::vector<Stage>& base, double scale) {
    for (const Stage& s : base) append_stage(out, s.slot, s.coeff * scale);
}

std::vector<int> touched_modes(const QuadraticHamiltonian& H) {
    std::vector<int> modes;
    const int n = static_cast<int>(H.A.rows());
    for (int j = 0; j < n; j += 2) {
        bool hit = false;
        for (int r = j; r < j + 2 && !hit; ++r) {
            for (int k = 0; k < n; ++k) {
                if (H.A(r, k) != 0.0) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) modes.push_back(j / 2);
    }
    return modes;
}

bool modes_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
    for (int m : a) {
        if (std::find(b.begin(), b.end(), m) != b.end()) return false;
    }
    return true;
}

void check_slot_commutes(const std::vector<const QuadraticHamiltonian*>& slot) {
    std::vector<std::vector<int>> supports;
    supports.reserve(slot.size());
    for (const auto* H : slot) supports.push_back(touched_modes(*H));
    for (std::size_t i = 0; i < slot.size(); ++i) {
        for (std::size_t j = i + 1; j < slot.size(); ++j) {
            if (modes_disjoint(supports[i], supports[j])) continue;
            const RealMatrix comm =
                slot[i]->A * slot[j]->A - slot[j]->A * slot[i]->A;
            if (comm.cwiseAbs().maxCoeff() > 1e-12) {
                throw std::invalid_argument(
                    "even_odd_split: non-commuting bonds in one slot");
            }
        }
    }
}

RealMatrix depol_weight(int N, const DepolSpec& spec) {
    std::vector<char> noisy(static_cast<std::size_t>(N), 0);
    for (int m : spec.modes) noisy[static_cast<std::size_t>(m)] = 1;
    const double keep = 1.0 - spec.p;
    RealMatrix W = RealMatrix::Ones(2 * N, 2 * N);
    for (int j = 0; j < 2 * N; ++j) {
        for (int k = 0; k < 2 * N; ++k) {
            const int mj = j / 2;
            const int mk = k / 2;
            const int count = (mj == mk) ? noisy[static_cast<std::size_t>(mj)]
                                         : noisy[static_cast<std::size_t>(mj)] +
                                               noisy[static_cast<std::size_t>(mk)];
            if (count == 1) {
                W(j, k) = keep;
            } else if (count == 2) {
                W(j, k) = keep * keep;
            }
        }
    }
    return W;
}

void matrix_power_apply(RealMatrix& gamma, const RealMatrix& step, long long reps) {
    RealMatrix total = RealMatrix::Identity(step.rows(), step.cols());
    RealMatrix base = step;
    long long n = reps;
    while (n > 0) {
        if (n & 1) total = total * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    gamma = total * gamma * total.transpose();
}

double composition_sum(const std::vector<double>& absx, int j, int p) {
    // Recursively distributes p derivative orders over stages 1..j-1,
    // accumulating (j-1)!/(n_1! ... n_{j-1}!) |x_1|^{n_1} ... |x_{j-1}|^{n_{j-1}}.
    struct Rec {
        const std::vector<double>& x;
        int last;
        double total = 0.0;
        void walk(int k, int remaining, double factor) {
            if (k == last) {
                double term = factor * std::pow(x[static_cast<std::size_t>(k)],
                                                remaining);
                for (int m = 2; m <= remaining; ++m) term /= m;
                total += term;
                return;
            }
            for (int n = 0; n <= remaining; ++n) {
                double term = std::pow(x[static_cast<std::size_t>(k)], n);
                for (int m = 2; m <= n; ++m) term /= m;
                walk(k + 1, remaining - n, factor * term);
            }
        }
    };
    Rec rec{absx, j - 2};
    rec.walk(0, p, 1.0);
    double fact = 1.0;
    for (int m = 2; m <= j - 1; ++m) fact *= m;
    return fact * rec.total;
}

}  // namespace

void ProductFormula::check() const {
    if (order < 1) throw std::invalid_argument("ProductFormula: order must be >= 1");
    if (slots < 1) throw std::invalid_argument("ProductFormula: slots must be >= 1");
    if (stages.empty()) throw std::invalid_argument("ProductFormula: no stages");
    std::vector<double> sums(static_cast<std::size_t>(slots), 0.0);
    for (const Stage& s : stages) {
        if (s.slot < 0 || s.slot >= slots) {
            throw std::invalid_argument("ProductFormula: stage slot out of range");
        }
        sums[static_cast<std::size_t>(s.slot)] += s.coeff;
    }
    for (double v : sums) {
        if (std::abs(v - 1.0) > 1e-12) {
            throw std::invalid_argument(
                "ProductFormula: slot coefficients must sum to one");
        }
    }
}

ProductFormula suzuki_formula(int p, int K) {
    if (K < 2) throw std::invalid_argument("suzuki_formula: K must be >= 2");
    if (p < 1) throw std::invalid_argument("suzuki_formula: order must be >= 1");
    if (p > 2 && p % 2 != 0) {
        throw std::invalid_argument("suzuki_formula: odd orders above 1 unsupported");
    }
    ProductFormula f;
    f.order = p;
    f.slots = K;
    if (p == 1) {
        for (int j = 0; j < K; ++j) append_stage(f.stages, j, 1.0);
        f.check();
        return f;
    }
    std::vector<Stage> base;
    for (int j = 0; j < K; ++j) append_stage(base, j, 0.5);
    for (int j = K - 1; j >= 0; --j) append_stage(base, j, 0.5);
    for (int k = 2; 2 * k <= p; ++k) {
        const double u = 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * k - 1.0)));
        std::vector<Stage> next;
        append_scaled(next, base, u);
        append_scaled(next, base, u);
        append_scaled(next, base, 1.0 - 4.0 * u);
        append_scaled(next, base, u);
        append_scaled(next, base, u);
        base = std::move(next);
    }
    f.stages = std::move(base);
    f.check();
    return f;
}

OrderCertificate verify_formula_order(const ProductFormula& f, int trials,
                                      std::uint64_t seed) {
    f.check();
    if (trials < 5) throw std::invalid_argument("verify_formula_order: trials must be >= 5");
    constexpr int dim = 8;
    const std::vector<double> eps = {0.05,  0.0707, 0.1,   0.1414,
                                     0.2,   0.2828, 0.4,   0.5};
    double slope_sum = 0.0;
    double r2_sum = 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        std::vector<Matrix> slots(static_cast<std::size_t>(f.slots));
        Matrix total = Matrix::Zero(dim, dim);
        for (auto& H : slots) {
            Matrix G(dim, dim);
            for (int r = 0; r < dim; ++r) {
                for (int c = 0; c < dim; ++c) G(r, c) = Complex(gauss(rng), gauss(rng));
            }
            H = 0.5 * (G + G.adjoint());
            H /= operator_norm(H);
            total += H;
        }
        std::vector<double> xs, ys;
        for (double e : eps) {
            const Matrix exact = (Complex(0.0, -1.0) * e * total).exp();
            Matrix S = Matrix::Identity(dim, dim);
            for (const Stage& st : f.stages) {
                const Matrix U =
                    (Complex(0.0, -1.0) * (st.coeff * e) *
                     slots[static_cast<std::size_t>(st.slot)])
                        .exp();
                S = U * S;
            }
            const double err = operator_norm(S - exact);
            xs.push_back(std::log(e));
            ys.push_back(std::log(err));
        }
        const double n = static_cast<double>(xs.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
            syy += ys[i] * ys[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double corr =
            (n * sxy - sx * sy) /
            std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        slope_sum += slope;
        r2_sum += corr * corr;
    }
    OrderCertificate cert;
    cert.slope = slope_sum / trials;
    cert.r_squared = r2_sum / trials;
    cert.certified_order = static_cast<int>(std::lround(cert.slope)) - 1;
    if (cert.r_squared < 0.99) {
        throw std::runtime_error("verify_formula_order: inconclusive log-log fit");
    }
    if (cert.certified_order < f.order) {
        std::ostringstream msg;
        msg << "verify_formula_order: certified order " << cert.certified_order
            << " below declared order " << f.order;
        throw std::runtime_error(msg.str());
    }
    return cert;
}

std::vector<QuadraticHamiltonian> chain_bond_hamiltonians(int N, double h, double g,
                                                          bool periodic) {
    if (N < 2) throw std::invalid_argument("chain_bond_hamiltonians: N must be >= 2");
    if (periodic && N % 2 != 0) {
        throw std::invalid_argument(
            "chain_bond_hamiltonians: periodic chain needs even N");
    }
    const int B = periodic ? N : N - 1;
    std::vector<QuadraticHamiltonian> bonds;
    bonds.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        const int l = b;
        const int r = (b + 1) % N;
        RealMatrix A = RealMatrix::Zero(2 * N, 2 * N);
        const double wl = (!periodic && b == 0) ? 1.0 : 0.5;
        const double wr = (!periodic && b == N - 2) ? 1.0 : 0.5;
        A(2 * l, 2 * l + 1) += h * wl;
        A(2 * l + 1, 2 * l) -= h * wl;
        A(2 * r, 2 * r + 1) += h * wr;
        A(2 * r + 1, 2 * r) -= h * wr;
        A(2 * l, 2 * r) += 2.0 * g;
        A(2 * r, 2 * l) -= 2.0 * g;
        QuadraticHamiltonian H;
        H.N = N;
        H.A = std::move(A);
        H.label = "bond" + std::to_string(b);
        bonds.push_back(std::move(H));
    }
    return bonds;
}

QuadraticHamiltonian total_hamiltonian(const std::vector<QuadraticHamiltonian>& bonds) {
    if (bonds.empty()) throw std::invalid_argument("total_hamiltonian: no bonds");
    QuadraticHamiltonian H;
    H.N = bonds.front().N;
    H.A = RealMatrix::Zero(2 * H.N, 2 * H.N);
    for (const auto& b : bonds) {
        if (b.N != H.N) {
            throw std::invalid_argument("total_hamiltonian: mode count mismatch");
        }
        H.A += b.A;
    }
    H.label = "total";
    H.check();
    return H;
}

SplitHamiltonian even_odd_split(const std::vector<QuadraticHamiltonian>& bonds, int d) {
    if (d != 1) {
        throw std::invalid_argument(
            "even_odd_split: quadratic path supports d = 1 only");
    }
    if (bonds.empty()) throw std::invalid_argument("even_odd_split: no bonds");
    const int N = bonds.front().N;
    for (const auto& b : bonds) {
        b.check();
        if (b.N != N) throw std::invalid_argument("even_odd_split: mode count mismatch");
    }
    SplitHamiltonian split;
    split.K = 2;
    split.lattice = Lattice::chain(N, false);
    split.slot_sizes.assign(2, 0);
    std::vector<std::vector<const QuadraticHamiltonian*>> groups(2);
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        groups[b % 2].push_back(&bonds[b]);
        ++split.slot_sizes[b % 2];
    }
    for (auto& g : groups) check_slot_commutes(g);
    for (int s = 0; s < 2; ++s) {
        QuadraticHamiltonian H;
        H.N = N;
        H.A = RealMatrix::Zero(2 * N, 2 * N);
        for (const auto* b : groups[static_cast<std::size_t>(s)]) H.A += b->A;
        H.label = (s == 0) ? "even" : "odd";
        split.quad_slots.push_back(std::move(H));
    }
    return split;
}

SplitHamiltonian even_odd_split(const Lattice& lattice, const std::vector<LocalTerm>& bonds,
                                int d) {
    if (d != 1 && d != 2) {
        throw std::invalid_argument("even_odd_split: d must be 1 or 2");
    }
    if (lattice.dim != d) {
        throw std::invalid_argument("even_odd_split: lattice dimension mismatch");
    }
    if (bonds.empty()) throw std::invalid_argument("even_odd_split: no bonds");
    const int K = (d == 1) ? 2 : 4;
    SplitHamiltonian split;
    split.K = K;
    split.lattice = lattice;
    split.term_slots.assign(static_cast<std::size_t>(K), {});
    split.slot_sizes.assign(static_cast<std::size_t>(K), 0);
    for (const LocalTerm& term : bonds) {
        if (term.support.sites().size() != 2) {
            throw std::invalid_argument("even_odd_split: bond must touch two sites");
        }
        const int s1 = term.support.sites()[0];
        const int s2 = term.support.sites()[1];
        if (lattice.distance(s1, s2) != 1) {
            throw std::invalid_argument("even_odd_split: non-nearest-neighbour bond");
        }
        const auto c1 = lattice.coords(s1);
        const auto c2 = lattice.coords(s2);
        int axis = -1;
        for (int k = 0; k < d; ++k) {
            if (c1[static_cast<std::size_t>(k)] != c2[static_cast<std::size_t>(k)]) {
                if (axis >= 0) {
                    throw std::invalid_argument(
                        "even_odd_split: bond must be axis-aligned");
                }
                axis = k;
            }
        }
        if (axis < 0) throw std::invalid_argument("even_odd_split: degenerate bond");
        const int lo = std::min(c1[static_cast<std::size_t>(axis)],
                                c2[static_cast<std::size_t>(axis)]);
        const int hi = std::max(c1[static_cast<std::size_t>(axis)],
                                c2[static_cast<std::size_t>(axis)]);
        const int anchor =
            (hi - lo == 1) ? lo : hi;  // wrapped bond anchors at the high end
        const int slot = (d == 1) ? (anchor % 2) : (2 * axis + anchor % 2);
        split.term_slots[static_cast<std::size_t>(slot)].push_back(term);
        ++split.slot_sizes[static_cast<std::size_t>(slot)];
    }
    for (const auto& slot : split.term_slots) {
        for (std::size_t i = 0; i < slot.size(); ++i) {
            for (std::size_t j = i + 1; j < slot.size(); ++j) {
                bool overlap = false;
                for (int a : slot[i].support.sites()) {
                    if (std::find(slot[j].support.sites().begin(),
                                  slot[j].support.sites().end(),
                                  a) != slot[j].support.sites().end()) {
                        overlap = true;
                        break;
                    }
                }
                if (overlap) {
                    throw std::invalid_argument(
                        "even_odd_split: overlapping bonds in one slot");
                }
            }
        }
    }
    return split;
}

TrotterRun run_trotter(const CovarianceState& initial, const SplitHamiltonian& split,
                       const ProductFormula& f, double tau, int T,
                       const std::optional<DepolSpec>& noise, NoisePlacement placement) {
    f.check();
    initial.check();
    if (T < 1) throw std::invalid_argument("run_trotter: T must be >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("run_trotter: tau must be >= 0");
    if (split.quad_slots.empty()) {
        throw std::invalid_argument("run_trotter: split carries no quadratic slots");
    }
    if (f.slots != split.K) {
        throw std::invalid_argument("run_trotter: formula and split slot counts differ");
    }
    const int N = initial.modes();
    for (const auto& H : split.quad_slots) {
        if (H.N != N) throw std::invalid_argument("run_trotter: mode count mismatch");
    }
    const double eps = tau / T;
    std::vector<RealMatrix> stage_orth;
    stage_orth.reserve(f.stages.size());
    for (const Stage& st : f.stages) {
        stage_orth.push_back(orthogonal_exp(
            split.quad_slots[static_cast<std::size_t>(st.slot)].A, st.coeff * eps));
    }
    TrotterRun out;
    out.state = initial;
    const bool noisy = noise.has_value() && noise->p > 0.0;
    if (!noisy) {
        RealMatrix step = RealMatrix::Identity(2 * N, 2 * N);
        for (const RealMatrix& O : stage_orth) step = O * step;
        matrix_power_apply(out.state.gamma, step, T);
    } else {
        std::vector<RealMatrix> weights;
        weights.reserve(f.stages.size());
        for (const Stage& st : f.stages) {
            DepolSpec spec = *noise;
            if (placement == NoisePlacement::PerLayerTouchedModes) {
                spec.modes =
                    touched_modes(split.quad_slots[static_cast<std::size_t>(st.slot)]);
            }
            weights.push_back(depol_weight(N, spec));
        }
        for (int step = 0; step < T; ++step) {
            for (std::size_t i = 0; i < stage_orth.size(); ++i) {
                out.state.gamma =
                    (stage_orth[i] * out.state.gamma * stage_orth[i].transpose())
                        .cwiseProduct(weights[i]);
            }
        }
    }
    out.state.gamma = 0.5 * (out.state.gamma - out.state.gamma.transpose()).eval();
    out.observable = mean_occupation(out.state);
    return out;
}

double quad_operator_norm(const QuadraticHamiltonian& H) {
    H.check();
    Eigen::EigenSolver<RealMatrix> es(H.A);
    double sum = 0.0;
    for (int k = 0; k < H.A.rows(); ++k) {
        const double im = es.eigenvalues()(k).imag();
        if (im > 0.0) sum += im;
    }
    return 0.5 * sum;
}

double formula_constant(const ProductFormula& f, int p, int d) {
    f.check();
    if (p < 1) throw std::invalid_argument("formula_constant: p must be >= 1");
    if (d < 1) throw std::invalid_argument("formula_constant: d must be >= 1");
    const int M = static_cast<int>(f.stages.size());
    std::vector<double> absx;
    absx.reserve(f.stages.size());
    for (const Stage& s : f.stages) absx.push_back(std::abs(s.coeff));
    double total = 0.0;
    for (int j = 2; j <= M; ++j) {
        const double inner = composition_sum(absx, j, p);
        const double geom =
            std::pow(static_cast<double>(2 * p + 2 * j - 1), static_cast<double>(p * d));
        total += absx[static_cast<std::size_t>(j - 1)] * inner * geom *
                 std::exp(static_cast<double>(p - j + 1));
    }
    double pref = std::exp(static_cast<double>(-p));
    for (int m = 2; m <= p + 1; ++m) pref /= m;
    return pref * total;
}

double trotter_bound(const TrotterBoundParams& params) {
    if (params.p < 1 || params.d < 1 || params.T < 1 || params.sizeX < 1) {
        throw std::invalid_argument("trotter_bound: p, d, T, |X| must be >= 1");
    }
    if (!(params.a0 >= 1.0) || !(params.Z >= 1.0) || !(params.c_LR > 0.0) ||
        !(params.tau >= 0.0) || !(params.normO >= 0.0) || !(params.Cp >= 0.0)) {
        throw std::invalid_argument("trotter_bound: invalid parameters");
    }
    const double eps = params.tau / params.T;
    const double x = params.c_LR * params.tau;
    const double pref =
        std::pow(params.a0, static_cast<double>((params.d - 1) * (params.p - 1))) /
        (params.Z * params.Z);
    return pref * params.Cp * static_cast<double>(params.sizeX) *
           static_cast<double>(params.sizeX) * params.normO * x *
           nu_d(x, params.d, params.a0) * std::pow(params.c_LR * eps, params.p);
}

}  // namespace effsim
