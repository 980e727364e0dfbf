#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effsim/lattice.hpp"

namespace effsim {

// Quadratic Majorana Hamiltonian H = (i/4) sum_{jk} A_{jk} c_j c_k with A
// real antisymmetric. Mode i owns Majoranas c_{2i} = a_i + a_i^dag and
// c_{2i+1} = -i(a_i - a_i^dag). Constant shifts (e.g. the N/2 in the number
// operator) are not representable and are tracked by callers where they
// matter.
struct QuadraticHamiltonian {
    int N = 0;
    RealMatrix A;
    std::string label;

    void check() const;  // antisymmetry within 1e-12, dimension 2N
};

// Second moments Gamma_{jk} = (i/2) Tr(rho [c_j, c_k]).
struct CovarianceState {
    RealMatrix gamma;

    int modes() const { return static_cast<int>(gamma.rows()) / 2; }
    void check() const;  // antisymmetry 1e-10, singular values <= 1 + 1e-9
};

// Depolarizing noise on a set of modes: probability p per application in the
// discrete picture, rate gamma per unit time in the continuous one.
struct DepolSpec {
    std::vector<int> modes;
    double p = 0.0;
    double gamma = 0.0;

    static DepolSpec probability(std::vector<int> modes, double p);
    static DepolSpec rate(std::vector<int> modes, double gamma);
    static std::vector<int> all_modes(int N);
};

struct QuadSpec {
    enum Kind { Mu, IQ, Combo, CommutatorMuIQ };
    Kind kind = Mu;
    double c1 = 0.0;
    double c2 = 0.0;
    bool periodic = false;

    static QuadSpec mu() { return {Mu, 0, 0, false}; }
    static QuadSpec iq(bool periodic = false) { return {IQ, 0, 0, periodic}; }
    static QuadSpec combo(double c1, double c2, bool periodic = false) {
        return {Combo, c1, c2, periodic};
    }
    // The Hermitian operator [mu, Q] (= -i [mu, iQ]); its A-matrix is the
    // matrix commutator [A_mu, A_iQ].
    static QuadSpec commutator(bool periodic = false) {
        return {CommutatorMuIQ, 0, 0, periodic};
    }
};

// mu = sum_i a_i^dag a_i (modulo its constant N/2), iQ with
// Q = sum_i c_{2i} c_{2i+2} over the chain (plus the wrap bond c_{2N-2} c_0
// when periodic), linear combinations c1 * mu + c2 * iQ, and the commutator
// [mu, Q].
QuadraticHamiltonian build_quadratic(int N, const QuadSpec& spec);

// |0>^N: per-mode blocks [[0,-1],[1,0]].
CovarianceState vacuum_state(int N);

// Gamma(t) = e^{At} Gamma e^{A^T t}; the exponential is orthogonal.
CovarianceState evolve_exact(const CovarianceState& state, const QuadraticHamiltonian& H, double t);

// Applies a precomputed one-period (or one-stage) orthogonal directly.
CovarianceState apply_orthogonal(const CovarianceState& state, const RealMatrix& O);

// n_i = (1 + Gamma_{2i,2i+1}) / 2.
std::vector<double> mode_occupations(const CovarianceState& state);
double mean_occupation(const CovarianceState& state);

// Per listed mode i, scales every entry with an index in {2i, 2i+1} by
// (1 - p); an entry touching two listed modes picks up (1 - p)^2.
CovarianceState depolarize_modes(const CovarianceState& state, const DepolSpec& spec);

// One time-dependent piece of a drive: coeff(t) * H.
struct DriveTerm {
    QuadraticHamiltonian H;
    std::function<double(double)> coeff;
};

// Integrates dGamma/dt = A(t) Gamma - Gamma A(t) - gamma * D o Gamma where
// D_{jk} counts the distinct noisy modes among the owners of j and k.
CovarianceState evolve_noisy_ode(const CovarianceState& state, const std::vector<DriveTerm>& drive,
                                 const DepolSpec& noise, double t0, double t1, double tol);

// e^{As} for antisymmetric A, accurate to ~1e-12 relative.
RealMatrix orthogonal_exp(const RealMatrix& A, double s);

}  // namespace effsim
