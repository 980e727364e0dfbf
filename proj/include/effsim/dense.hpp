#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "effsim/gaussian.hpp"
#include "effsim/lattice.hpp"

namespace effsim {

// Density-matrix reference implementation. Qubit/mode 0 is the leftmost
// (most significant) tensor factor; Jordan-Wigner strings run over lower
// indices. Everything here is exact up to integrator tolerance and is used
// to pin conventions and cross-check the covariance engine at small N.

inline constexpr int kDenseQubitCap = 12;

struct DenseOperator {
    int n = 0;
    Matrix m;

    void check_hermitian(double tol = 1e-12) const;
};

struct DenseState {
    int n = 0;
    Matrix rho;

    void check() const;  // trace 1, Hermitian, min eigenvalue >= -1e-8
};

DenseState vacuum_dense(int n);

// Majorana operator c_j (j in [0, 2N)): c_{2i} = Z^i X, c_{2i+1} = Z^i Y.
DenseOperator jw_majorana(int N, int j);

// (i/4) sum_{jk} A_{jk} c_j c_k; traceless (constants of e.g. the number
// operator are not part of the quadratic form).
DenseOperator jordan_wigner_dense(const QuadraticHamiltonian& H);

// Number operators including their constants: n_i = (I - Z_i)/2.
DenseOperator jw_mode_number(int N, int i);
DenseOperator jw_number_total(int N);

// Sum of the term matrices embedded on the full 2^sites space; every term
// needs an explicit matrix.
DenseOperator assemble_dense(const LocalOperator& op);

// coeff == nullptr means the term is constant (coefficient one).
struct DenseDriveTerm {
    DenseOperator H;
    std::function<double(double)> coeff;
};

// drho/dt = -i[H(t), rho] + gamma sum_{i in noisy} (R_i(rho) - rho), where
// R_i replaces fermionic mode i by its maximally mixed state (the twirl over
// the mode's Majorana algebra under the fixed JW ordering). Falls back to
// exact exponential conjugation when gamma = 0 and every drive coefficient
// is constant.
DenseState evolve_lindblad_dense(const DenseState& state, const std::vector<DenseDriveTerm>& drive,
                                 const std::vector<int>& noisy_modes, double gamma, double t0,
                                 double t1, double tol);

// (1 - p) rho + p R_i(rho) with R_i the fermionic mode replacement above.
DenseState depolarize_mode_dense(const DenseState& state, int i, double p);

// Re(Tr(O rho)); throws if the imaginary part exceeds 1e-9.
double expectation(const DenseState& state, const DenseOperator& O);

// Seeded generator of operators provably satisfying the declared (a, Z, J)
// profile; term randomness is keyed on (seed, start site) so the result does
// not depend on evaluation order.
LocalOperator random_local_operator(const Lattice& lattice, double a, double Z, double J,
                                    std::uint64_t seed);

}  // namespace effsim
