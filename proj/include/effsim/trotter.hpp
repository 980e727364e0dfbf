#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "effsim/gaussian.hpp"
#include "effsim/lattice.hpp"

namespace effsim {

// One exponential factor exp(x * H_slot * step) of a product formula.
struct Stage {
    int slot = 0;
    double coeff = 0.0;
};

struct ProductFormula {
    std::vector<Stage> stages;
    int order = 0;
    int slots = 0;

    void check() const;  // per-slot coefficients sum to one
};

// p = 1: sequential sweep. p = 2: palindromic half-step (Strang). Higher
// even p: recursive symmetric construction with u_k = 1/(4 - 4^{1/(2k-1)});
// adjacent stages on the same slot are merged.
ProductFormula suzuki_formula(int p, int K);

struct OrderCertificate {
    int certified_order = 0;
    double slope = 0.0;
    double r_squared = 0.0;
};

// Fits log||S(eps) - exp(-i H eps)|| against log eps on random Hermitian
// slot matrices; throws if the fit is inconclusive (R^2 < 0.99) or the
// certified order falls short of the declared one.
OrderCertificate verify_formula_order(const ProductFormula& f, int trials, std::uint64_t seed);

// Hamiltonian split into slots of mutually commuting pieces. Exactly one of
// quad_slots / term_slots is populated.
struct SplitHamiltonian {
    int K = 0;
    std::vector<QuadraticHamiltonian> quad_slots;
    std::vector<std::vector<LocalTerm>> term_slots;
    std::vector<int> slot_sizes;  // bonds assigned per slot
    Lattice lattice;
};

// Bond Hamiltonians of the chain H = h sum_i n_i + g iQ: bond (i, i+1)
// carries the hopping plus half of each interior site's number term
// (boundary sites contribute fully to their only bond), so the bonds sum to
// the full Hamiltonian. Periodic chains need even N for a two-colouring.
std::vector<QuadraticHamiltonian> chain_bond_hamiltonians(int N, double h, double g,
                                                          bool periodic = false);

// Sum of a bond list, the reference generator for exact evolution.
QuadraticHamiltonian total_hamiltonian(const std::vector<QuadraticHamiltonian>& bonds);

// Even/odd (1D, K=2) bond colouring. The quadratic path covers the chain
// geometry used by the covariance engine.
SplitHamiltonian even_odd_split(const std::vector<QuadraticHamiltonian>& bonds, int d);

// Spin-term path: 1D -> K=2; 2D -> K=4 (axis times parity).
SplitHamiltonian even_odd_split(const Lattice& lattice, const std::vector<LocalTerm>& bonds,
                                int d);

enum class NoisePlacement { PerLayerAllModes, PerLayerTouchedModes };

struct TrotterRun {
    CovarianceState state;
    double observable = 0.0;  // mean occupation
};

// Applies S_p(tau/T)^T as exact per-stage orthogonal rotations, depolarizing
// after every stage when noise is present. The noiseless path (noise absent
// or p = 0) collapses the circuit into one powered orthogonal.
TrotterRun run_trotter(const CovarianceState& initial, const SplitHamiltonian& split,
                       const ProductFormula& f, double tau, int T,
                       const std::optional<DepolSpec>& noise,
                       NoisePlacement placement = NoisePlacement::PerLayerAllModes);

// ||H|| = sum_k eps_k / 2 for a quadratic with single-particle energies
// eps_k (the positive imaginary eigenvalues of A).
double quad_operator_norm(const QuadraticHamiltonian& H);

struct TrotterBoundParams {
    int p = 2;
    int d = 1;
    int sizeX = 1;
    double normO = 1.0;
    double a0 = 1.0;
    double Z = 2.0;
    double c_LR = 0.0;
    double tau = 1.0;
    int T = 1;
    double Cp = 0.0;
};

// Formula-dependent constant: e^{-p}/(p+1)! times the sum over stages j and
// compositions n_1..n_{j-1} of p of the multinomial-weighted coefficient
// products |x_j| prod_k |x_k|^{n_k} (2p+2j-1)^{pd} e^{p-j+1}.
double formula_constant(const ProductFormula& f, int p, int d);

// (a0^{(d-1)(p-1)} / Z^2) C^(p) |X|^2 ||O|| c_LR tau nu_d(c_LR tau) (c_LR eps)^p
// with eps = tau / T; non-increasing in T and free of any system-size input.
double trotter_bound(const TrotterBoundParams& params);

}  // namespace effsim
