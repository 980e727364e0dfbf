#pragma once

#include <vector>

#include "effsim/dense.hpp"
#include "effsim/lattice.hpp"

namespace effsim {

// Frame rotation that block-diagonalizes eps*M + P against the eigenvalue
// sectors of P, order by order in eps. P is a sum of commuting projectors,
// so its spectrum is a small set of integers and the off-sector part of the
// generator can be rotated away exactly at each order.

struct ProjectorFamily {
    int n = 0;
    std::vector<DenseOperator> parts;
    DenseOperator total;
    std::vector<int> spectrum;  // eigenvalues of the sum, ascending
    Matrix basis;               // matching orthonormal eigenvectors (columns)

    // Validates that every part is a Hermitian projector, that all parts
    // commute pairwise, and that the spectrum of the sum is integer, then
    // caches the eigendecomposition of the sum.
    static ProjectorFamily build(std::vector<DenseOperator> projectors);
};

// Averages A over the phase flow of P: zeroes every block of A joining
// distinct eigenvalue sectors. For an integer spectrum this evaluates
// int_0^1 e^{i 2 pi s P} A e^{-i 2 pi s P} ds exactly. Idempotent and
// norm non-increasing.
DenseOperator project_time_average(const DenseOperator& A, const ProjectorFamily& P);

// Solves [X, P] = Y for the unique X supported on the off-sector blocks:
// block (m, n) of Y is divided by the integer gap n - m. Throws if Y has
// weight on the diagonal sector blocks, where the gap vanishes.
Matrix solve_sector_commutator(const Matrix& Y, const ProjectorFamily& P);

// i times the double integral over 0 <= s2 <= s1 <= 1 of the P-phase
// conjugation of Y, by Gauss-Legendre quadrature. Equals the sector solve
// above divided by 2 pi; exposed so both constructions can be compared.
Matrix omega_double_integral(const Matrix& Y, const ProjectorFamily& P, int points = 64);

struct SWExpansion {
    int p = 0;
    double eps = 0.0;
    std::vector<Matrix> omegas;  // rotation generators, orders 1 .. p+1
    std::vector<Matrix> g;       // frame-rotated generators, orders 0 .. p
    Matrix omega;                // sum of the generator list, anti-Hermitian
    Matrix effective;            // sum of the sector averages of the g list
    Matrix remainder;            // everything of order eps^{p+1} and higher
};

// Builds the order-p expansion of e^{-omega}(eps*M + P)e^{omega}. The
// order-q generator removes the off-sector part of the order-(q-1) rotated
// coupling; the rotation killing the order-p off-sector part is included as
// well, so e^{-omega}(eps*M + P)e^{omega} = eps*effective + P +
// eps*remainder with a remainder of size eps^{p+1}. The remainder series is
// truncated once its tail bound drops below 1e-12.
SWExpansion sw_recursion_dense(const DenseOperator& M, const ProjectorFamily& P, double eps,
                               int p);

struct SWConstants {
    std::vector<double> gammas;  // per-order coupling norms, orders 0 .. p
    double w_p = 0.0;            // rotation-generator norm constant
    double c_p = 0.0;            // remainder envelope constant
};

// Norm recursion behind the remainder envelope |R| <= C_p * eps^{p+1}: from
// the star norms of M and P and the support-growth weight w it evaluates the
// per-order constants, the rotation constant W_p = w * max of the orders
// below p, and the closed form C_p = 2 G e^{2 p G} with G the largest
// constant in play. Monotone non-decreasing in each norm input.
SWConstants sw_constants(double star_norm_M, double star_norm_P, double w, int p);

struct SWRun {
    double observable_sim = 0.0;
    double observable_target = 0.0;
    double abs_error = 0.0;
    double t_sim = 0.0;
};

// Evolves `initial` under eps*M + P for t_sim = tau_target / eps^{p+1} with
// single-qubit depolarizing noise at rate gamma, then compares <O> against
// the ideal evolution exp(-i H0 tau_target), where H0 is the coefficient of
// eps^p in the effective generator. O must commute with P.
SWRun run_sw(const DenseOperator& M, const ProjectorFamily& P, const DenseOperator& H0, int p,
             const DenseState& initial, const DenseOperator& O, double tau_target, double eps,
             double gamma, double tol);

struct SWDemo {
    int n = 0;
    int p = 0;
    DenseOperator M;
    ProjectorFamily P;
    DenseOperator H0;
    DenseOperator O;
    DenseState initial;
    double star_norm_M = 0.0;
    double star_norm_P = 0.0;
    double w = 0.0;
};

// Benchmark instance on an even-length qubit chain: P projects every even
// bond onto its singly occupied subspace, M hops excitations between
// neighbouring sites, O is a site-density observable commuting with P, and
// the initial state puts every even bond in a fixed superposition of its two
// singly occupied configurations (for p=1 the last bond starts empty, which
// lets the effective pair dynamics move density). For p=0, M couples every
// bond and H0 is its sector average. For p=1, M is the sector-traceless
// part of the odd-bond coupling and H0 is the second-order effective
// coupling -(1/2) avg([X, M]) with [X, P] = M.
SWDemo sw_demo(int n, int p);

}  // namespace effsim
