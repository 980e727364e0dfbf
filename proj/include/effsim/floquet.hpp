#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "effsim/fourier.hpp"
#include "effsim/gaussian.hpp"
#include "effsim/lattice.hpp"

namespace effsim {

// One term of a time-periodic Hamiltonian: coeff(t) times a fixed generator,
// either a quadratic Majorana form or a dense local operator.
struct PeriodicTerm {
    std::function<double(double)> coeff;
    std::variant<QuadraticHamiltonian, LocalOperator> generator;
};

struct PeriodicDrive {
    double period = 0.0;
    std::vector<PeriodicTerm> terms;

    bool quadratic() const;
    // Spot-checks coeff(t) == coeff(t + period) at a handful of times.
    void check(double tol = 1e-9) const;
    std::vector<DriveTerm> drive_terms() const;  // quadratic generators only

    // h(t) mu + g(t) iQ on N modes, h = h0 + h1 cos(2 pi t / period),
    // g = g0 + g1 sin(2 pi t / period).
    static PeriodicDrive chain_demo(int N, double h0, double h1, double g0, double g1,
                                    double period, bool periodic = false);
    // The same drive through the Jordan-Wigner dictionary: -Z/2 per site,
    // Y X per bond.
    static PeriodicDrive chain_demo_dense(int n, double h0, double h1, double g0, double g1,
                                          double period);
};

// Effective-Hamiltonian expansion of a periodic drive to order p. The
// quadratic path stores V^(q) with the normalization that the effective
// Hamiltonian is sum_q period^q V^(q); the dense path stores the degree-q
// averages (period^q already folded in), the flow generators Omega^(1..p+1)
// as trigonometric polynomials, and the drive itself.
struct FMExpansion {
    int p = 0;
    double period = 0.0;
    bool dense = false;

    std::vector<QuadraticHamiltonian> terms;
    QuadraticHamiltonian h_eff;

    std::vector<Matrix> g_means;
    Matrix h_eff_dense;
    std::vector<TrigPoly> omegas;
    TrigPoly h_poly;

    Matrix omega_at(double t) const;
    Matrix omega_dot_at(double t) const;
    // e^{-Omega} H e^{Omega} - i e^{-Omega} (d/dt e^{Omega}) at time t. The
    // nested-commutator series is summed until its tail bound drops below
    // 1e-12; terms_used reports the truncation order.
    Matrix conjugated_drive_at(double t, int* terms_used = nullptr) const;
    // Difference between the conjugated drive and the order-p effective
    // Hamiltonian.
    Matrix remainder_at(double t, int* terms_used = nullptr) const;
    void check(double tol = 1e-10) const;
};

// Closed-form degree-0..2 terms for a quadratic drive, computed at the
// A-matrix level with the simplex time integrals done by nested adaptive
// quadrature to quad_tol.
FMExpansion magnus_effective_quadratic(const PeriodicDrive& drive, int p, double quad_tol);

// Generic operator-level recursion for a dense drive: degree-q generators
// G^(q), flow generators Omega^(q+1) = -i int_0^t (G^(q) - mean), effective
// Hamiltonian sum_q mean(G^(q)), and a remainder sampler. The drive
// coefficients are fitted on `grid` uniform samples per period.
FMExpansion fm_recursion_dense(const PeriodicDrive& drive, int p, int grid);

struct FMConstants {
    std::vector<double> gammas;  // Gamma_0..Gamma_p
    double gamma_max = 0.0;      // max over Gamma_0..Gamma_{p-1}
    double c_p = 0.0;            // (gamma_max + 1) e^{4 p gamma_max}
};

// Recursion bounding the degree-q generator norms, seeded with the star norm
// of the drive; pure function of (star_norm_H, p).
FMConstants fm_constants(double star_norm_H, int p);

struct FloquetRun {
    double observable_sim = 0.0;
    double observable_target = 0.0;
    double abs_error = 0.0;
    double t_sim = 0.0;
    long n_periods = 0;
};

// Drives N modes with the chain demo at stroboscopic period `period` for
// t_sim = round(tau_target / period^{p+1}) periods (at least one), with
// continuous depolarizing noise at rate gamma on every mode, and compares
// the mean occupation against exact evolution under the targeted effective
// Hamiltonian for tau_target: h0 mu + g0 iQ for p = 0, the quadrature-
// certified degree-1 term for p = 1 (which needs a zero-mean drive).
FloquetRun run_floquet(int N, double h0, double h1, double g0, double g1, int p,
                       double tau_target, double period, double gamma, double tol,
                       bool periodic = false);

}  // namespace effsim
