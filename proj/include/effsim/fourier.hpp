#pragma once

#include <functional>
#include <vector>

#include "effsim/lattice.hpp"

namespace effsim {

// Matrix-valued trigonometric polynomial sum_{n=-M..M} C_n e^{i n w t} with
// w = 2 pi / period. Sums, products (coefficient convolution), derivatives
// and antiderivatives of such polynomials stay in the family, so periodic
// recursions built on them carry no grid error.
struct TrigPoly {
    double period = 0.0;
    int harmonics = 0;
    std::vector<Matrix> coeffs;  // size 2 * harmonics + 1, index n + harmonics

    static TrigPoly zero(double period, int rows, int cols);
    static TrigPoly constant(double period, const Matrix& c);

    const Matrix& coeff(int n) const;
    Matrix& coeff(int n);
    int rows() const;
    int cols() const;

    Matrix evaluate(double t) const;
    Matrix mean() const;  // C_0
    TrigPoly derivative() const;
    // Antiderivative F with F(0) = 0; requires zero mean.
    TrigPoly integral_from_zero() const;
    // Drops outermost harmonics whose coefficient norm is <= tol.
    TrigPoly truncated(double tol) const;
    // sum_n ||C_n||, an upper bound on sup_t ||f(t)||.
    double norm_bound() const;
    // For 1x1 polynomials: the same polynomial with every coefficient scaled
    // by m.
    TrigPoly times(const Matrix& m) const;
};

TrigPoly operator+(const TrigPoly& a, const TrigPoly& b);
TrigPoly operator-(const TrigPoly& a, const TrigPoly& b);
TrigPoly operator*(const std::complex<double>& s, const TrigPoly& a);
TrigPoly product(const TrigPoly& a, const TrigPoly& b);
TrigPoly commutator(const TrigPoly& a, const TrigPoly& b);

// Scalar (1x1) polynomial fitted by DFT on `grid` uniform samples over one
// period; grid must be odd so harmonics up to (grid-1)/2 are resolved.
// Off-grid residuals above tol mean the function is not band-limited to the
// resolved harmonics; that throws "truncation not converged".
TrigPoly fit_scalar_trig(const std::function<double(double)>& f, double period, int grid,
                         double tol = 1e-9);

// Composite Gauss-Legendre quadrature, doubling the panel count until two
// successive refinements agree within tol (absolute). Throws on failure to
// converge.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double tol);

}  // namespace effsim
