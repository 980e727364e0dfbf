#include "effsim/fourier.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace effsim {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void require_compatible(const TrigPoly& a, const TrigPoly& b) {
    if (std::abs(a.period - b.period) > 1e-12 * (std::abs(a.period) + std::abs(b.period)))
        throw std::invalid_argument("trig polynomials have different periods");
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("trig polynomials have different shapes");
}

// Nodes and weights of 10-point Gauss-Legendre on [-1, 1] (positive half;
// the rule is symmetric).
constexpr int kGaussPoints = 10;
constexpr double kGaussNode[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                  0.8650633666889845, 0.9739065285171717};
constexpr double kGaussWeight[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                    0.1494513491505806, 0.0666713443086881};

double gauss_panel(const std::function<double(double)>& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int i = 0; i < kGaussPoints / 2; ++i) {
        sum += kGaussWeight[i] * (f(mid - half * kGaussNode[i]) + f(mid + half * kGaussNode[i]));
    }
    return half * sum;
}

}  // namespace

TrigPoly TrigPoly::zero(double period, int rows, int cols) {
    if (period <= 0) throw std::invalid_argument("period must be positive");
    TrigPoly p;
    p.period = period;
    p.harmonics = 0;
    p.coeffs.assign(1, Matrix::Zero(rows, cols));
    return p;
}

TrigPoly TrigPoly::constant(double period, const Matrix& c) {
    TrigPoly p = zero(period, static_cast<int>(c.rows()), static_cast<int>(c.cols()));
    p.coeffs[0] = c;
    return p;
}

const Matrix& TrigPoly::coeff(int n) const {
    if (n < -harmonics || n > harmonics) throw std::out_of_range("harmonic index out of range");
    return coeffs[static_cast<size_t>(n + harmonics)];
}

Matrix& TrigPoly::coeff(int n) {
    if (n < -harmonics || n > harmonics) throw std::out_of_range("harmonic index out of range");
    return coeffs[static_cast<size_t>(n + harmonics)];
}

int TrigPoly::rows() const { return static_cast<int>(coeffs.front().rows()); }
int TrigPoly::cols() const { return static_cast<int>(coeffs.front().cols()); }

Matrix TrigPoly::evaluate(double t) const {
    const double w = 2.0 * std::numbers::pi / period;
    Matrix out = Matrix::Zero(rows(), cols());
    for (int n = -harmonics; n <= harmonics; ++n)
        out += std::exp(kI * (w * n * t)) * coeff(n);
    return out;
}

Matrix TrigPoly::mean() const { return coeff(0); }

TrigPoly TrigPoly::derivative() const {
    const double w = 2.0 * std::numbers::pi / period;
    TrigPoly out = *this;
    for (int n = -harmonics; n <= harmonics; ++n) out.coeff(n) = (kI * (w * n)) * coeff(n);
    return out;
}

TrigPoly TrigPoly::integral_from_zero() const {
    double scale = 0.0;
    for (const auto& c : coeffs) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    if (mean().cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale))
        throw std::invalid_argument("antiderivative of a polynomial with nonzero mean");
    const double w = 2.0 * std::numbers::pi / period;
    TrigPoly out = *this;
    Matrix c0 = Matrix::Zero(rows(), cols());
    for (int n = -harmonics; n <= harmonics; ++n) {
        if (n == 0) {
            out.coeff(0).setZero();
            continue;
        }
        out.coeff(n) = coeff(n) / (kI * (w * n));
        c0 -= out.coeff(n);
    }
    out.coeff(0) = c0;
    return out;
}

TrigPoly TrigPoly::truncated(double tol) const {
    int keep = 0;
    for (int n = -harmonics; n <= harmonics; ++n)
        if (coeff(n).cwiseAbs().maxCoeff() > tol) keep = std::max(keep, std::abs(n));
    TrigPoly out = zero(period, rows(), cols());
    out.harmonics = keep;
    out.coeffs.assign(static_cast<size_t>(2 * keep + 1), Matrix::Zero(rows(), cols()));
    for (int n = -keep; n <= keep; ++n) out.coeff(n) = coeff(n);
    return out;
}

double TrigPoly::norm_bound() const {
    double sum = 0.0;
    for (const auto& c : coeffs) sum += operator_norm(c);
    return sum;
}

TrigPoly TrigPoly::times(const Matrix& m) const {
    if (rows() != 1 || cols() != 1)
        throw std::invalid_argument("times() needs a scalar polynomial");
    TrigPoly out;
    out.period = period;
    out.harmonics = harmonics;
    out.coeffs.reserve(coeffs.size());
    for (const auto& c : coeffs) out.coeffs.push_back(c(0, 0) * m);
    return out;
}

TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    require_compatible(a, b);
    const int M = std::max(a.harmonics, b.harmonics);
    TrigPoly out = TrigPoly::zero(a.period, a.rows(), a.cols());
    out.harmonics = M;
    out.coeffs.assign(static_cast<size_t>(2 * M + 1), Matrix::Zero(a.rows(), a.cols()));
    for (int n = -a.harmonics; n <= a.harmonics; ++n) out.coeff(n) += a.coeff(n);
    for (int n = -b.harmonics; n <= b.harmonics; ++n) out.coeff(n) += b.coeff(n);
    return out;
}

TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) {
    return a + (std::complex<double>(-1.0, 0.0) * b);
}

TrigPoly operator*(const std::complex<double>& s, const TrigPoly& a) {
    TrigPoly out = a;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

TrigPoly product(const TrigPoly& a, const TrigPoly& b) {
    if (std::abs(a.period - b.period) > 1e-12 * (std::abs(a.period) + std::abs(b.period)))
        throw std::invalid_argument("trig polynomials have different periods");
    if (a.cols() != b.rows()) throw std::invalid_argument("trig polynomial shapes do not chain");
    const int M = a.harmonics + b.harmonics;
    TrigPoly out = TrigPoly::zero(a.period, a.rows(), b.cols());
    out.harmonics = M;
    out.coeffs.assign(static_cast<size_t>(2 * M + 1), Matrix::Zero(a.rows(), b.cols()));
    for (int na = -a.harmonics; na <= a.harmonics; ++na)
        for (int nb = -b.harmonics; nb <= b.harmonics; ++nb)
            out.coeff(na + nb) += a.coeff(na) * b.coeff(nb);
    return out;
}

TrigPoly commutator(const TrigPoly& a, const TrigPoly& b) {
    return product(a, b) - product(b, a);
}

TrigPoly fit_scalar_trig(const std::function<double(double)>& f, double period, int grid,
                         double tol) {
    if (period <= 0) throw std::invalid_argument("period must be positive");
    if (grid < 3 || grid % 2 == 0) throw std::invalid_argument("grid must be odd and >= 3");
    const int M = (grid - 1) / 2;
    std::vector<double> samples(static_cast<size_t>(grid));
    double scale = 0.0;
    for (int j = 0; j < grid; ++j) {
        samples[static_cast<size_t>(j)] = f(period * j / grid);
        scale = std::max(scale, std::abs(samples[static_cast<size_t>(j)]));
    }
    TrigPoly out = TrigPoly::zero(period, 1, 1);
    out.harmonics = M;
    out.coeffs.assign(static_cast<size_t>(grid), Matrix::Zero(1, 1));
    for (int n = -M; n <= M; ++n) {
        std::complex<double> c = 0.0;
        for (int j = 0; j < grid; ++j)
            c += samples[static_cast<size_t>(j)] *
                 std::exp(-kI * (2.0 * std::numbers::pi * n * j / grid));
        out.coeff(n)(0, 0) = c / static_cast<double>(grid);
    }
    const double bound = tol * (1.0 + scale);
    for (int j = 0; j < grid; ++j) {
        const double t = period * (j + 0.37) / grid;
        const std::complex<double> v = out.evaluate(t)(0, 0);
        if (std::abs(v.imag()) > bound || std::abs(v.real() - f(t)) > bound)
            throw std::runtime_error("truncation not converged: drive is not band-limited to " +
                                     std::to_string(M) + " harmonics");
    }
    return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    if (tol <= 0) throw std::invalid_argument("tol must be positive");
    if (lo == hi) return 0.0;
    int panels = 2;
    double prev = gauss_panel(f, lo, hi);
    for (int round = 0; round < 22; ++round) {
        double sum = 0.0;
        const double h = (hi - lo) / panels;
        for (int k = 0; k < panels; ++k) sum += gauss_panel(f, lo + k * h, lo + (k + 1) * h);
        if (std::abs(sum - prev) <= tol) return sum;
        prev = sum;
        panels *= 2;
    }
    throw std::runtime_error("quadrature failure: panel refinement did not converge");
}

}  // namespace effsim
