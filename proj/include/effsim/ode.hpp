#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace effsim {

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) over any Eigen-like
// state with +, scalar *, cwiseAbs().maxCoeff(). The rhs is called as
// f(t, y) -> State; project(y) runs after every accepted step (e.g. to
// restore an algebraic structure the flow preserves only up to rounding).
// Local error per step is kept below tol * (1 + max|y|); throws when the
// step size underflows.
template <typename State, typename Rhs, typename Project>
State rk45_integrate_projected(State y, double t0, double t1, double tol, Rhs&& f,
                               Project&& project, const std::string& what = "rk45") {
    if (t1 < t0) throw std::invalid_argument(what + ": t1 < t0");
    if (tol <= 0) throw std::invalid_argument(what + ": tol must be positive");
    const double span = t1 - t0;
    if (span == 0) return y;

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                            e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                            e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    double t = t0;
    double h = span / 64;
    const double h_min = span * 1e-14;
    State k1 = f(t, y);
    long steps = 0;
    while (t < t1) {
        if (++steps > 20'000'000)
            throw std::runtime_error(what + ": step limit exceeded at t=" + std::to_string(t));
        h = std::min(h, t1 - t);
        const State k2 = f(t + c2 * h, y + (h * a21) * k1);
        const State k3 = f(t + c3 * h, y + (h * a31) * k1 + (h * a32) * k2);
        const State k4 = f(t + c4 * h, y + (h * a41) * k1 + (h * a42) * k2 + (h * a43) * k3);
        const State k5 = f(t + c5 * h,
                           y + (h * a51) * k1 + (h * a52) * k2 + (h * a53) * k3 + (h * a54) * k4);
        const State k6 = f(t + h, y + (h * a61) * k1 + (h * a62) * k2 + (h * a63) * k3 +
                                      (h * a64) * k4 + (h * a65) * k5);
        const State y5 = y + (h * b1) * k1 + (h * b3) * k3 + (h * b4) * k4 + (h * b5) * k5 +
                         (h * b6) * k6;
        const State k7 = f(t + h, y5);
        const State err = (h * e1) * k1 + (h * e3) * k3 + (h * e4) * k4 + (h * e5) * k5 +
                          (h * e6) * k6 + (h * e7) * k7;
        const double scale = tol * (1.0 + y.cwiseAbs().maxCoeff());
        const double err_norm = err.cwiseAbs().maxCoeff();
        if (err_norm <= scale) {
            t += h;
            y = y5;
            project(y);
            k1 = k7;  // first-same-as-last
        }
        const double ratio = err_norm > 0 ? std::pow(scale / err_norm, 0.2) : 5.0;
        h *= std::clamp(0.9 * ratio, 0.2, 5.0);
        if (h < h_min && t < t1)
            throw std::runtime_error(what + ": step size underflow at t=" + std::to_string(t) +
                                     " (local error not reaching tol)");
    }
    return y;
}

template <typename State, typename Rhs>
State rk45_integrate(State y, double t0, double t1, double tol, Rhs&& f,
                     const std::string& what = "rk45") {
    return rk45_integrate_projected(std::move(y), t0, t1, tol, std::forward<Rhs>(f),
                                    [](State&) {}, what);
}

}  // namespace effsim
