#include "effsim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace effsim {

namespace {

void check_common(int d, double gamma, double tau, const BoundConstants& constants) {
    if (d < 1) throw std::invalid_argument("dimension must be at least 1");
    if (gamma <= 0) throw std::invalid_argument("noise rate must be positive");
    if (tau <= 0) throw std::invalid_argument("target time must be positive");
    if (constants.c_map <= 0 || constants.c_noise <= 0)
        throw std::invalid_argument("bound constants must be positive");
}

// Exact integer minimizer of a unimodal objective, scanning a window around
// the continuous stationary point.
template <typename F>
long best_integer_step(double stationary, F objective) {
    const long centre = std::max<long>(1, std::lround(std::min(stationary, 9e14)));
    long best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    const long lo = std::max<long>(1, centre - 4);
    for (long T = lo; T <= centre + 4; ++T) {
        const double value = objective(T);
        if (value < best_value) {
            best_value = value;
            best = T;
        }
    }
    return best;
}

// Continuous minimizer of c_a w + c_b / w^k for k > 0 via the stationary
// point, sharpened by a short golden-section polish in log space.
double best_window(double c_a, double c_b, double k) {
    const double stationary = std::pow(k * c_b / c_a, 1.0 / (k + 1.0));
    auto objective = [&](double logw) {
        const double w = std::exp(logw);
        return c_a * w + c_b / std::pow(w, k);
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(stationary) - 1.0;
    double hi = std::log(stationary) + 1.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int iter = 0; iter < 200; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        }
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace

std::string to_string(MappingKind kind) {
    switch (kind) {
        case MappingKind::Trotter: return "trotter";
        case MappingKind::FloquetMagnus: return "floquet-magnus";
        case MappingKind::SchriefferWolff: return "schrieffer-wolff";
    }
    throw std::logic_error("unknown mapping kind");
}

TradeoffResult trotter_tradeoff(int p, int d, double gamma, double tau,
                                const BoundConstants& constants) {
    if (p < 1) throw std::invalid_argument("formula order must be at least 1");
    check_common(d, gamma, tau, constants);

    const double map_weight = constants.c_map * std::pow(tau, d + p + 1);
    const double noise_weight = constants.c_noise * gamma;
    auto objective = [&](long T) {
        return map_weight / std::pow(static_cast<double>(T), p) +
               noise_weight * std::pow(static_cast<double>(T), d + 1);
    };
    const double stationary =
        tau * std::pow(p * constants.c_map / ((d + 1) * constants.c_noise * gamma),
                       1.0 / (p + d + 1));
    const long T = best_integer_step(stationary, objective);

    TradeoffResult out;
    out.mapping = MappingKind::Trotter;
    out.p = p;
    out.d = d;
    out.gamma = gamma;
    out.tau = tau;
    out.control = static_cast<double>(T);
    out.alpha_exponent = static_cast<double>(p) / (p + d + 1);
    out.error_bound = objective(T);
    out.t_sim_bound = static_cast<double>(T);
    return out;
}

TradeoffResult fm_tradeoff(int p, int d, double gamma, double tau,
                           const BoundConstants& constants) {
    if (p < 0) throw std::invalid_argument("expansion order must be non-negative");
    check_common(d, gamma, tau, constants);

    const double scale = std::pow(tau, d + 1);
    const double k = static_cast<double>(p) * (d + 1);
    const double w = k == 0
                         ? constants.c_noise * gamma / constants.c_map
                         : best_window(constants.c_map * scale,
                                       constants.c_noise * scale * gamma, k);

    TradeoffResult out;
    out.mapping = MappingKind::FloquetMagnus;
    out.p = p;
    out.d = d;
    out.gamma = gamma;
    out.tau = tau;
    out.control = w;
    out.alpha_exponent = 1.0 / (k + 1.0);
    out.error_bound =
        constants.c_map * scale * w + constants.c_noise * scale * gamma / std::pow(w, k);
    out.t_sim_bound = tau / std::pow(w, p);
    return out;
}

TradeoffResult sw_tradeoff(int p, int d, double gamma, double tau,
                           const BoundConstants& constants) {
    if (p < 0) throw std::invalid_argument("expansion order must be non-negative");
    check_common(d, gamma, tau, constants);

    const double scale = std::pow(tau, d + 1);
    const double k = static_cast<double>(p) * (d + 1) + 1.0;
    const double w =
        best_window(constants.c_map * scale, constants.c_noise * scale * gamma, k);

    TradeoffResult out;
    out.mapping = MappingKind::SchriefferWolff;
    out.p = p;
    out.d = d;
    out.gamma = gamma;
    out.tau = tau;
    out.control = w;
    out.alpha_exponent = 1.0 / (k + 1.0);
    out.error_bound =
        constants.c_map * scale * w + constants.c_noise * scale * gamma / std::pow(w, k);
    out.t_sim_bound = tau / std::pow(w, p + 1);
    return out;
}

double concatenated_rate(double xi0, double xi_th, int t, int levels) {
    if (xi0 <= 0 || xi_th <= 0) throw std::invalid_argument("fault rates must be positive");
    if (t < 1) throw std::invalid_argument("base code must correct at least one fault");
    if (levels < 0) throw std::invalid_argument("levels must be non-negative");
    return xi_th * std::pow(xi0 / xi_th, std::pow(static_cast<double>(t + 1), levels));
}

FTOverhead ft_overhead(const FTParams& params, const BoundConstants& constants) {
    if (params.xi0 >= params.xi_th) throw std::invalid_argument("below threshold required");
    if (params.delta <= 0) throw std::invalid_argument("precision target must be positive");
    if (params.p < 1) throw std::invalid_argument("formula order must be at least 1");
    if (params.d < 1) throw std::invalid_argument("dimension must be at least 1");
    if (params.tau <= 0) throw std::invalid_argument("target time must be positive");
    if (constants.c_map <= 0 || constants.c_noise <= 0)
        throw std::invalid_argument("bound constants must be positive");

    const double map_weight = constants.c_map * std::pow(params.tau, params.d + params.p + 1);
    auto minimized = [&](double xi, long* arg = nullptr) {
        if (xi < std::numeric_limits<double>::min()) {
            if (arg) *arg = 0;
            return 0.0;
        }
        auto objective = [&](long T) {
            return map_weight / std::pow(static_cast<double>(T), params.p) +
                   constants.c_noise * xi *
                       std::pow(static_cast<double>(T), params.d + 1);
        };
        const double stationary =
            params.tau *
            std::pow(params.p * constants.c_map /
                         ((params.d + 1) * constants.c_noise * xi),
                     1.0 / (params.p + params.d + 1));
        const long T = best_integer_step(stationary, objective);
        if (arg) *arg = T;
        return objective(T);
    };

    FTOverhead out;
    out.xi_l = concatenated_rate(params.xi0, params.xi_th, params.t, params.levels);
    long T = 0;
    out.total_error = minimized(out.xi_l, &T);
    out.optimal_t = static_cast<double>(T);

    constexpr int kLevelCap = 64;
    out.required_l = -1;
    for (int level = 0; level <= kLevelCap; ++level) {
        const double xi = concatenated_rate(params.xi0, params.xi_th, params.t, level);
        if (minimized(xi) <= params.delta) {
            out.required_l = level;
            break;
        }
    }
    if (out.required_l < 0)
        throw std::runtime_error("no concatenation depth meets the precision target");
    return out;
}

double ft_levels_estimate(const FTParams& params) {
    if (params.xi0 >= params.xi_th) throw std::invalid_argument("below threshold required");
    const double inner = (1.0 + static_cast<double>(params.d + 1) / params.p) *
                         std::log(std::pow(params.tau, params.d + 1) / params.delta) /
                         std::log(params.xi_th / params.xi0);
    return std::log(std::max(inner, 1.0)) / std::log(static_cast<double>(params.t + 1));
}

}  // namespace effsim
