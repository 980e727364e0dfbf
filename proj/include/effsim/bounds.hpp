#pragma once

#include <string>

namespace effsim {

// Big-O prefactors of the two competing bound terms. Only the exponents are
// rigorously backed; the prefactors default to one and are user-settable.
struct BoundConstants {
    double c_map = 1.0;
    double c_noise = 1.0;
};

enum class MappingKind { Trotter, FloquetMagnus, SchriefferWolff };

std::string to_string(MappingKind kind);

struct TradeoffResult {
    MappingKind mapping = MappingKind::Trotter;
    int p = 0;
    int d = 1;
    double gamma = 0.0;
    double tau = 0.0;
    // Optimal control: step count T for the product formula, window size for
    // the stroboscopic and projected mappings.
    double control = 0.0;
    double alpha_exponent = 0.0;
    double error_bound = 0.0;
    double t_sim_bound = 0.0;
};

// Minimizes c_map tau^{d+p+1} / T^p + c_noise gamma T^{d+1} exactly over
// integer T >= 1 by scanning a window around the continuous stationary
// point (the objective is unimodal for positive constants). The reported
// alpha is p / (p + d + 1); t_sim is measured in steps, so its bound is the
// optimal T itself, which scales as tau gamma^{-1/(p+d+1)}.
TradeoffResult trotter_tradeoff(int p, int d, double gamma, double tau,
                                const BoundConstants& constants = {});

// Minimizes c_map tau^{d+1} w + c_noise tau^{d+1} gamma / w^{p(d+1)} over
// the window w. alpha = 1 / (p(d+1) + 1); t_sim bound tau / w^p. At p = 0
// the noise term is window independent and the objective is monotone, so
// the reported control balances the two contributions instead.
TradeoffResult fm_tradeoff(int p, int d, double gamma, double tau,
                           const BoundConstants& constants = {});

// Minimizes c_map tau^{d+1} w + c_noise tau^{d+1} gamma / w^{p(d+1)+1} over
// the window w. alpha = 1 / (p(d+1) + 2); t_sim bound tau / w^{p+1}.
TradeoffResult sw_tradeoff(int p, int d, double gamma, double tau,
                           const BoundConstants& constants = {});

struct FTParams {
    double xi0 = 1e-3;    // physical fault rate
    double xi_th = 1e-2;  // concatenation threshold
    int t = 1;            // base code corrects t faults (distance 2t + 1)
    int levels = 0;
    double delta = 1e-3;  // target observable precision
    double tau = 1.0;
    int d = 1;
    int p = 2;
};

struct FTOverhead {
    double xi_l = 0.0;         // logical fault rate at the requested level
    double optimal_t = 0.0;    // step count minimizing the total error
    double total_error = 0.0;  // minimized error at the requested level
    int required_l = 0;        // smallest level meeting the precision target
};

// Logical fault rate after `levels` rounds of concatenation:
// xi_th (xi0 / xi_th)^{(t+1)^levels}.
double concatenated_rate(double xi0, double xi_th, int t, int levels);

// Evaluates the concatenation recursion at params.levels, minimizes
// c_map tau^{d+p+1} / T^p + c_noise T^{d+1} xi_L over integer T, and finds
// the smallest level whose minimized error meets params.delta. Throws
// "below threshold required" when xi0 >= xi_th.
FTOverhead ft_overhead(const FTParams& params, const BoundConstants& constants = {});

// Closed-form level estimate
// log((1 + (d+1)/p) log(tau^{d+1}/delta) / log(threshold_ratio)) / log(t+1)
// with threshold_ratio = xi_th / xi0; the integer search in ft_overhead
// stays within one level of this.
double ft_levels_estimate(const FTParams& params);

}  // namespace effsim
