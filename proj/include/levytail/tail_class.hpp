#pragma once

#include <string>
#include <vector>

#include "levytail/jump_law.hpp"

namespace levytail {

// Ratio trace backing one numerical verdict.
struct ProbeTrace {
    std::vector<double> u;
    std::vector<double> ratio;
    bool inconclusive = false;
    std::string note;
};

struct TailClass {
    bool light1 = false;
    bool light2 = false;
    bool cond_pl = false;
    bool heavy = false;
    bool lattice_cond = false;

    ProbeTrace light1_trace;   // P(X1 > u) / P(X1 + X2 > u)
    ProbeTrace cond_pl_trace;  // P(X > u + a) / P(X > u)
    ProbeTrace lattice_trace;  // P(X > (n+1)a) / P(X > na)
    double light2_bound = 0.0;
    double light2_alpha = 0.0;
};

struct TailProbe {
    double u_max = 200.0;
    int points = 40;
    double a = 1.0;
    int lattice_n_max = 120;
};

// "Limit is 0" verdicts: ratio below this at the last probe and
// non-increasing over the final kTrendWindow probes.
inline constexpr double kZeroLimitThreshold = 0.01;
inline constexpr double kOneLimitThreshold = 0.99;
inline constexpr int kTrendWindow = 5;

/// log P(X1 + X2 > u) for independent copies. Exact for discrete laws,
/// adaptive quadrature of h(x) tail(x) tail(u - x) for hazard laws.
double log_two_fold_tail(const JumpLaw& law, double u);

TailClass classify_tail(const JumpLaw& law, const TailProbe& probe = {});

struct CondHResult {
    bool holds = false;
    double worst_margin = 0.0;  // max of log h(v+b) - b h(v) / 8 over checked points
    double at = 0.0;
    double holds_from = 0.0;    // start of the final run of grid points where it holds
};

/// Growth check h(v + b) <= exp(b h(v) / 8) "for v large enough": grid points
/// from the first v with h(v) >= 1 onward are checked, and the inequality
/// must hold on the upper half of them.
CondHResult check_cond_h(const RealFn& h, double b, const std::vector<double>& v_grid);

struct LatticeCondResult {
    bool holds = false;
    ProbeTrace trace;
};

LatticeCondResult check_lattice_cond(const JumpLaw& law, int n_max);

}  // namespace levytail
