#include "levytail/tail_class.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levytail/log_space.hpp"

namespace levytail {

namespace {

bool non_increasing_tail(const std::vector<double>& r, int window) {
    if (static_cast<int>(r.size()) < window) return false;
    for (std::size_t i = r.size() - window + 1; i < r.size(); ++i) {
        if (r[i] > r[i - 1] * (1.0 + 1e-9) + 1e-300) return false;
    }
    return true;
}

bool non_decreasing_tail(const std::vector<double>& r, int window) {
    if (static_cast<int>(r.size()) < window) return false;
    for (std::size_t i = r.size() - window + 1; i < r.size(); ++i) {
        if (r[i] < r[i - 1] * (1.0 - 1e-9)) return false;
    }
    return true;
}

bool monotone_tail(const std::vector<double>& r, int window) {
    return non_increasing_tail(r, window) || non_decreasing_tail(r, window);
}

// Largest probe level. Bounded laws stop just below the supremum (the ratio
// P(X > u + a) / P(X > u) is 0 there). Unbounded discrete laws stop before
// their support truncation; continuous laws before the tail underflows.
double probe_limit(const JumpLaw& law, const TailProbe& probe) {
    double cap = probe.u_max;
    if (auto ub = law.upper_bound()) {
        return std::min(cap, *ub - 1e-9 * std::max(1.0, std::fabs(*ub)));
    }
    const double floor_log = law.is_discrete() ? std::log(1e-25) : -700.0;
    if (law.log_tail(cap + probe.a) >= floor_log) return cap;
    double lo = 0.0, hi = cap;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (law.log_tail(mid + probe.a) >= floor_log ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

double log_two_fold_tail(const JumpLaw& law, double u) {
    if (law.is_discrete()) {
        LogSumAccumulator acc;
        for (const auto& atom : law.atoms()) acc.add(atom.log_mass + law.log_tail(u - law.value(atom)));
        return acc.value();
    }
    if (!law.has_hazard()) throw std::invalid_argument("two-fold tail of " + law.name() + " needs a hazard");
    const double lo = law.support_min();
    const double lt_u = law.log_tail(u);
    if (u <= lo) return law.log_tail(u - lo);
    // P(X1 > u) + int_lo^u f(x) P(X2 > u - x) dx with f = h * tail
    const double scale = std::max(2.0 * law.log_tail(0.5 * u), lt_u);
    auto g = [&](double x) {
        double v = law.log_tail(x) + law.log_tail(u - x) - scale;
        return law.hazard(x) * std::exp(v);
    };
    double err = 0.0;
    double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, u, 25, 1e-11, &err);
    if (!(integral > 0.0)) return lt_u;
    return log_add(lt_u, scale + std::log(integral));
}

TailClass classify_tail(const JumpLaw& law, const TailProbe& probe) {
    if (!(probe.u_max > 0.0) || probe.points < kTrendWindow) throw std::invalid_argument("bad tail probe");
    TailClass tc;
    bool tail_vanishes = false;
    const double u_max = probe_limit(law, probe);
    for (int i = 1; i <= probe.points; ++i) {
        double u = u_max * i / probe.points;
        double lt = law.log_tail(u);
        if (lt == kLogZero) {
            tail_vanishes = true;
            break;
        }
        tc.cond_pl_trace.u.push_back(u);
        tc.cond_pl_trace.ratio.push_back(std::exp(law.log_tail(u + probe.a) - lt));
        bool two_fold_ok = law.is_discrete() || law.has_hazard();
        if (two_fold_ok) {
            tc.light1_trace.u.push_back(u);
            tc.light1_trace.ratio.push_back(std::exp(lt - log_two_fold_tail(law, u)));
        }
    }

    auto judge_zero = [&](ProbeTrace& t) {
        if (tail_vanishes) {
            t.note = "P(X > u) = 0 inside the probe range";
            return false;
        }
        if (t.ratio.size() < static_cast<std::size_t>(kTrendWindow)) {
            t.inconclusive = true;
            t.note = "too few probes";
            return false;
        }
        t.inconclusive = !monotone_tail(t.ratio, kTrendWindow);
        return t.ratio.back() < kZeroLimitThreshold && non_increasing_tail(t.ratio, kTrendWindow);
    };

    tc.cond_pl = judge_zero(tc.cond_pl_trace);
    if (law.is_discrete() || law.has_hazard()) {
        tc.light1 = judge_zero(tc.light1_trace);
    } else {
        tc.light1_trace.inconclusive = true;
        tc.light1_trace.note = "no hazard; two-fold tail not evaluated";
    }
    if (tc.cond_pl && !tc.light1) {
        tc.light1 = true;
        tc.light1_trace.note = "implied by cond_pl";
    }
    tc.heavy = !tail_vanishes && !tc.cond_pl_trace.ratio.empty() &&
               tc.cond_pl_trace.ratio.back() > kOneLimitThreshold;

    if (auto ub = law.upper_bound(); ub && *ub > 0.0) {
        tc.light2_bound = *ub;
        tc.light2_alpha = 0.5 * *ub;
        tc.light2 = law.log_tail(tc.light2_alpha) > kLogZero;
    }

    if (law.kind() == LawKind::lattice) {
        auto lc = check_lattice_cond(law, probe.lattice_n_max);
        tc.lattice_cond = lc.holds;
        tc.lattice_trace = std::move(lc.trace);
    }
    return tc;
}

CondHResult check_cond_h(const RealFn& h, double b, const std::vector<double>& v_grid) {
    CondHResult res;
    res.worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<double> margins, points;
    for (double v : v_grid) {
        if (points.empty() && h(v) < 1.0) continue;
        double margin = std::log(h(v + b)) - b * h(v) / 8.0;
        margins.push_back(margin);
        points.push_back(v);
        if (margin > res.worst_margin) {
            res.worst_margin = margin;
            res.at = v;
        }
    }
    if (points.empty()) return res;
    // "for v large enough": the inequality must hold on the upper half of the
    // checked points; holds_from is where the final run of passing points starts.
    std::size_t run = margins.size();
    while (run > 0 && margins[run - 1] <= 0.0) --run;
    res.holds = run <= margins.size() / 2;
    if (run < margins.size()) res.holds_from = points[run];
    return res;
}

LatticeCondResult check_lattice_cond(const JumpLaw& law, int n_max) {
    if (law.kind() != LawKind::lattice) throw std::invalid_argument("lattice condition needs a lattice law");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    LatticeCondResult res;
    const double a = law.lattice_step().to_double();
    double prev = law.log_tail(a);
    bool positive = prev > kLogZero;
    for (int n = 1; n <= n_max && positive; ++n) {
        double next = law.log_tail((n + 1) * a);
        res.trace.u.push_back(n * a);
        res.trace.ratio.push_back(std::exp(next - prev));
        if (next == kLogZero && n < n_max) {
            positive = false;
            res.trace.note = "P(X > na) = 0 for n = " + std::to_string(n + 1);
        }
        prev = next;
    }
    if (!positive) {
        if (res.trace.note.empty()) res.trace.note = "P(X > a) = 0";
        return res;
    }
    res.trace.inconclusive = !monotone_tail(res.trace.ratio, kTrendWindow);
    res.holds = res.trace.ratio.size() >= static_cast<std::size_t>(kTrendWindow) &&
                res.trace.ratio.back() < kZeroLimitThreshold &&
                non_increasing_tail(res.trace.ratio, kTrendWindow);
    return res;
}

}  // namespace levytail
