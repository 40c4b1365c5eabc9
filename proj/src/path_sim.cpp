#include "levytail/path_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "levytail/normal.hpp"

namespace levytail {

double bridge_max_inverse(double a, double c, double t, double sigma, double p) {
    if (!(t > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("bridge maximum needs t > 0 and sigma > 0");
    if (p >= 1.0) return std::max(a, c);
    const double d = c - a;
    return 0.5 * (a + c + std::sqrt(d * d - 2.0 * sigma * sigma * t * std::log(p)));
}

namespace {

// Walks the path interval by interval. Epochs and jump sizes come from the
// callbacks so the random and the forced variants share one body.
template <class NextEpoch, class NextJump>
void build_path(const LevyModel& m, RandomStream& rng, PathSample& out, NextEpoch next_epoch, NextJump next_jump) {
    out.epochs.clear();
    out.jumps.clear();
    out.brownian.clear();
    for (double g = next_epoch(0.0); g < 1.0; g = next_epoch(g)) out.epochs.push_back(g);
    out.tau = static_cast<int>(out.epochs.size());

    double t = 0.0, bm = 0.0, y = 0.0, z = 0.0;
    double sup_x = 0.0, sup_y = 0.0, sup_z = 0.0;
    out.brownian.push_back(0.0);
    out.penultimate.reset();
    if (out.tau == 1) out.penultimate = 0.0;

    for (int k = 0; k <= out.tau; ++k) {
        const double t_end = k < out.tau ? out.epochs[static_cast<std::size_t>(k)] : 1.0;
        const double dt = t_end - t;
        if (m.sigma > 0.0 && dt > 0.0) bm += std::sqrt(dt) * rng.normal();
        const double y_end = m.sigma * bm - m.drift_b * t_end;
        double y_max = std::max(y, y_end);
        if (m.sigma > 0.0 && dt > 0.0) y_max = bridge_max_inverse(y, y_end, dt, m.sigma, rng.uniform());
        // maximum over [t, t_end) including the left limit at t_end
        sup_y = std::max(sup_y, y_max);
        sup_x = std::max(sup_x, z + y_max);
        y = y_end;
        t = t_end;
        out.brownian.push_back(bm);
        if (k < out.tau) {
            const double jump = next_jump(k);
            out.jumps.push_back(jump);
            z += jump;
            sup_z = std::max(sup_z, z);
            sup_x = std::max(sup_x, y + z);
            if (k == out.tau - 2) out.penultimate = y + z;
        }
    }
    out.endpoint = y + z;
    out.supremum = std::max(sup_x, out.endpoint);
    out.sup_continuous = sup_y;
    out.sup_jumps = sup_z;
}

}  // namespace

void sample_path(const LevyModel& model, RandomStream& rng, PathSample& out) {
    const double rate = model.lambda;
    build_path(
        model, rng, out, [&](double g) { return g + rng.exponential() / rate; },
        [&](int) { return model.jumps.sample(rng); });
}

PathSample sample_path(const LevyModel& model, RandomStream& rng) {
    PathSample p;
    sample_path(model, rng, p);
    return p;
}

PathSample sample_path_forced(const LevyModel& model, const std::vector<double>& epochs,
                              const std::vector<double>& sizes, RandomStream& rng) {
    if (epochs.size() != sizes.size()) throw std::invalid_argument("forced path: epochs and sizes differ in length");
    if (!std::is_sorted(epochs.begin(), epochs.end()) || (!epochs.empty() && (epochs.front() <= 0.0 || epochs.back() >= 1.0)))
        throw std::invalid_argument("forced path: epochs must be increasing inside (0, 1)");
    PathSample p;
    std::size_t i = 0;
    build_path(
        model, rng, p, [&](double) { return i < epochs.size() ? epochs[i++] : 2.0; },
        [&](int k) { return sizes[static_cast<std::size_t>(k)]; });
    return p;
}

const char* to_string(Event e) {
    switch (e) {
        case Event::endpoint: return "endpoint";
        case Event::supremum: return "supremum";
        case Event::penultimate_excess: return "penultimate_excess";
        case Event::supB_plus_supZ: return "supB_plus_supZ";
        case Event::sym_abs: return "sym_abs";
        case Event::sym_plus: return "sym_plus";
        case Event::sym_excess: return "sym_excess";
    }
    return "?";
}

std::optional<Event> event_from_string(const std::string& s) {
    for (Event e : {Event::endpoint, Event::supremum, Event::penultimate_excess, Event::supB_plus_supZ,
                    Event::sym_abs, Event::sym_plus, Event::sym_excess})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

namespace {

std::size_t event_slot(const EventEstimates& est, Event e) {
    auto it = std::find(est.events.begin(), est.events.end(), e);
    if (it == est.events.end()) throw std::out_of_range(std::string("event not estimated: ") + to_string(e));
    return static_cast<std::size_t>(it - est.events.begin());
}

bool occurs(Event e, const PathSample& p, double w, double u) {
    switch (e) {
        case Event::endpoint: return p.endpoint > u;
        case Event::supremum: return p.supremum > u;
        case Event::penultimate_excess: return p.endpoint <= u && p.penultimate && *p.penultimate > u;
        case Event::supB_plus_supZ: return p.sup_continuous + p.sup_jumps > u;
        case Event::sym_abs: return p.endpoint + std::fabs(w) > u;
        case Event::sym_plus: return p.endpoint + w > u;
        case Event::sym_excess: return p.endpoint > u + std::fabs(w);
    }
    return false;
}

}  // namespace

const MCEstimate& EventEstimates::get(Event e) const { return estimates[event_slot(*this, e)]; }

std::uint64_t EventEstimates::both(Event a, Event b) const {
    return joint[event_slot(*this, a) * events.size() + event_slot(*this, b)];
}

std::vector<EventEstimates> estimate_events(const LevyModel& model, const std::vector<double>& u_grid,
                                            const std::vector<Event>& events, const SimOptions& opt) {
    model.validate();
    if (opt.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (events.empty() || u_grid.empty()) return {};
    const auto start = std::chrono::steady_clock::now();
    const std::size_t E = events.size(), G = u_grid.size();
    const bool need_w = std::any_of(events.begin(), events.end(), [](Event e) {
        return e == Event::sym_abs || e == Event::sym_plus || e == Event::sym_excess;
    });
    const std::uint64_t n_chunks = (opt.trials + kChunkSize - 1) / kChunkSize;
    unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_chunks));

    // Integer counts merge exactly in any order.
    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(G * E * E, 0));
    std::atomic<std::uint64_t> next{0};
    auto work = [&](unsigned id) {
        auto& counts = partial[id];
        PathSample path;
        std::vector<std::size_t> hit;
        hit.reserve(E);
        for (std::uint64_t c; (c = next.fetch_add(1)) < n_chunks;) {
            RandomStream rng(opt.seed, c);
            const std::uint64_t n = std::min(kChunkSize, opt.trials - c * kChunkSize);
            for (std::uint64_t i = 0; i < n; ++i) {
                sample_path(model, rng, path);
                const double w = need_w ? rng.normal() : 0.0;
                for (std::size_t g = 0; g < G; ++g) {
                    hit.clear();
                    for (std::size_t e = 0; e < E; ++e)
                        if (occurs(events[e], path, w, u_grid[g])) hit.push_back(e);
                    std::uint64_t* block = counts.data() + g * E * E;
                    for (std::size_t a : hit)
                        for (std::size_t b : hit) ++block[a * E + b];
                }
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    std::vector<std::uint64_t> total(G * E * E, 0);
    for (const auto& p : partial)
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<EventEstimates> out(G);
    for (std::size_t g = 0; g < G; ++g) {
        auto& r = out[g];
        r.u = u_grid[g];
        r.events = events;
        r.joint.assign(total.begin() + static_cast<std::ptrdiff_t>(g * E * E),
                       total.begin() + static_cast<std::ptrdiff_t>((g + 1) * E * E));
        for (std::size_t e = 0; e < E; ++e) {
            MCEstimate m;
            m.label = to_string(events[e]);
            m.hits = r.joint[e * E + e];
            m.trials = opt.trials;
            m.p_hat = static_cast<double>(m.hits) / static_cast<double>(m.trials);
            m.std_error = std::sqrt(m.p_hat * (1.0 - m.p_hat) / static_cast<double>(m.trials));
            m.seed = opt.seed;
            m.wall_time = wall;
            r.estimates.push_back(std::move(m));
        }
    }
    return out;
}

EventEstimates estimate_events(const LevyModel& model, double u, const std::vector<Event>& events,
                               const SimOptions& opt) {
    auto v = estimate_events(model, std::vector<double>{u}, events, opt);
    if (v.empty()) throw std::invalid_argument("no events requested");
    return std::move(v.front());
}

PairedRatio paired_ratio(const EventEstimates& est, Event num, Event den) {
    const auto& a = est.get(num);
    const auto& b = est.get(den);
    PairedRatio r;
    if (b.hits == 0) {
        r.ratio = std::numeric_limits<double>::quiet_NaN();
        r.std_error = std::numeric_limits<double>::infinity();
        return r;
    }
    const double n = static_cast<double>(a.trials);
    const double pa = a.p_hat, pb = b.p_hat;
    const double pab = static_cast<double>(est.both(num, den)) / n;
    r.ratio = pa / pb;
    // delta method for pa / pb under the multinomial joint law
    double var = (pa * (1.0 - pa) / (pb * pb) + pa * pa * (1.0 - pb) / (pb * pb * pb) -
                  2.0 * pa * (pab - pa * pb) / (pb * pb * pb)) / n;
    r.std_error = std::sqrt(std::max(var, 0.0));
    return r;
}

RatioRow exact_denominator_row(double u, const MCEstimate& num, const ModelTail& den) {
    RatioRow row;
    row.u = u;
    row.numerator = num.p_hat;
    row.numerator_err = num.std_error;
    row.numerator_hits = num.hits;
    row.low_confidence = num.hits < kLowConfidenceHits;
    const double lo = std::exp(den.log_lower), hi = std::exp(den.log_upper);
    if (den.exact) {
        row.denominator = lo;
        row.denominator_err = 0.0;
        row.ratio = num.p_hat / lo;
        const double ci = kCiZ * num.std_error / lo;
        row.ratio_lo = row.ratio - ci;
        row.ratio_hi = row.ratio + ci;
        row.method = "mc/exact";
    } else {
        row.denominator = den.mid();
        row.denominator_err = den.half_width();
        row.ratio = num.p_hat / row.denominator;
        row.ratio_lo = (num.p_hat - kCiZ * num.std_error) / hi;
        row.ratio_hi = (num.p_hat + kCiZ * num.std_error) / lo;
        row.method = "mc/bracket";
    }
    return row;
}

RatioRow paired_row(double u, const EventEstimates& est, Event num, Event den) {
    const auto& a = est.get(num);
    const auto& b = est.get(den);
    const PairedRatio pr = paired_ratio(est, num, den);
    RatioRow row;
    row.u = u;
    row.numerator = a.p_hat;
    row.numerator_err = a.std_error;
    row.denominator = b.p_hat;
    row.denominator_err = b.std_error;
    row.ratio = pr.ratio;
    row.ratio_lo = pr.ratio - kCiZ * pr.std_error;
    row.ratio_hi = pr.ratio + kCiZ * pr.std_error;
    row.method = "mc/paired";
    row.numerator_hits = a.hits;
    row.low_confidence = a.hits < kLowConfidenceHits;
    return row;
}

TailRatioCurve ratio_curve(const LevyModel& model, const std::vector<double>& u_grid, const SimOptions& opt,
                           DenominatorMode mode, double tol, Event numerator) {
    TailRatioCurve curve;
    curve.sim = opt;
    curve.exact_tol = tol;
    if (mode == DenominatorMode::mc) {
        auto est = estimate_events(model, u_grid, {numerator, Event::endpoint}, opt);
        for (const auto& e : est) curve.rows.push_back(paired_row(e.u, e, numerator, Event::endpoint));
        return curve;
    }
    auto est = estimate_events(model, u_grid, {numerator}, opt);
    TailEngine engine(model);
    for (const auto& e : est) {
        ModelTail den = engine.tail(e.u, tol);
        curve.certificates.push_back(den.trunc);
        curve.rows.push_back(exact_denominator_row(e.u, e.get(numerator), den));
    }
    return curve;
}

SymResidual sym_identity_residual(const JumpLaw& x_law, double y_sigma, const std::vector<double>& u_grid,
                                  std::uint64_t mc_trials, std::uint64_t seed) {
    if (!(y_sigma > 0.0)) throw std::invalid_argument("y_sigma must be positive");
    SymResidual res;
    const bool exact = x_law.is_discrete() && mc_trials == 0;
    if (exact) {
        for (double u : u_grid) {
            // P(X + |Y| > u), P(X + Y > u), P(X > u + |Y|), atom by atom
            LogSumAccumulator lhs, plus, excess;
            for (const auto& a : x_law.atoms()) {
                const double d = (u - x_law.value(a)) / y_sigma;
                const double lt = normal_tail(d);
                plus.add(a.log_mass + lt);
                if (d < 0.0) {
                    lhs.add(a.log_mass);
                    // P(|Y| < x - u) = 1 - 2 P(Y > x - u)
                    excess.add(a.log_mass + log1mexp(std::log(2.0) + normal_tail(-d)));
                } else {
                    lhs.add(a.log_mass + std::log(2.0) + lt);
                }
            }
            const double r = std::fabs(std::exp(lhs.value()) - 2.0 * std::exp(plus.value()) + std::exp(excess.value()));
            if (r >= res.max_residual) {
                res.max_residual = r;
                res.at_u = u;
            }
        }
        return res;
    }
    const std::uint64_t n = mc_trials ? mc_trials : 1'000'000;
    for (double u : u_grid) {
        RandomStream rng(seed, 0);
        std::uint64_t l = 0, p = 0, x = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double xv = x_law.sample(rng), yv = y_sigma * rng.normal();
            l += xv + std::fabs(yv) > u;
            p += xv + yv > u;
            x += xv > u + std::fabs(yv);
        }
        const double dn = static_cast<double>(n);
        const double pl = l / dn, pp = p / dn, px = x / dn;
        const double r = std::fabs(pl - 2.0 * pp + px);
        if (r >= res.max_residual) {
            res.max_residual = r;
            res.at_u = u;
            res.std_error = std::sqrt(pl * (1 - pl) / dn) + 2.0 * std::sqrt(pp * (1 - pp) / dn) +
                            std::sqrt(px * (1 - px) / dn);
        }
    }
    return res;
}

}  // namespace levytail
