#include "levytail/jump_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levytail/log_space.hpp"
#include "levytail/normal.hpp"
#include "levytail/rng.hpp"

namespace levytail {

struct JumpLaw::Data {
    LawKind kind = LawKind::lattice;
    std::string name;

    // discrete
    Rational step;
    std::vector<Atom> atoms;
    std::vector<double> suffix_log;  // log sum of masses of atoms[i..]
    std::vector<double> cumulative;  // normalized CDF over the kept atoms
    double log_trunc = kLogZero;
    RealFn analytic_log_tail;  // optional exact log P(X > u)

    // continuous
    RealFn hazard;
    RealFn log_tail_fn;
    double u0 = 0.0;
    std::function<double(RandomStream&)> sampler;

    std::optional<double> upper;
    double smin = 0.0;
    double smax = 0.0;
};

const char* to_string(LawKind kind) {
    switch (kind) {
        case LawKind::lattice: return "lattice";
        case LawKind::discrete_general: return "discrete_general";
        case LawKind::continuous_hazard: return "continuous_hazard";
    }
    return "?";
}

JumpLaw::JumpLaw(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

LawKind JumpLaw::kind() const { return data().kind; }
const std::string& JumpLaw::name() const { return data().name; }

double JumpLaw::log_tail(double u) const {
    const Data& d = data();
    if (!is_discrete()) return d.log_tail_fn(u);
    if (d.analytic_log_tail) return d.analytic_log_tail(u);
    Index first = d.step.first_index_above(u);
    auto it = std::lower_bound(d.atoms.begin(), d.atoms.end(), first,
                               [](const Atom& a, Index i) { return a.index < i; });
    if (it == d.atoms.end()) return kLogZero;
    return d.suffix_log[static_cast<std::size_t>(it - d.atoms.begin())];
}

double JumpLaw::tail(double u) const { return std::exp(log_tail(u)); }

double JumpLaw::log_tail_closed(double u) const {
    if (!is_discrete()) return log_tail(std::nextafter(u, -std::numeric_limits<double>::infinity()));
    const Data& d = data();
    Index j = d.step.first_index_above(u);
    if (to_long_double(j - 1) * d.step.num() == static_cast<long double>(u) * d.step.den()) {
        // u is itself a lattice point; include it
        double at = kLogZero;
        auto it = std::lower_bound(d.atoms.begin(), d.atoms.end(), j - 1,
                                   [](const Atom& a, Index i) { return a.index < i; });
        if (it != d.atoms.end() && it->index == j - 1) at = it->log_mass;
        return log_add(at, log_tail(u));
    }
    return log_tail(u);
}

const Rational& JumpLaw::step() const {
    if (!is_discrete()) throw std::logic_error("step() on continuous law " + name());
    return data().step;
}

std::span<const Atom> JumpLaw::atoms() const {
    if (!is_discrete()) throw std::logic_error("atoms() on continuous law " + name());
    return data().atoms;
}

double JumpLaw::value(const Atom& atom) const { return data().step.value_of(atom.index); }

Rational JumpLaw::lattice_step() const {
    const auto& a = atoms();
    Index g = 0;
    for (const auto& atom : a) g = index_gcd(g, atom.index - a.front().index);
    if (g == 0) return data().step;
    if (g > std::numeric_limits<std::int64_t>::max() / std::max<std::int64_t>(1, data().step.num()))
        throw std::overflow_error("lattice step overflow");
    return Rational(static_cast<std::int64_t>(g) * data().step.num(), data().step.den());
}

double JumpLaw::log_truncated_mass() const { return data().log_trunc; }

bool JumpLaw::is_symmetric(double rel_tol) const {
    if (!is_discrete()) return false;
    const auto& a = atoms();
    for (const auto& atom : a) {
        auto it = std::lower_bound(a.begin(), a.end(), -atom.index,
                                   [](const Atom& x, Index i) { return x.index < i; });
        if (it == a.end() || it->index != -atom.index) return false;
        double m1 = std::exp(atom.log_mass), m2 = std::exp(it->log_mass);
        if (std::fabs(m1 - m2) > rel_tol * std::max(m1, m2)) return false;
    }
    return true;
}

bool JumpLaw::has_hazard() const { return !is_discrete() && static_cast<bool>(data().hazard); }

double JumpLaw::hazard(double v) const {
    if (!has_hazard()) throw std::logic_error("law " + name() + " has no hazard function");
    return data().hazard(v);
}

double JumpLaw::threshold() const { return data().u0; }
std::optional<double> JumpLaw::upper_bound() const { return data().upper; }
double JumpLaw::support_min() const { return data().smin; }
double JumpLaw::support_max() const { return data().smax; }

double JumpLaw::sample(RandomStream& rng) const {
    const Data& d = data();
    if (is_discrete()) {
        double u = rng.uniform();
        auto it = std::upper_bound(d.cumulative.begin(), d.cumulative.end(), u);
        std::size_t i = std::min(static_cast<std::size_t>(it - d.cumulative.begin()), d.atoms.size() - 1);
        return d.step.value_of(d.atoms[i].index);
    }
    if (d.sampler) return d.sampler(rng);
    // invert the tail by bisection: find x with log_tail(x) = log(U)
    double target = std::log(rng.uniform());
    double lo = d.smin, hi = d.smax;
    if (d.log_tail_fn(lo) <= target) return lo;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (d.log_tail_fn(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

constexpr double kLogTrunc = -69.07755278982137;  // log(1e-30)

void finish_discrete(JumpLaw::Data& d) {
    std::sort(d.atoms.begin(), d.atoms.end(), [](const Atom& a, const Atom& b) { return a.index < b.index; });
    // merge duplicates
    std::vector<Atom> merged;
    for (const auto& a : d.atoms) {
        if (a.log_mass == kLogZero) continue;
        if (!merged.empty() && merged.back().index == a.index)
            merged.back().log_mass = log_add(merged.back().log_mass, a.log_mass);
        else
            merged.push_back(a);
    }
    if (merged.empty()) throw std::invalid_argument("discrete law " + d.name + " has no mass");
    d.atoms = std::move(merged);
    const std::size_t n = d.atoms.size();
    d.suffix_log.assign(n, kLogZero);
    LogSumAccumulator acc;
    for (std::size_t i = n; i-- > 0;) {
        acc.add(d.atoms[i].log_mass);
        d.suffix_log[i] = acc.value();
    }
    double total = std::exp(d.suffix_log[0]);
    d.cumulative.resize(n);
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        run += std::exp(d.atoms[i].log_mass) / total;
        d.cumulative[i] = run;
    }
    d.cumulative.back() = 1.0;
    d.smin = d.step.value_of(d.atoms.front().index);
    d.smax = d.step.value_of(d.atoms.back().index);
}

double find_support_max(const RealFn& log_tail, double start) {
    double x = std::max(1.0, start + 1.0);
    int guard = 0;
    while (log_tail(x) > kLogTrunc) {
        x = start + 2.0 * (x - start);
        if (++guard > 200) throw std::runtime_error("tail does not decay to 1e-30");
    }
    double lo = start, hi = x;
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (log_tail(mid) > kLogTrunc)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

void probe_hazard(const RealFn& h, double u0) {
    for (int j = 0; j < 15; ++j) {
        double v = u0 + 0.01 * std::ldexp(1.0, j);
        double hv = h(v);
        if (!(hv > 0.0)) throw std::invalid_argument("hazard must be positive; h(" + std::to_string(v) + ") <= 0");
    }
}

std::shared_ptr<JumpLaw::Data> continuous_data(std::string name, RealFn h, RealFn log_tail_fn, double u0) {
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::continuous_hazard;
    d->name = std::move(name);
    d->hazard = std::move(h);
    d->log_tail_fn = std::move(log_tail_fn);
    d->u0 = u0;
    d->smin = u0;
    d->smax = find_support_max(d->log_tail_fn, u0);
    return d;
}

}  // namespace

JumpLaw hazard_law(RealFn h, double u0, std::string name) {
    if (!(u0 >= 0.0)) throw std::invalid_argument("hazard threshold u0 must be >= 0");
    probe_hazard(h, u0);
    auto log_tail_fn = [h, u0](double u) {
        if (u <= u0) return 0.0;
        double err = 0.0;
        double integral =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(h, 0.0, u, 20, 1e-13, &err);
        return -integral;
    };
    return JumpLaw(continuous_data(std::move(name), std::move(h), std::move(log_tail_fn), u0));
}

JumpLaw hazard_law_closed(RealFn h, RealFn cumulative, double u0, std::string name, RealFn inverse_cumulative) {
    if (!(u0 >= 0.0)) throw std::invalid_argument("hazard threshold u0 must be >= 0");
    probe_hazard(h, u0);
    auto log_tail_fn = [cumulative, u0](double u) { return u <= u0 ? 0.0 : -cumulative(u); };
    auto d = continuous_data(std::move(name), std::move(h), std::move(log_tail_fn), u0);
    if (inverse_cumulative) {
        double h0 = u0 > 0.0 ? cumulative(u0) : 0.0;
        d->sampler = [inv = std::move(inverse_cumulative), h0, u0](RandomStream& rng) {
            double e = rng.exponential();
            return e <= h0 ? u0 : inv(e);
        };
    }
    return JumpLaw(d);
}

JumpLaw linear_hazard_law() {
    return hazard_law_closed([](double v) { return v; }, [](double u) { return 0.5 * u * u; }, 0.0, "hazard:linear",
                             [](double e) { return std::sqrt(2.0 * e); });
}

JumpLaw power_hazard_law(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("power hazard exponent c must be positive");
    return hazard_law_closed([c](double v) { return std::pow(v, c); },
                             [c](double u) { return std::pow(u, c + 1.0) / (c + 1.0); }, 0.0,
                             "hazard:power c=" + std::to_string(c),
                             [c](double e) { return std::pow((c + 1.0) * e, 1.0 / (c + 1.0)); });
}

JumpLaw exponential_law(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    return hazard_law_closed([rate](double) { return rate; }, [rate](double u) { return rate * u; }, 0.0,
                             "exponential rate=" + std::to_string(rate), [rate](double e) { return e / rate; });
}

JumpLaw half_normal_law() {
    constexpr double kLog2 = std::numbers::ln2;
    auto h = [](double v) { return std::exp(normal_log_pdf(v) - normal_tail(v)); };
    auto cumulative = [](double u) { return -(kLog2 + normal_tail(u)); };
    auto d = continuous_data("half-normal", h, [cumulative](double u) { return u <= 0.0 ? 0.0 : -cumulative(u); }, 0.0);
    d->sampler = [](RandomStream& rng) { return std::fabs(rng.normal()); };
    return JumpLaw(d);
}

JumpLaw factorial_law(double v) {
    if (!(v >= 1.0)) throw std::invalid_argument("factorial law: v >= 1 required");
    // log normalizer: log sum_n (n!)^-v
    LogSumAccumulator norm_acc;
    for (int n = 1; n < 60; ++n) norm_acc.add(-v * log_factorial(n));
    const double log_c = -norm_acc.value();

    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::discrete_general;
    d->name = "factorial v=" + std::to_string(v);
    d->step = Rational(1, 1);
    // smallest N with sum_{n>N} mass < 1e-30
    Index fact = 1;
    for (int n = 1; n <= 33; ++n) {
        fact *= n;
        d->atoms.push_back({fact, log_c - v * log_factorial(n)});
        LogSumAccumulator rest;
        for (int m = n + 1; m < n + 40; ++m) rest.add(log_c - v * log_factorial(m));
        if (rest.value() < kLogTrunc) {
            d->log_trunc = rest.value();
            break;
        }
    }
    d->analytic_log_tail = [v, log_c](double u) {
        if (u < 1.0) return 0.0;
        // smallest n with n! > u
        int n = 1;
        long double f = 1.0L;
        while (!(f > u)) {
            ++n;
            f *= n;
        }
        LogSumAccumulator acc;
        for (int m = n; m < n + 40; ++m) acc.add(log_c - v * log_factorial(m));
        return acc.value();
    };
    finish_discrete(*d);
    return JumpLaw(d);
}

JumpLaw lattice_factorial_law() {
    const double log_c = -std::log(std::numbers::e - 1.0);
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::lattice;
    d->name = "lattice-factorial";
    d->step = Rational(1, 1);
    for (int n = 1; n < 200; ++n) {
        d->atoms.push_back({n, log_c - log_factorial(n)});
        LogSumAccumulator rest;
        for (int m = n + 1; m < n + 40; ++m) rest.add(log_c - log_factorial(m));
        if (rest.value() < kLogTrunc) {
            d->log_trunc = rest.value();
            break;
        }
    }
    d->analytic_log_tail = [log_c](double u) {
        if (u < 1.0) return 0.0;
        double n0 = std::floor(u) + 1.0;
        LogSumAccumulator acc;
        for (int k = 0; k < 60; ++k) acc.add(log_c - std::lgamma(n0 + k + 1.0));
        return acc.value();
    };
    finish_discrete(*d);
    return JumpLaw(d);
}

JumpLaw geometric_law(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric p must lie in (0,1)");
    const double lq = std::log1p(-p);
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::lattice;
    d->name = "geometric p=" + std::to_string(p);
    d->step = Rational(1, 1);
    for (int n = 1;; ++n) {
        d->atoms.push_back({n, std::log(p) + (n - 1) * lq});
        if (n * lq < kLogTrunc) {
            d->log_trunc = n * lq;
            break;
        }
        if (n > 10'000'000) throw std::invalid_argument("geometric p too small to truncate");
    }
    d->analytic_log_tail = [lq](double u) { return u < 1.0 ? 0.0 : std::floor(u) * lq; };
    finish_discrete(*d);
    return JumpLaw(d);
}

JumpLaw discrete_law(const std::vector<Rational>& values, const std::vector<double>& probs, std::string name) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("discrete law needs matching non-empty values and probabilities");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("discrete law probabilities must be >= 0");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("discrete law probabilities must sum to 1");
    Rational step(0, 1);
    bool any = false;
    for (const auto& v : values) {
        if (v.num() == 0) continue;
        Rational av(std::llabs(v.num()), v.den());
        step = any ? rational_gcd(step, av) : av;
        any = true;
    }
    if (!any) step = Rational(1, 1);
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::lattice;
    d->name = std::move(name);
    d->step = step;
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        // values[i] / step is an integer by construction
        Index idx = static_cast<Index>(values[i].num()) * step.den() / (static_cast<Index>(values[i].den()) * step.num());
        d->atoms.push_back({idx, probs[i] > 0.0 ? std::log(probs[i]) : kLogZero});
        if (probs[i] > 0.0) vmax = std::max(vmax, values[i].to_double());
    }
    d->upper = vmax;
    finish_discrete(*d);
    return JumpLaw(d);
}

JumpLaw discrete_law(const std::vector<double>& values, const std::vector<double>& probs, std::string name) {
    std::vector<Rational> rv;
    rv.reserve(values.size());
    for (double v : values) rv.push_back(Rational::from_double(v));
    return discrete_law(rv, probs, std::move(name));
}

JumpLaw point_law(double value) {
    auto law = discrete_law(std::vector<double>{value}, std::vector<double>{1.0}, "point value=" + std::to_string(value));
    return law;
}

JumpLaw rademacher_law(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("rademacher scale must be positive");
    return discrete_law(std::vector<double>{-scale, scale}, std::vector<double>{0.5, 0.5},
                        "rademacher scale=" + std::to_string(scale));
}

namespace {

// floor(a / b) for b > 0
Index floor_div(Index a, Index b) {
    Index q = a / b;
    if ((a % b != 0) && (a < 0)) --q;
    return q;
}

JumpLaw discretize_impl(const JumpLaw& law, double a, Index shift, const std::string& tag) {
    if (!(a > 0.0)) throw std::invalid_argument("discretization step must be positive");
    Rational step = Rational::from_double(a);
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::lattice;
    d->name = tag + " base=" + law.name() + " step=" + std::to_string(a);
    d->step = step;
    if (law.is_discrete()) {
        const Rational& s = law.step();
        Index num = static_cast<Index>(s.num()) * step.den();
        Index den = static_cast<Index>(s.den()) * step.num();
        for (const auto& atom : law.atoms()) {
            if (std::fabs(to_long_double(atom.index)) * std::fabs((long double)num) > 1e37L)
                throw std::overflow_error("discretization index overflow");
            d->atoms.push_back({floor_div(atom.index * num, den) + shift, atom.log_mass});
        }
        d->log_trunc = law.log_truncated_mass();
    } else {
        Index lo = static_cast<Index>(std::floor(law.support_min() / step.to_double())) - 1;
        Index hi = static_cast<Index>(std::floor(law.support_max() / step.to_double())) + 1;
        if (hi - lo > 20'000'000) throw std::length_error("discretization produces too many cells");
        double prev = law.log_tail_closed(step.value_of(lo));
        for (Index n = lo; n <= hi; ++n) {
            double next = law.log_tail_closed(step.value_of(n + 1));
            double m = log_sub(prev, next);
            if (m != kLogZero) d->atoms.push_back({n + shift, m});
            prev = next;
        }
        d->log_trunc = prev;
    }
    if (auto ub = law.upper_bound())
        d->upper = step.value_of(static_cast<Index>(std::floor(*ub / step.to_double())) + shift);
    finish_discrete(*d);
    return JumpLaw(d);
}

}  // namespace

JumpLaw discretize(const JumpLaw& law, double a) { return discretize_impl(law, a, 0, "discretize"); }

JumpLaw discretize_upper(const JumpLaw& law, double a) { return discretize_impl(law, a, 1, "discretize-upper"); }

LevyMeasureLaw from_levy_measure(RealFn rho_tail, double rho_neg_mass, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("levy measure level a must be positive");
    if (!(rho_neg_mass >= 0.0) || !std::isfinite(rho_neg_mass))
        throw std::invalid_argument("negative-half Levy mass must be finite and >= 0");
    const double lambda_plus = rho_tail(a);
    if (!(lambda_plus > 0.0)) throw std::invalid_argument("rho((a, inf)) must be positive");
    auto d = std::make_shared<JumpLaw::Data>();
    d->kind = LawKind::continuous_hazard;
    d->name = "levy-measure a=" + std::to_string(a);
    d->log_tail_fn = [rho_tail, a, lambda_plus](double x) {
        double r = rho_tail(std::max(x, a));
        return r > 0.0 ? std::log(r / lambda_plus) : kLogZero;
    };
    d->u0 = a;
    d->smin = a;
    d->smax = find_support_max(d->log_tail_fn, a);
    return {lambda_plus, JumpLaw(d)};
}

}  // namespace levytail
