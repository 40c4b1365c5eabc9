#include "levytail/series.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levytail/normal.hpp"

namespace levytail {

namespace {

constexpr int kMaxDepth = 400;
constexpr int kNoVanishing = -1;

// Largest j such that P(S_i > v) = 0 for all i <= j, from the law's bound
// alone; kNoVanishing when nothing can be said.
int vanishing_folds(const JumpLaw& law, double v) {
    auto ub = law.upper_bound();
    if (!ub || v < 0.0) return kNoVanishing;
    if (*ub <= 0.0) return INT_MAX;
    double j = std::floor(v / *ub);
    return j >= 1e9 ? 1'000'000'000 : static_cast<int>(j);
}

double log_poisson_weight(double lambda, int k) {
    return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

// Fills the remainder fields and enforces remainder <= tol * value.
void certify(SeriesTruncation& t, double log_value, double tol, const char* what) {
    t.remainder_log_bound = log_add(t.log_poisson_remainder, t.log_pruning_bound);
    if (t.remainder_log_bound <= kNegligibleLog) return;
    const double budget = std::log(tol) + log_value;
    if (t.log_poisson_remainder > kNegligibleLog && t.log_poisson_remainder > budget)
        throw InsufficientDepth(std::string(what) + ": series depth " + std::to_string(t.k_used) +
                                " cannot meet tolerance");
    if (t.log_pruning_bound > budget)
        throw std::runtime_error(std::string(what) + ": convolution pruning error exceeds tolerance");
    if (t.remainder_log_bound > budget + std::log(2.0))
        throw InsufficientDepth(std::string(what) + ": combined remainder exceeds tolerance");
}

SeriesValue model_series(const LevyModel& m, const ConvolutionTable& table, double u, double tol) {
    const double v = u + m.drift_b;
    if (m.sigma == 0.0) return compound_tail(m.lambda, table, v, tol);
    const int K = table.depth();
    LogSumAccumulator acc;
    for (int k = 0; k <= K; ++k)
        acc.add(log_poisson_weight(m.lambda, k) + gaussian_smoothed_tail(table, k, m.sigma, v));
    SeriesValue out;
    out.log_value = std::min(0.0, acc.value());  // rounding can push a sure event past one
    out.trunc.k_used = K;
    out.trunc.log_poisson_remainder = poisson_log_upper_tail(m.lambda, K);
    out.trunc.log_pruning_bound = table.log_deficit(K);
    certify(out.trunc, out.log_value, tol, "model_tail");
    return out;
}

SeriesValue q_series(const LevyModel& model, const ConvolutionTable& table, int m, double u, double tol) {
    const double lambda = model.lambda, b = model.drift_b;
    const int K = table.depth();
    const Rational& step = table.step();
    LogSumAccumulator acc;
    for (int k = 1; k <= K; ++k) {
        const double ak = a_k_seq(k, m);
        if (ak <= 0.0) continue;
        const Fold& f = table.fold(k);
        const double w = log_poisson_weight(lambda, k);
        // int_0^{a_k} k t^{k-1} 1{y > u + b t} dt = min(a_k, (y - u)/b)_+^k
        const Index lo = step.first_index_above(u);
        const Index hi = step.first_index_above(u + b * ak);
        auto first = [&](Index idx) {
            return static_cast<std::size_t>(
                std::lower_bound(f.atoms.begin(), f.atoms.end(), idx,
                                 [](const Atom& a, Index i) { return a.index < i; }) -
                f.atoms.begin());
        };
        const std::size_t i_lo = first(lo), i_hi = first(hi);
        if (i_hi < f.atoms.size()) acc.add(w + f.suffix_log[i_hi] + k * std::log(ak));
        for (std::size_t i = i_lo; i < i_hi; ++i) {
            double c = (table.value(f.atoms[i]) - u) / b;
            if (c > 0.0) acc.add(w + f.atoms[i].log_mass + k * std::log(std::min(c, ak)));
        }
    }
    SeriesValue out;
    out.log_value = std::min(0.0, acc.value());
    out.trunc.k_used = K;
    out.trunc.log_poisson_remainder =
        poisson_log_upper_tail(lambda, std::max(K, vanishing_folds(table.base(), u)));
    out.trunc.log_pruning_bound = table.log_deficit(K);
    certify(out.trunc, out.log_value, tol, "q_u");
    return out;
}

int initial_depth(double lambda) {
    return std::max(8, static_cast<int>(std::ceil(lambda + 6.0 * std::sqrt(lambda) + 6.0)));
}

}  // namespace

void LevyModel::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be non-negative");
    if (!std::isfinite(drift_b)) throw std::invalid_argument("drift b must be finite");
    if (!jumps.is_discrete() && !(bracket_step > 0.0))
        throw std::invalid_argument("bracket step must be positive");
}

double poisson_log_upper_tail(double lambda, int k) {
    if (k == INT_MAX) return kLogZero;
    if (k + 2.0 <= lambda) return 0.0;
    double bound = log_poisson_weight(lambda, k + 1) - std::log1p(-lambda / (k + 2.0));
    return std::min(bound, 0.0);
}

SeriesValue compound_tail(double lambda, const ConvolutionTable& table, double u, double tol) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    // a sure event: every S_k >= 0 > u, so skip the rounding of the full sum
    if (u < 0.0 && table.base().support_min() >= 0.0) return SeriesValue{0.0, {}};
    const int K = table.depth();
    LogSumAccumulator acc;
    for (int k = 0; k <= K; ++k) {
        double lt = sk_tail(table, k, u);
        if (lt > kLogZero) acc.add(log_poisson_weight(lambda, k) + lt);
    }
    SeriesValue out;
    out.log_value = std::min(0.0, acc.value());
    out.trunc.k_used = K;
    out.trunc.log_poisson_remainder =
        poisson_log_upper_tail(lambda, std::max(K, vanishing_folds(table.base(), u)));
    out.trunc.log_pruning_bound = table.log_deficit(K);
    certify(out.trunc, out.log_value, tol, "compound_tail");
    return out;
}

TailEngine::TailEngine(LevyModel model, double prune_eps, std::size_t support_cap)
    : model_(std::move(model)), prune_eps_(prune_eps), cap_(support_cap) {
    model_.validate();
}

const ConvolutionTable& TailEngine::lower_table(int depth) {
    if (!lower_) {
        JumpLaw base = model_.jumps.is_discrete() ? model_.jumps : discretize(model_.jumps, model_.bracket_step);
        lower_ = std::make_unique<ConvolutionTable>(base, depth, prune_eps_, cap_);
    }
    lower_->extend(depth);
    return *lower_;
}

const ConvolutionTable& TailEngine::upper_table(int depth) {
    if (!bracketed()) return lower_table(depth);
    if (!upper_) {
        upper_ = std::make_unique<ConvolutionTable>(discretize_upper(model_.jumps, model_.bracket_step), depth,
                                                    prune_eps_, cap_);
    }
    upper_->extend(depth);
    return *upper_;
}

template <class Fn>
ModelTail TailEngine::bracketed_series(Fn&& fn) {
    for (int depth = initial_depth(model_.lambda);; depth = depth * 3 / 2 + 2) {
        try {
            SeriesValue lo = fn(lower_table(depth));
            ModelTail out;
            out.trunc = lo.trunc;
            out.log_lower = lo.log_value;
            out.log_upper = lo.log_value;
            if (bracketed()) {
                SeriesValue hi = fn(upper_table(depth));
                out.exact = false;
                out.trunc = hi.trunc;
                // computed partial sums under-estimate; widen the upper end by the certificate
                out.log_upper = log_add(hi.log_value, hi.trunc.remainder_log_bound);
            }
            return out;
        } catch (const InsufficientDepth&) {
            if (depth >= kMaxDepth) throw;
        }
    }
}

ModelTail TailEngine::tail(double u, double tol) {
    return bracketed_series([&](const ConvolutionTable& t) { return model_series(model_, t, u, tol); });
}

ModelTail TailEngine::jump_tail(double v, double tol) {
    return bracketed_series([&](const ConvolutionTable& t) { return compound_tail(model_.lambda, t, v, tol); });
}

ModelTail TailEngine::q(double u, double tol) {
    if (model_.sigma != 0.0) throw std::invalid_argument("Q(u) is defined for sigma = 0");
    if (!(model_.drift_b > 0.0)) throw std::invalid_argument("Q(u) needs drift b > 0");
    int m = 0;
    auto fn = [&](const ConvolutionTable& t) {
        int mt = m_index(t, model_.drift_b);
        if (m == 0) m = mt;
        if (mt != m) throw std::runtime_error("Q(u): bracketing laws disagree on m; use a finer bracket step");
        return q_series(model_, t, m, u, tol);
    };
    return bracketed_series(fn);
}

ModelTail model_tail(const LevyModel& model, double u, double tol) {
    TailEngine engine(model);
    return engine.tail(u, tol);
}

double a_k_seq(int k, int m) {
    if (k < 1 || m < 1) throw std::invalid_argument("a_k needs k >= 1 and m >= 1");
    return std::max(1.0 - (m + 1.0) * std::log(static_cast<double>(k)) / k, 0.0);
}

SeriesValue q_u(const LevyModel& model, const ConvolutionTable& table, double u, double tol) {
    if (model.sigma != 0.0) throw std::invalid_argument("Q(u) is defined for sigma = 0");
    if (!(model.drift_b > 0.0)) throw std::invalid_argument("Q(u) needs drift b > 0");
    return q_series(model, table, m_index(table, model.drift_b), u, tol);
}

SeriesValue q_u(const LevyModel& model, double u, double tol) {
    if (!model.jumps.is_discrete()) throw std::invalid_argument("q_u needs discrete jumps; use TailEngine::q");
    TailEngine engine(model);
    ModelTail t = engine.q(u, tol);
    return {t.log_lower, t.trunc};
}

SeriesValue g_u(double lambda, const ConvolutionTable& table, double u, double tol) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const int K = table.depth();
    LogSumAccumulator acc;
    for (int k = 2; k <= K + 1; ++k) {
        double lt = sk_tail(table, k - 1, u);
        if (lt > kLogZero) acc.add(k * std::log(lambda) - std::lgamma(k + 1.0) + lt);
    }
    SeriesValue out;
    out.log_value = acc.value();
    out.trunc.k_used = K + 1;
    int j0 = vanishing_folds(table.base(), u);
    int last = j0 == INT_MAX ? INT_MAX : std::max(K + 1, j0 + 1);
    out.trunc.log_poisson_remainder = lambda + poisson_log_upper_tail(lambda, last);
    out.trunc.log_pruning_bound = lambda + table.log_deficit(K);
    certify(out.trunc, out.log_value, tol, "g_u");
    return out;
}

SeriesValue d_u(const LevyModel& model, double u, double tol) {
    model.validate();
    if (model.sigma != 0.0 || model.drift_b != 0.0) throw std::invalid_argument("D(u) needs sigma = 0 and b = 0");
    const JumpLaw& law = model.jumps;
    if (!law.is_discrete() || !law.is_symmetric(1e-12)) throw std::invalid_argument("D(u) needs a symmetric jump law");

    const int j0 = vanishing_folds(law, u);
    SeriesValue out;
    if (j0 != kNoVanishing && poisson_log_upper_tail(model.lambda, j0) <= kNegligibleLog) {
        out.trunc.k_used = 0;
        out.trunc.log_poisson_remainder = poisson_log_upper_tail(model.lambda, j0);
        certify(out.trunc, out.log_value, tol, "d_u");
        return out;
    }
    for (int n_max = initial_depth(model.lambda);; n_max *= 2) {
        BarrierSeries bs = barrier_tail_series(law, n_max, u);
        LogSumAccumulator acc;
        for (int n = 1; n <= n_max; ++n) {
            double c = bs.log_crossing[static_cast<std::size_t>(n - 1)];
            if (c > kLogZero) acc.add(log_poisson_weight(model.lambda, n) + c);
        }
        out.log_value = acc.value();
        out.trunc.k_used = n_max;
        out.trunc.log_poisson_remainder = poisson_log_upper_tail(model.lambda, std::max(n_max, j0));
        out.trunc.log_pruning_bound = bs.pruned > 0.0 ? std::log(bs.pruned) : kLogZero;
        try {
            certify(out.trunc, out.log_value, tol, "d_u");
            return out;
        } catch (const InsufficientDepth&) {
            if (n_max >= kMaxDepth) throw;
        }
    }
}

ExpMoments exp_moments_normal(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    const double e = std::exp(0.5 * alpha * alpha);
    ExpMoments m;
    m.m_plus = e * normal_cdf(alpha);
    m.m_minus = e * std::exp(normal_tail(alpha));
    m.l_limit = 2.0 * normal_cdf(alpha);
    return m;
}

double ik_value(int k, const ConvolutionTable& table) {
    if (k < 2) throw std::invalid_argument("I_k needs k >= 2");
    return std::exp(-1.0 - std::lgamma(static_cast<double>(k)) + gaussian_smoothed_tail(table, k - 1, 1.0, 0.0));
}

const char* to_string(JkVariant v) {
    switch (v) {
        case JkVariant::corrected: return "corrected";
        case JkVariant::printed: return "printed";
        case JkVariant::penultimate: return "penultimate";
    }
    return "?";
}

namespace {

struct WeightedPair {
    double s;
    double x;
    double mass;
};

// P(W > -s, W + B' <= -s - x) with W ~ N(0, y), B' ~ N(0, 1 - y) independent.
double penultimate_prob(double s, double x, double y) {
    const double sy = std::sqrt(y), sc = std::sqrt(1.0 - y);
    auto f = [&](double r) {
        return std::exp(normal_log_pdf((r - s) / sy) + normal_tail((x + r) / sc)) / sy;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double split = std::max(s, 0.0);
    double total = 0.0;
    if (split > 0.0) total += GK::integrate(f, 0.0, split, 12, 1e-10);
    total += GK::integrate(f, split, std::numeric_limits<double>::infinity(), 12, 1e-10);
    return total;
}

}  // namespace

double jk_value(int k, const ConvolutionTable& table, JkVariant variant) {
    if (k < 2) throw std::invalid_argument("J_k needs k >= 2");
    const Fold& prev = table.fold(k - 2);
    const auto base = table.base().atoms();

    // Every term carries a normal tail at argument >= min(s, s + x) / sqrt(y) >= min(s, s + x);
    // beyond 38.5 it is below the smallest double.
    constexpr double kCut = 38.5;
    std::vector<WeightedPair> pairs;
    for (const auto& a : prev.atoms) {
        double s = table.value(a);
        for (const auto& b : base) {
            double x = table.value(b);
            bool keep = false;
            switch (variant) {
                case JkVariant::corrected: keep = x > 0.0 && s <= kCut; break;
                case JkVariant::printed: keep = x < 0.0 && s + x <= kCut; break;
                case JkVariant::penultimate: keep = s + x <= kCut; break;
            }
            if (keep) pairs.push_back({s, x, std::exp(a.log_mass + b.log_mass)});
        }
    }
    if (pairs.empty()) return 0.0;

    auto inner = [&](double y) {
        if (y <= 0.0 || y >= 1.0) return 0.0;
        const double sy = std::sqrt(y);
        double sum = 0.0;
        for (const auto& p : pairs) {
            double v = 0.0;
            switch (variant) {
                case JkVariant::corrected:  // P(-s - x < t <= -s)
                    v = std::exp(log_sub(normal_tail(p.s / sy), normal_tail((p.s + p.x) / sy)));
                    break;
                case JkVariant::printed:  // P(-s < t <= -s - x)
                    v = std::exp(log_sub(normal_tail((p.s + p.x) / sy), normal_tail(p.s / sy)));
                    break;
                case JkVariant::penultimate: v = penultimate_prob(p.s, p.x, y); break;
            }
            sum += p.mass * v;
        }
        return sum;
    };
    const int power = variant == JkVariant::penultimate ? k - 2 : k - 1;
    auto outer = [&](double y) { return inner(y) * std::pow(y, power) * (1.0 - y); };
    double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, 15, 1e-9);
    return integral * std::exp(-1.0 - std::lgamma(k - 1.0));
}

}  // namespace levytail
