#include "levytail/normal.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levytail/log_space.hpp"

namespace levytail {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSwitch = 30.0;

// log of 1 - 1/x^2 + 3/x^4 - 15/x^6 + ... truncated at the smallest term
double mills_series_log(double x) {
    double inv2 = 1.0 / (x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        double next = -term * (2 * k - 1) * inv2;
        if (std::fabs(next) >= std::fabs(term)) break;
        term = next;
        sum += term;
    }
    return std::log(sum);
}

}  // namespace

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_tail(double x) {
    if (std::isnan(x)) throw std::domain_error("normal_tail of NaN");
    if (x == std::numeric_limits<double>::infinity()) return kLogZero;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x > kSwitch) {
        double v = normal_log_pdf(x) - std::log(x) + mills_series_log(x);
        return v;
    }
    if (x < -kSwitch) return -std::exp(normal_tail(-x));
    double p = 0.5 * std::erfc(x / std::numbers::sqrt2);
    if (x < 0.0) return std::log1p(-0.5 * std::erfc(-x / std::numbers::sqrt2));
    assert(!(x > 1.0) || (p >= std::exp(normal_tail_bracket(x).log_lower) * (1 - 1e-13) &&
                          p <= std::exp(normal_tail_bracket(x).log_upper) * (1 + 1e-13)));
    return std::log(p);
}

double normal_log_cdf(double x) { return normal_tail(-x); }

double normal_cdf(double x) { return std::exp(normal_log_cdf(x)); }

NormalTailBracket normal_tail_bracket(double x) {
    if (!(x > 1.0)) throw std::domain_error("normal tail bracket requires x > 1");
    double lp = normal_log_pdf(x);
    return {lp + std::log(1.0 / x - 1.0 / (x * x * x)), lp - std::log(x)};
}

}  // namespace levytail
