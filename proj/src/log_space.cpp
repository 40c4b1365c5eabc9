#include "levytail/log_space.hpp"

#include <cmath>
#include <stdexcept>

namespace levytail {

double log_add(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

double log1mexp(double x) {
    if (x > 0.0) throw std::domain_error("log1mexp of positive argument");
    if (x == 0.0) return kLogZero;
    return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_sub(double a, double b) {
    if (b == kLogZero) return a;
    if (b > a) {
        // tolerate rounding noise at the level of a few ulps
        if (b - a < 1e-12) return kLogZero;
        throw std::domain_error("log_sub with b > a");
    }
    if (a == b) return kLogZero;
    return a + log1mexp(b - a);
}

double log_sum(std::span<const double> xs) {
    LogSumAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void LogSumAccumulator::add(double log_x) {
    if (log_x == kLogZero) return;
    if (log_x > max_) {
        double scale = max_ == kLogZero ? 0.0 : std::exp(max_ - log_x);
        sum_ *= scale;
        comp_ *= scale;
        max_ = log_x;
        log_x = 0.0;
    } else {
        log_x -= max_;
    }
    double term = std::exp(log_x);
    double t = sum_ + term;
    if (std::fabs(sum_) >= std::fabs(term))
        comp_ += (sum_ - t) + term;
    else
        comp_ += (term - t) + sum_;
    sum_ = t;
}

double LogSumAccumulator::value() const {
    if (max_ == kLogZero) return kLogZero;
    return max_ + std::log(sum_ + comp_);
}

}  // namespace levytail
