#pragma once

#include <limits>
#include <span>

namespace levytail {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b))
double log_add(double a, double b);
// log(1 - exp(x)) for x <= 0
double log1mexp(double x);
// log(exp(a) - exp(b)) for a >= b; kLogZero when equal
double log_sub(double a, double b);
double log_sum(std::span<const double> xs);
double log_factorial(int n);

// Streaming log-sum-exp with Neumaier compensation on the scaled mantissa.
class LogSumAccumulator {
public:
    void add(double log_x);
    void add_scaled(double log_x, double weight_log) { add(log_x + weight_log); }
    double value() const;
    bool empty() const { return max_ == kLogZero; }

private:
    double max_ = kLogZero;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace levytail
