#pragma once

namespace levytail {

// log P(N(0,1) > x). Uses erfc up to |x| = 30 and the asymptotic
// Mills-ratio expansion beyond.
double normal_tail(double x);
// log P(N(0,1) <= x)
double normal_log_cdf(double x);
double normal_cdf(double x);
double normal_log_pdf(double x);

// Mills-ratio bracket for x > 1, as logs:
//   lower = log[(1/x - 1/x^3) phi(x)], upper = log[phi(x) / x]
struct NormalTailBracket {
    double log_lower;
    double log_upper;
};
NormalTailBracket normal_tail_bracket(double x);

}  // namespace levytail
