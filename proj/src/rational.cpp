#include "levytail/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace levytail {

double to_double(Index i) { return static_cast<double>(i); }
long double to_long_double(Index i) { return static_cast<long double>(i); }

std::string to_string(Index i) {
    if (i == 0) return "0";
    bool neg = i < 0;
    unsigned __int128 v = neg ? static_cast<unsigned __int128>(-(i + 1)) + 1 : static_cast<unsigned __int128>(i);
    std::string out;
    while (v > 0) {
        out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    if (neg) out.insert(out.begin(), '-');
    return out;
}

Index index_gcd(Index a, Index b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        Index t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("rational with zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::from_double(double x, std::int64_t max_den) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational from non-finite value");
    // Continued fraction convergents.
    long double r = x;
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int it = 0; it < 64; ++it) {
        long double a = std::floor(r);
        if (std::fabs(a) > 9e18L) break;
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t h2 = ai * h1 + h0;
        std::int64_t k2 = ai * k1 + k0;
        if (k2 > max_den || k2 <= 0) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::fabs(static_cast<long double>(h1) / k1 - x) <= 1e-15L * std::max(1.0L, std::fabs((long double)x)))
            break;
        long double frac = r - a;
        if (frac < 1e-18L) break;
        r = 1.0L / frac;
    }
    return Rational(h1, k1);
}

Rational Rational::parse(std::string_view text) {
    std::string s(text);
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
    auto dot = s.find('.');
    if (dot == std::string::npos || s.find_first_of("eE") != std::string::npos) {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
        return from_double(v);
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    std::size_t pos = 0;
    long long num = std::stoll(digits, &pos);
    if (pos != digits.size()) throw std::invalid_argument("malformed number '" + s + "'");
    return Rational(num, den);
}

double Rational::value_of(Index i) const {
    return static_cast<double>(to_long_double(i) * num_ / den_);
}

Index Rational::first_index_above(double u) const {
    // i * num / den > u  <=>  i > u * den / num
    long double r = static_cast<long double>(u) * den_ / num_;
    constexpr long double lim = 1e36L;
    if (r > lim) return static_cast<Index>(lim);
    if (r < -lim) return -static_cast<Index>(lim);
    long double f = std::floor(r);
    Index i = static_cast<Index>(f) + 1;
    // guard against rounding of u * den / num near integers
    while (to_long_double(i - 1) * num_ > static_cast<long double>(u) * den_) --i;
    while (!(to_long_double(i) * num_ > static_cast<long double>(u) * den_)) ++i;
    return i;
}

Rational rational_gcd(const Rational& a, const Rational& b) {
    std::int64_t n = std::gcd(a.num(), b.num());
    std::int64_t d = std::lcm(a.den(), b.den());
    if (n == 0) return a.num() == 0 ? b : a;
    return Rational(n, d);
}

}  // namespace levytail
