#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace levytail {

// Lattice coordinate. Factorial supports reach 27! and k-fold sums of them,
// which overflow 64 bits.
using Index = __int128;

double to_double(Index i);
long double to_long_double(Index i);
std::string to_string(Index i);
Index index_gcd(Index a, Index b);

// Positive rational step of a lattice; values are index * step.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den);

    // Best approximation with denominator <= max_den; exact for short decimals.
    static Rational from_double(double x, std::int64_t max_den = 1'000'000'000);
    // Parses "2.5", "1/3", "7".
    static Rational parse(std::string_view text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    double value_of(Index i) const;
    // Smallest index i with i * step > u.
    Index first_index_above(double u) const;
    // Largest index i with i * step <= u.
    Index last_index_at_or_below(double u) const { return first_index_above(u) - 1; }
    bool operator==(const Rational&) const = default;

private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 1;
};

// Largest rational g with a/g and b/g both integers.
Rational rational_gcd(const Rational& a, const Rational& b);

}  // namespace levytail
