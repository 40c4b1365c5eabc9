#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levytail/rational.hpp"

namespace levytail {

class RandomStream;

enum class LawKind { lattice, discrete_general, continuous_hazard };

const char* to_string(LawKind kind);

// One support point of a discrete law: value = index * step.
struct Atom {
    Index index;
    double log_mass;
};

using RealFn = std::function<double(double)>;

/// Jump-size distribution.
///
/// Discrete laws keep their support on an integer lattice scaled by an exact
/// rational step, with probabilities in log-space. Continuous laws are given
/// through a hazard h (tail = exp(-integral_0^u h) above the threshold u0) or,
/// for laws built from a Levy measure, through a tail function directly.
///
/// Immutable; copies share state.
class JumpLaw {
public:
    LawKind kind() const;
    const std::string& name() const;
    bool is_discrete() const { return kind() != LawKind::continuous_hazard; }

    /// log P(X > u)
    double log_tail(double u) const;
    double tail(double u) const;
    /// log P(X >= u)
    double log_tail_closed(double u) const;

    // Discrete laws only.
    const Rational& step() const;
    std::span<const Atom> atoms() const;
    double value(const Atom& atom) const;
    /// step * gcd of index differences
    Rational lattice_step() const;
    /// log of the probability dropped by support truncation (kLogZero if none)
    double log_truncated_mass() const;
    /// mass(y) == mass(-y) within rel_tol for every atom
    bool is_symmetric(double rel_tol = 1e-12) const;

    // Continuous laws only.
    bool has_hazard() const;
    double hazard(double v) const;
    double threshold() const;

    /// Finite essential supremum when the law is genuinely bounded.
    std::optional<double> upper_bound() const;
    /// Support range actually represented (truncated at tail 1e-30 for unbounded laws).
    double support_min() const;
    double support_max() const;

    double sample(RandomStream& rng) const;

    struct Data;
    explicit JumpLaw(std::shared_ptr<const Data> data);

private:
    const Data& data() const { return *data_; }
    std::shared_ptr<const Data> data_;
};

// Relative truncation level for unbounded supports.
inline constexpr double kSupportTruncation = 1e-30;

/// Continuous law with hazard h above u0; log-tail by adaptive quadrature
/// (relative error <= 1e-10). Tail is 1 on (-inf, u0].
JumpLaw hazard_law(RealFn h, double u0 = 0.0, std::string name = "hazard");

/// Hazard law with a closed-form cumulative hazard H(u) = integral_0^u h and,
/// optionally, its inverse for sampling.
JumpLaw hazard_law_closed(RealFn h, RealFn cumulative, double u0, std::string name,
                          RealFn inverse_cumulative = nullptr);

JumpLaw linear_hazard_law();             // h(v) = v
JumpLaw power_hazard_law(double c);      // h(v) = v^c
JumpLaw exponential_law(double rate);    // h(v) = rate
JumpLaw half_normal_law();               // |N(0,1)|

/// P(X = n!) = C(v) / (n!)^v, n >= 1.
JumpLaw factorial_law(double v = 1.0);
/// P(X = n) = 1 / ((e - 1) n!), n >= 1, on step 1.
JumpLaw lattice_factorial_law();
/// P(X = n) = p (1 - p)^(n-1), n >= 1.
JumpLaw geometric_law(double p);
JumpLaw point_law(double value);
/// Fair +-scale.
JumpLaw rademacher_law(double scale = 1.0);
/// Finite discrete law; probabilities must sum to 1.
JumpLaw discrete_law(const std::vector<double>& values, const std::vector<double>& probs,
                     std::string name = "discrete");
JumpLaw discrete_law(const std::vector<Rational>& values, const std::vector<double>& probs,
                     std::string name = "discrete");

/// Lattice law of floor(X / a) * a.
JumpLaw discretize(const JumpLaw& law, double a);
/// discretize(law, a) shifted up by a; stochastically dominates law.
JumpLaw discretize_upper(const JumpLaw& law, double a);

struct LevyMeasureLaw {
    double lambda_plus;
    JumpLaw law;
};

/// Normalizes the positive part of a Levy measure above level a:
/// lambda_plus = rho((a, inf)), tail(x) = rho((max(x, a), inf)) / lambda_plus.
LevyMeasureLaw from_levy_measure(RealFn rho_tail, double rho_neg_mass, double a);

}  // namespace levytail
