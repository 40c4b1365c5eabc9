#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "levytail/convolution.hpp"
#include "levytail/jump_law.hpp"
#include "levytail/log_space.hpp"

namespace levytail {

/// X(t) = sigma B(t) + Z(t) - b t with Z compound Poisson of rate lambda.
struct LevyModel {
    double sigma = 0.0;
    double drift_b = 0.0;
    double lambda = 1.0;
    JumpLaw jumps;
    // Continuous jump laws are bracketed by discretizations with this step.
    double bracket_step = 0.002;

    void validate() const;
};

struct InsufficientDepth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Truncation certificate of a Poisson-weighted series.
struct SeriesTruncation {
    int k_used = 0;
    double log_poisson_remainder = kLogZero;  // bound on the dropped terms
    double log_pruning_bound = kLogZero;      // bound on convolution pruning error
    double remainder_log_bound = kLogZero;    // log of the sum of both
};

struct SeriesValue {
    double log_value = kLogZero;
    SeriesTruncation trunc;
};

// Series with a remainder bound below this (as a log) count as exact.
inline constexpr double kNegligibleLog = -700.0;

/// Upper bound on log P(N > k), N ~ Poisson(lambda):
/// w_{k+1} / (1 - lambda / (k + 2)) when k + 2 > lambda, else 0.
double poisson_log_upper_tail(double lambda, int k);

/// log P(Z(1) > u) = log e^{-lambda} sum_k lambda^k/k! P(S_k > u)
SeriesValue compound_tail(double lambda, const ConvolutionTable& table, double u, double tol);

/// Endpoint tail of a model. Discrete jumps give one value (lower == upper);
/// continuous jumps give the discretization sandwich.
struct ModelTail {
    double log_lower = kLogZero;
    double log_upper = kLogZero;
    bool exact = true;
    SeriesTruncation trunc;

    double mid() const { return 0.5 * (std::exp(log_lower) + std::exp(log_upper)); }
    double half_width() const { return 0.5 * (std::exp(log_upper) - std::exp(log_lower)); }
};

/// Owns the convolution tables of one model and deepens them on demand, so a
/// sweep over u pays for the folds once.
class TailEngine {
public:
    explicit TailEngine(LevyModel model, double prune_eps = kDefaultPruneEps,
                        std::size_t support_cap = kDefaultSupportCap);

    const LevyModel& model() const { return model_; }
    bool bracketed() const { return !model_.jumps.is_discrete(); }

    /// Table of the (lower) discretized jump law, at least `depth` folds deep.
    const ConvolutionTable& lower_table(int depth);
    /// Table of the dominating discretization; same as lower for discrete jumps.
    const ConvolutionTable& upper_table(int depth);

    /// P(X(1) > u)
    ModelTail tail(double u, double tol);
    /// P(Z(1) > v) for the jump part alone
    ModelTail jump_tail(double v, double tol);
    /// Q(u); requires sigma = 0 and b > 0
    ModelTail q(double u, double tol);

private:
    template <class Fn>
    ModelTail bracketed_series(Fn&& fn);

    LevyModel model_;
    double prune_eps_;
    std::size_t cap_;
    std::unique_ptr<ConvolutionTable> lower_;
    std::unique_ptr<ConvolutionTable> upper_;
};

ModelTail model_tail(const LevyModel& model, double u, double tol);

/// a_k = max{1 - (m + 1) log k / k, 0}
double a_k_seq(int k, int m);

/// Q(u) = lambda e^{-lambda} sum_k int_0^{a_k} (lambda t)^{k-1}/(k-1)! P(S_k > u + b t) dt.
/// The integrand is a step function of t, so each integral is a finite sum.
SeriesValue q_u(const LevyModel& model, const ConvolutionTable& table, double u, double tol);
SeriesValue q_u(const LevyModel& model, double u, double tol);

/// G(u) = sum_{k>=2} lambda^k P(S_{k-1} > u) / k!
SeriesValue g_u(double lambda, const ConvolutionTable& table, double u, double tol);

/// D(u) = e^{-lambda} sum_{n>=1} lambda^n/n! P(max_{k<n} S_k <= u, S_n > u)
SeriesValue d_u(const LevyModel& model, double u, double tol);

struct ExpMoments {
    double m_plus;
    double m_minus;
    double l_limit;
};
ExpMoments exp_moments_normal(double alpha);

/// I_k = P(S_{k-1} + B(1) > 0) / (e (k-1)!)
double ik_value(int k, const ConvolutionTable& table);

enum class JkVariant {
    // crossing event {S_{k-2} <= -t < S_{k-1}}, weight y^{k-1}(1-y)
    corrected,
    // event as printed, {S_{k-1} <= -t, S_{k-2} > -t}; empty for positive jumps
    printed,
    // P(tau = k, X(1) <= u, X(Gamma_{k-1}) > u) per unit (k-1) P(X_1 = u):
    // Brownian increment after Gamma_{k-1} kept, weight y^{k-2}(1-y)
    penultimate,
};
const char* to_string(JkVariant v);

double jk_value(int k, const ConvolutionTable& table, JkVariant variant = JkVariant::corrected);

}  // namespace levytail
