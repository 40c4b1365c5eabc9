#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levytail/rng.hpp"
#include "levytail/series.hpp"

namespace levytail {

/// Inverse of P(max > m | endpoints a, c) = exp(-2 (m - a)(m - c) / (sigma^2 t)),
/// the maximum of a Brownian bridge of variance sigma^2 t. Drift does not
/// change the law once both endpoints are fixed.
double bridge_max_inverse(double a, double c, double t, double sigma, double p);

/// One exact realization of X on [0, 1]. Vectors are reused between calls.
struct PathSample {
    int tau = 0;
    std::vector<double> epochs;    // Gamma_1 < ... < Gamma_tau
    std::vector<double> jumps;
    std::vector<double> brownian;  // B at 0, Gamma_1, ..., Gamma_tau, 1
    double endpoint = 0.0;         // X(1)
    double supremum = 0.0;         // sup over [0, 1], both ends included
    double sup_continuous = 0.0;   // sup of sigma B(t) - b t
    double sup_jumps = 0.0;        // sup of Z(t)
    std::optional<double> penultimate;  // X(Gamma_{tau-1}) with Gamma_0 = 0; empty when tau = 0
};

void sample_path(const LevyModel& model, RandomStream& rng, PathSample& out);
PathSample sample_path(const LevyModel& model, RandomStream& rng);
/// Same construction with jump epochs and sizes given (Brownian part still random).
PathSample sample_path_forced(const LevyModel& model, const std::vector<double>& epochs,
                              const std::vector<double>& sizes, RandomStream& rng);

enum class Event {
    endpoint,            // X(1) > u
    supremum,            // sup X > u
    penultimate_excess,  // X(1) <= u < X(Gamma_{tau-1})
    supB_plus_supZ,      // sup(sigma B - b t) + sup Z > u
    sym_abs,             // X(1) + |W| > u, W ~ N(0,1) independent
    sym_plus,            // X(1) + W > u
    sym_excess,          // X(1) > u + |W|
};
const char* to_string(Event e);
std::optional<Event> event_from_string(const std::string& s);

struct MCEstimate {
    std::string label;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double p_hat = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
};

// Paths are drawn in fixed-size chunks; chunk c uses substream c of the
// master seed, so estimates do not depend on the worker count.
inline constexpr std::uint64_t kChunkSize = 1u << 16;

/// Estimates for several events on one path stream, with pairwise joint
/// counts for paired-ratio intervals.
struct EventEstimates {
    double u = 0.0;
    std::vector<Event> events;
    std::vector<MCEstimate> estimates;
    std::vector<std::uint64_t> joint;  // events.size()^2, row-major; diagonal = hits

    const MCEstimate& get(Event e) const;
    std::uint64_t both(Event a, Event b) const;
};

struct SimOptions {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0: hardware concurrency
};

/// All u-levels are evaluated on the same paths.
std::vector<EventEstimates> estimate_events(const LevyModel& model, const std::vector<double>& u_grid,
                                            const std::vector<Event>& events, const SimOptions& opt);
EventEstimates estimate_events(const LevyModel& model, double u, const std::vector<Event>& events,
                               const SimOptions& opt);

inline constexpr double kCiZ = 1.96;
inline constexpr std::uint64_t kLowConfidenceHits = 100;

struct PairedRatio {
    double ratio = 0.0;
    double std_error = 0.0;
};
/// p_a / p_b with a delta-method standard error from the joint counts.
PairedRatio paired_ratio(const EventEstimates& est, Event num, Event den);

struct RatioRow {
    double u = 0.0;
    double numerator = 0.0;
    double numerator_err = 0.0;
    double denominator = 0.0;
    double denominator_err = 0.0;
    double ratio = 0.0;
    double ratio_lo = 0.0;
    double ratio_hi = 0.0;
    std::string method;
    std::uint64_t numerator_hits = 0;
    bool low_confidence = false;

    double ci() const { return 0.5 * (ratio_hi - ratio_lo); }
};

struct TailRatioCurve {
    std::vector<RatioRow> rows;
    SimOptions sim;
    double exact_tol = 0.0;
    std::vector<SeriesTruncation> certificates;
};

enum class DenominatorMode { mc, exact };

/// Ratio of a numerator event (default: supremum) to P(X(1) > u).
TailRatioCurve ratio_curve(const LevyModel& model, const std::vector<double>& u_grid, const SimOptions& opt,
                           DenominatorMode mode, double tol = 1e-8, Event numerator = Event::supremum);

/// Row from an MC numerator and an exact or bracketed denominator.
RatioRow exact_denominator_row(double u, const MCEstimate& num, const ModelTail& den);
/// Row from two MC estimates on common paths.
RatioRow paired_row(double u, const EventEstimates& est, Event num, Event den);

struct SymResidual {
    double max_residual = 0.0;
    double at_u = 0.0;
    double std_error = 0.0;  // zero in exact mode
};

/// max over the grid of |P(X + |Y| > u) - 2 P(X + Y > u) + P(X > u + |Y|)| with
/// Y = y_sigma * N(0,1). Exact for discrete X; Monte Carlo when trials > 0 is
/// requested or X is continuous.
SymResidual sym_identity_residual(const JumpLaw& x_law, double y_sigma, const std::vector<double>& u_grid,
                                  std::uint64_t mc_trials = 0, std::uint64_t seed = 1);

}  // namespace levytail
