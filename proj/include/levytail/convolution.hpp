#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "levytail/jump_law.hpp"

namespace levytail {

inline constexpr double kDefaultPruneEps = 1e-20;
inline constexpr std::size_t kDefaultSupportCap = 10'000'000;

struct SupportCapExceeded : std::length_error {
    using std::length_error::length_error;
};

// Support of one convolution power, sorted by index.
struct Fold {
    std::vector<Atom> atoms;
    std::vector<double> suffix_log;  // log mass of atoms[i..]
    double log_deficit = -std::numeric_limits<double>::infinity();  // 1 - total mass, as a log
};

/// Convolution powers S_0 .. S_K of a discrete jump law, with masses below a
/// cumulative prune_eps dropped at every fold. The dropped weight (plus the
/// base law's own truncation) is tracked per fold as an absolute error bound
/// on every tail probability read from it.
class ConvolutionTable {
public:
    ConvolutionTable(JumpLaw base, int max_fold, double prune_eps = kDefaultPruneEps,
                     std::size_t support_cap = kDefaultSupportCap);

    int depth() const { return static_cast<int>(folds_.size()) - 1; }
    const JumpLaw& base() const { return base_; }
    const Rational& step() const { return base_.step(); }
    double prune_eps() const { return prune_eps_; }

    const Fold& fold(int k) const;
    double value(const Atom& atom) const { return base_.step().value_of(atom.index); }
    /// Absolute error bound of fold k, as a log.
    double log_deficit(int k) const { return fold(k).log_deficit; }

    /// Extends the table to max_fold (no-op if already that deep).
    void extend(int max_fold);

private:
    JumpLaw base_;
    double prune_eps_;
    std::size_t cap_;
    std::vector<Fold> folds_;
};

/// Convolution a * b followed by pruning; used by the table and the barrier recursion.
std::vector<Atom> convolve_atoms(std::span<const Atom> a, std::span<const Atom> b, std::size_t cap);
/// Drops the smallest masses while their cumulative weight stays <= eps.
/// Returns the dropped weight (linear).
double prune_atoms(std::vector<Atom>& atoms, double eps);

/// log P(S_k > u)
double sk_tail(const ConvolutionTable& table, int k, double u);
/// log P(sigma N(0,1) + S_k > u), summed exactly over the support of S_k.
double gaussian_smoothed_tail(const ConvolutionTable& table, int k, double sigma, double u);
/// log P(S_k + sigma N(0,1) <= u)
double gaussian_smoothed_lower(const ConvolutionTable& table, int k, double sigma, double u);

/// min{k >= 1 : P(S_k > b) > 0}
int m_index(const ConvolutionTable& table, double b);

struct BarrierSeries {
    std::vector<double> log_crossing;  // index n-1 holds n
    double pruned = 0.0;               // total weight dropped by pruning (linear)
};

/// log P(max_{1<=k<=n-1} S_k <= u, S_n > u) for n = 1..n_max, by convolution
/// restricted to (-inf, u] between steps.
BarrierSeries barrier_tail_series(const JumpLaw& law, int n_max, double u,
                                        double prune_eps = kDefaultPruneEps,
                                        std::size_t support_cap = kDefaultSupportCap);
double barrier_tail(const JumpLaw& law, int n, double u);

}  // namespace levytail
