#include "levytail/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "levytail/log_space.hpp"
#include "levytail/normal.hpp"

namespace levytail {

namespace {

bool is_dense(std::span<const Atom> a) {
    auto span = to_long_double(a.back().index - a.front().index) + 1.0L;
    return span <= 4.0L * static_cast<long double>(a.size()) + 64.0L;
}

std::vector<Atom> convolve_dense(std::span<const Atom> a, std::span<const Atom> b, std::size_t cap) {
    const Index a0 = a.front().index, b0 = b.front().index;
    const auto na = static_cast<std::size_t>(a.back().index - a0) + 1;
    const auto nb = static_cast<std::size_t>(b.back().index - b0) + 1;
    if (na + nb - 1 > cap) throw SupportCapExceeded("convolution support exceeds cap of " + std::to_string(cap));

    double amax = kLogZero, bmax = kLogZero;
    for (const auto& x : a) amax = std::max(amax, x.log_mass);
    for (const auto& x : b) bmax = std::max(bmax, x.log_mass);
    // Linear space relative to the largest mass. Products smaller than ~1e-308
    // of the peak underflow; that is far below any pruning level in use.
    std::vector<double> va(na, 0.0), vb(nb, 0.0), out(na + nb - 1, 0.0);
    for (const auto& x : a) va[static_cast<std::size_t>(x.index - a0)] = std::exp(x.log_mass - amax);
    for (const auto& x : b) vb[static_cast<std::size_t>(x.index - b0)] = std::exp(x.log_mass - bmax);

    for (std::size_t i = 0; i < na; ++i) {
        const double ai = va[i];
        if (ai == 0.0) continue;
        double* o = out.data() + i;
        for (std::size_t j = 0; j < nb; ++j) o[j] += ai * vb[j];
    }

    std::vector<Atom> res;
    res.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > 0.0) res.push_back({a0 + b0 + static_cast<Index>(i), std::log(out[i]) + amax + bmax});
    }
    return res;
}

std::vector<Atom> convolve_sparse(std::span<const Atom> a, std::span<const Atom> b, std::size_t cap) {
    std::vector<Atom> pairs;
    pairs.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b) pairs.push_back({x.index + y.index, x.log_mass + y.log_mass});
    std::sort(pairs.begin(), pairs.end(), [](const Atom& l, const Atom& r) { return l.index < r.index; });

    std::vector<Atom> res;
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        LogSumAccumulator acc;
        while (j < pairs.size() && pairs[j].index == pairs[i].index) acc.add(pairs[j++].log_mass);
        res.push_back({pairs[i].index, acc.value()});
        i = j;
    }
    if (res.size() > cap) throw SupportCapExceeded("convolution support exceeds cap of " + std::to_string(cap));
    return res;
}

std::vector<double> suffix_logs(const std::vector<Atom>& atoms) {
    std::vector<double> s(atoms.size());
    double run = kLogZero;
    for (std::size_t i = atoms.size(); i-- > 0;) {
        run = log_add(run, atoms[i].log_mass);
        s[i] = run;
    }
    return s;
}

std::size_t first_above(const std::vector<Atom>& atoms, Index idx) {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), idx,
                               [](const Atom& a, Index i) { return a.index < i; });
    return static_cast<std::size_t>(it - atoms.begin());
}

}  // namespace

std::vector<Atom> convolve_atoms(std::span<const Atom> a, std::span<const Atom> b, std::size_t cap) {
    if (a.empty() || b.empty()) return {};
    if (is_dense(a) && is_dense(b)) return convolve_dense(a, b, cap);
    return convolve_sparse(a, b, cap);
}

double prune_atoms(std::vector<Atom>& atoms, double eps) {
    if (atoms.size() < 2 || eps <= 0.0) return 0.0;
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return atoms[l].log_mass < atoms[r].log_mass; });
    std::vector<char> drop(atoms.size(), 0);
    double dropped = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        double m = std::exp(atoms[order[i]].log_mass);
        if (dropped + m > eps) break;
        dropped += m;
        drop[order[i]] = 1;
    }
    std::size_t w = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (!drop[i]) atoms[w++] = atoms[i];
    atoms.resize(w);
    return dropped;
}

ConvolutionTable::ConvolutionTable(JumpLaw base, int max_fold, double prune_eps, std::size_t support_cap)
    : base_(std::move(base)), prune_eps_(prune_eps), cap_(support_cap) {
    if (!base_.is_discrete()) throw std::invalid_argument("convolution table needs a discrete law, got " + base_.name());
    if (max_fold < 1) throw std::invalid_argument("convolution table depth must be >= 1");
    if (!(prune_eps >= 0.0 && prune_eps <= 1e-20)) throw std::invalid_argument("prune_eps must lie in [0, 1e-20]");

    Fold s0;
    s0.atoms = {{0, 0.0}};
    s0.suffix_log = suffix_logs(s0.atoms);
    folds_.push_back(std::move(s0));

    Fold s1;
    s1.atoms.assign(base_.atoms().begin(), base_.atoms().end());
    if (s1.atoms.size() > cap_) throw SupportCapExceeded("base law support exceeds cap");
    s1.suffix_log = suffix_logs(s1.atoms);
    s1.log_deficit = base_.log_truncated_mass();
    folds_.push_back(std::move(s1));
    extend(max_fold);
}

const Fold& ConvolutionTable::fold(int k) const {
    if (k < 0 || k > depth())
        throw std::out_of_range("fold " + std::to_string(k) + " outside table depth " + std::to_string(depth()));
    return folds_[static_cast<std::size_t>(k)];
}

void ConvolutionTable::extend(int max_fold) {
    const double t = std::exp(base_.log_truncated_mass());
    while (depth() < max_fold) {
        const Fold& prev = folds_.back();
        Fold next;
        next.atoms = convolve_atoms(prev.atoms, base_.atoms(), cap_);
        double pruned = prune_atoms(next.atoms, prune_eps_);
        // missing mass: 1 - (1 - d_prev)(1 - t) + pruned
        double d_prev = std::exp(prev.log_deficit);
        double deficit = d_prev + t - d_prev * t + pruned;
        next.log_deficit = deficit > 0.0 ? std::log(deficit) : kLogZero;
        next.suffix_log = suffix_logs(next.atoms);
        folds_.push_back(std::move(next));
    }
}

double sk_tail(const ConvolutionTable& table, int k, double u) {
    const Fold& f = table.fold(k);
    std::size_t i = first_above(f.atoms, table.step().first_index_above(u));
    return i < f.atoms.size() ? f.suffix_log[i] : kLogZero;
}

namespace {

// Atoms more than kFarSd standard deviations on the wrong side of u carry a
// normal factor below exp(-800); together they weigh at most that much.
constexpr double kFarSd = 40.0;
constexpr double kFarLog = -804.6;  // log P(N(0,1) > 40), rounded up

double smoothed_sum(const ConvolutionTable& table, const Fold& f, std::size_t begin, std::size_t end,
                    double sigma, double u, double sign) {
    LogSumAccumulator acc;
    for (std::size_t i = begin; i < end; ++i)
        acc.add(f.atoms[i].log_mass + normal_tail(sign * (u - table.value(f.atoms[i])) / sigma));
    return acc.value();
}

}  // namespace

double gaussian_smoothed_tail(const ConvolutionTable& table, int k, double sigma, double u) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_smoothed_tail needs sigma > 0");
    const Fold& f = table.fold(k);
    const std::size_t near = first_above(f.atoms, table.step().first_index_above(u - kFarSd * sigma));
    double v = smoothed_sum(table, f, near, f.atoms.size(), sigma, u, 1.0);
    // the skipped atoms matter only when the kept ones are themselves this small
    if (near > 0 && v < kFarLog + 40.0) v = smoothed_sum(table, f, 0, f.atoms.size(), sigma, u, 1.0);
    return v;
}

double gaussian_smoothed_lower(const ConvolutionTable& table, int k, double sigma, double u) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_smoothed_lower needs sigma > 0");
    const Fold& f = table.fold(k);
    const std::size_t far = first_above(f.atoms, table.step().first_index_above(u + kFarSd * sigma));
    double v = smoothed_sum(table, f, 0, far, sigma, u, -1.0);
    if (far < f.atoms.size() && v < kFarLog + 40.0) v = smoothed_sum(table, f, 0, f.atoms.size(), sigma, u, -1.0);
    return v;
}

int m_index(const ConvolutionTable& table, double b) {
    for (int k = 1; k <= table.depth(); ++k)
        if (sk_tail(table, k, b) > kLogZero) return k;
    throw std::runtime_error("m_index: P(S_k > b) = 0 for every k <= " + std::to_string(table.depth()));
}

BarrierSeries barrier_tail_series(const JumpLaw& law, int n_max, double u, double prune_eps,
                                  std::size_t support_cap) {
    if (!law.is_discrete()) throw std::invalid_argument("barrier_tail needs a discrete law");
    if (n_max < 1) throw std::invalid_argument("barrier_tail needs n >= 1");
    const Index barrier = law.step().first_index_above(u);  // first index strictly above u

    BarrierSeries out;
    std::vector<Atom> nu = {{0, 0.0}};
    for (int n = 1; n <= n_max; ++n) {
        if (nu.empty()) {
            out.log_crossing.push_back(kLogZero);
            continue;
        }
        std::vector<Atom> conv = convolve_atoms(nu, law.atoms(), support_cap);
        out.pruned += prune_atoms(conv, prune_eps);
        std::size_t cut = first_above(conv, barrier);
        LogSumAccumulator above;
        for (std::size_t i = cut; i < conv.size(); ++i) above.add(conv[i].log_mass);
        out.log_crossing.push_back(above.value());
        conv.resize(cut);
        nu = std::move(conv);
    }
    return out;
}

double barrier_tail(const JumpLaw& law, int n, double u) {
    return barrier_tail_series(law, n, u).log_crossing.back();
}

}  // namespace levytail
