#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "logsum.hpp"
#include "meanfield.hpp"
#include "measure.hpp"

// Quenched Gibbs layer. For a fixed adjacency eps the Hamiltonian is
//   H(sigma) = -(1/(2 N p)) sum_{i,j} eps_{i,j} sigma_i sigma_j - h sum_i sigma_i,
// and mu(sigma) ~ exp(-beta H(sigma)). Exact enumeration walks all 2^N
// configurations in Gray-code order, maintaining the integer interaction
// sum S = sum eps_{i,j} sigma_i sigma_j incrementally and binning configs
// into an integer (totalSpin, S) histogram; partition sums are then
// assembled per bin in log space. p=1 collapses to the fully-connected
// model, where weights group by totalSpin alone and N can be large.

namespace dising::gibbs {

inline constexpr std::int64_t kDefaultEnumerationCap = 22;
inline constexpr std::int64_t kEnumerationHardLimit = 32;

struct ModelParams {
    std::int64_t n = 0;
    double p = 1.0;
    double beta = 0.0;
    double h = 0.0;

    // Coupling per directed edge: gamma = beta / (2 N p), derived on use so
    // it can never drift from (n, p, beta).
    double gamma() const { return beta / (2.0 * static_cast<double>(n) * p); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("ModelParams: p must be in (0,1]");
        if (!(beta >= 0.0)) throw std::invalid_argument("ModelParams: beta must be >= 0");
        if (!(h >= 0.0)) throw std::invalid_argument("ModelParams: h must be >= 0");
    }
};

struct SpinConfig {
    std::vector<std::int8_t> spins;  // entries +-1
    std::int64_t total = 0;          // sum of spins (may be negative)

    static SpinConfig all_plus(std::int64_t n) {
        SpinConfig s;
        s.spins.assign(static_cast<std::size_t>(n), 1);
        s.total = n;
        return s;
    }

    static SpinConfig all_minus(std::int64_t n) {
        SpinConfig s;
        s.spins.assign(static_cast<std::size_t>(n), -1);
        s.total = -n;
        return s;
    }

    static SpinConfig from_spins(std::vector<std::int8_t> v) {
        SpinConfig s;
        s.total = 0;
        for (std::int8_t x : v) {
            if (x != 1 && x != -1)
                throw std::invalid_argument("SpinConfig: entries must be +-1");
            s.total += x;
        }
        s.spins = std::move(v);
        return s;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(spins.size()); }

    void flip(std::int64_t i) {
        auto& s = spins[static_cast<std::size_t>(i)];
        total -= 2 * s;
        s = static_cast<std::int8_t>(-s);
    }
};

// Integer interaction sum S(sigma) = sum_{i,j} eps_{i,j} sigma_i sigma_j
// (self-loops contribute eps_{i,i} regardless of sigma_i).
inline std::int64_t interaction_sum(const graph::GraphSample& g, const SpinConfig& sigma) {
    if (g.size() != sigma.size())
        throw std::invalid_argument("interaction_sum: size mismatch");
    const std::int64_t n = g.size();
    const std::size_t words = g.words_per_row();
    std::vector<std::uint64_t> plus(words, 0);
    for (std::int64_t j = 0; j < n; ++j)
        if (sigma.spins[static_cast<std::size_t>(j)] > 0)
            plus[static_cast<std::size_t>(j) / 64] |= 1ULL << (static_cast<std::size_t>(j) % 64);
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t* r = g.row(i);
        std::int64_t row_total = 0, row_plus = 0;
        for (std::size_t w = 0; w < words; ++w) {
            row_total += std::popcount(r[w]);
            row_plus += std::popcount(r[w] & plus[w]);
        }
        const std::int64_t dot = 2 * row_plus - row_total;  // row_i . sigma
        total += sigma.spins[static_cast<std::size_t>(i)] * dot;
    }
    return total;
}

inline double hamiltonian(const graph::GraphSample& g, const SpinConfig& sigma,
                          const ModelParams& par) {
    par.validate();
    if (g.size() != par.n || sigma.size() != par.n)
        throw std::invalid_argument("hamiltonian: size mismatch");
    const double s = static_cast<double>(interaction_sum(g, sigma));
    return -s / (2.0 * static_cast<double>(par.n) * par.p) -
           par.h * static_cast<double>(sigma.total);
}

struct PartitionResult {
    double log_z = 0.0;
    // (totalSpin k, log of the accumulated Gibbs weight of {|sigma| = k}),
    // ascending in k; only realized k appear.
    std::vector<std::pair<std::int64_t, double>> log_weight_by_k;
};

// Exact partition data by full enumeration. N is bounded by `cap`
// (default 22) as a runaway guard; the implementation itself supports
// N <= 32.
inline PartitionResult enumerate_partition(const graph::GraphSample& g, const ModelParams& par,
                                           std::int64_t cap = kDefaultEnumerationCap) {
    par.validate();
    if (g.size() != par.n) throw std::invalid_argument("enumerate_partition: size mismatch");
    if (par.n > cap || par.n > kEnumerationHardLimit)
        throw std::invalid_argument("enumerate_partition: N exceeds enumeration cap");

    const int n = static_cast<int>(par.n);
    const graph::PairMasks masks = graph::pair_masks(g);
    std::vector<std::uint64_t> once(static_cast<std::size_t>(n)),
        twice(static_cast<std::size_t>(n));
    std::vector<std::int64_t> n_once(static_cast<std::size_t>(n)),
        n_twice(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        once[static_cast<std::size_t>(t)] = masks.once_row(t)[0];
        twice[static_cast<std::size_t>(t)] = masks.twice_row(t)[0];
        n_once[static_cast<std::size_t>(t)] = std::popcount(once[static_cast<std::size_t>(t)]);
        n_twice[static_cast<std::size_t>(t)] = std::popcount(twice[static_cast<std::size_t>(t)]);
    }

    const std::int64_t n2 = static_cast<std::int64_t>(n) * n;
    const std::size_t s_span = static_cast<std::size_t>(2 * n2 + 1);
    std::vector<std::uint32_t> hist(static_cast<std::size_t>(n + 1) * s_span, 0);
    const auto bucket = [&](std::int64_t k, std::int64_t S) -> std::uint32_t& {
        return hist[static_cast<std::size_t>((k + n) / 2) * s_span +
                    static_cast<std::size_t>(S + n2)];
    };

    // Start from all -1 (Gray counter 0): S = sum eps, k = -N.
    std::uint64_t plus = 0;
    std::int64_t S = static_cast<std::int64_t>(g.edge_count());
    std::int64_t k = -n;
    ++bucket(k, S);

    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t c = 1; c < total; ++c) {
        const int t = std::countr_zero(c);
        const std::size_t ts = static_cast<std::size_t>(t);
        const std::int64_t dot1 = 2 * std::popcount(once[ts] & plus) - n_once[ts];
        const std::int64_t dot2 = 2 * std::popcount(twice[ts] & plus) - n_twice[ts];
        const std::int64_t r = dot1 + 2 * dot2;  // sum_j (eps_tj + eps_jt) sigma_j
        const std::int64_t s_old = ((plus >> t) & 1ULL) ? 1 : -1;
        S -= 2 * s_old * r;
        k -= 2 * s_old;
        plus ^= 1ULL << t;
        ++bucket(k, S);
    }

    const double gamma = par.gamma();
    PartitionResult result;
    LogSum z;
    for (std::int64_t kk = -par.n; kk <= par.n; kk += 2) {
        LogSum acc;
        const std::size_t base = static_cast<std::size_t>((kk + par.n) / 2) * s_span;
        for (std::size_t si = 0; si < s_span; ++si) {
            const std::uint32_t count = hist[base + si];
            if (count == 0) continue;
            const double log_s_term =
                gamma * static_cast<double>(static_cast<std::int64_t>(si) - n2);
            acc.add(std::log(static_cast<double>(count)) + log_s_term);
        }
        if (acc.empty()) continue;
        const double log_w = acc.value() + par.beta * par.h * static_cast<double>(kk);
        result.log_weight_by_k.emplace_back(kk, log_w);
        z.add(log_w);
    }
    result.log_z = z.value();
    return result;
}

// Fully-connected shortcut (p = 1): S = k^2 exactly, so weights group by
// totalSpin and the sum runs over N+1 terms. Valid for large N.
inline PartitionResult curie_weiss_partition(const ModelParams& par) {
    par.validate();
    if (par.p != 1.0)
        throw std::invalid_argument("curie_weiss_partition: requires p = 1");
    const double gamma = par.gamma();
    PartitionResult result;
    LogSum z;
    for (std::int64_t k = -par.n; k <= par.n; k += 2) {
        const double log_binom = meanfield::binomial_log_weight(par.n, k).exact_log;
        const double log_w = log_binom + gamma * static_cast<double>(k) * static_cast<double>(k) +
                             par.beta * par.h * static_cast<double>(k);
        result.log_weight_by_k.emplace_back(k, log_w);
        z.add(log_w);
    }
    result.log_z = z.value();
    return result;
}

enum class Side { plus, minus, both };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::plus: return "plus";
        case Side::minus: return "minus";
        default: return "both";
    }
}

// Rescaled magnetization law built from partition data: atoms at
// (k - N m)/sqrt(N) weighted by the normalized Gibbs weight of {|sigma|=k}.
// Side plus keeps k > 0 and doubles the weights; side minus keeps k <= 0
// (the k=0 atom belongs here) and doubles; side both keeps everything.
inline WeightedMeasure measure_from_partition(const PartitionResult& part, std::int64_t n,
                                              double m, Side side) {
    const double scale = std::sqrt(static_cast<double>(n));
    std::vector<Atom> atoms;
    atoms.reserve(part.log_weight_by_k.size());
    const double factor = (side == Side::both) ? 1.0 : 2.0;
    for (const auto& [k, log_w] : part.log_weight_by_k) {
        if (side == Side::plus && k <= 0) continue;
        if (side == Side::minus && k > 0) continue;
        const double w = factor * std::exp(log_w - part.log_z);
        if (w == 0.0) continue;
        const double x = (static_cast<double>(k) - static_cast<double>(n) * m) / scale;
        atoms.push_back({x, w, k});
    }
    return WeightedMeasure::make(std::move(atoms));
}

inline WeightedMeasure magnetization_measure(const graph::GraphSample& g, const ModelParams& par,
                                             double m, Side side,
                                             std::int64_t cap = kDefaultEnumerationCap) {
    const PartitionResult part = (par.p == 1.0 && par.n > cap)
                                     ? curie_weiss_partition(par)
                                     : enumerate_partition(g, par, cap);
    return measure_from_partition(part, par.n, m, side);
}

}  // namespace dising::gibbs
