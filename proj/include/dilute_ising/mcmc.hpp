#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "format.hpp"
#include "gibbs.hpp"
#include "graph.hpp"
#include "rng.hpp"

// Glauber (heat-bath) dynamics for the quenched Gibbs measure. One sweep is
// N single-site updates at uniformly random sites; site i flips with
// probability 1/(1 + exp(beta * dH)). The cached local sums
//   s_i = sum_j (eps_{i,j} + eps_{j,i}) sigma_j   (j runs over all sites)
// are maintained incrementally in exact integer arithmetic; the self-loop
// contribution is subtracted inside dH since eps_{i,i} sigma_i^2 is
// constant under a flip of sigma_i:
//   dH = 2 sigma_i [ (s_i - 2 eps_{i,i} sigma_i) / (2 N p) + h ].

namespace dising::mcmc {

class Chain {
public:
    Chain(const graph::GraphSample& g, const gibbs::ModelParams& par, gibbs::SpinConfig init,
          std::uint64_t seed)
        : par_(par), masks_(graph::pair_masks(g)), state_(std::move(init)), stream_(seed) {
        par_.validate();
        if (g.size() != par_.n || state_.size() != par_.n)
            throw std::invalid_argument("Chain: size mismatch");
        local_sums_ = compute_local_sums(state_);
    }

    const gibbs::SpinConfig& state() const { return state_; }
    std::int64_t total_spin() const { return state_.total; }
    const std::vector<std::int64_t>& local_sums() const { return local_sums_; }
    std::int64_t sweep_count() const { return sweeps_done_; }

    // Recompute s_i from scratch (integer-exact); used to audit the cache.
    std::vector<std::int64_t> compute_local_sums(const gibbs::SpinConfig& sigma) const {
        const std::int64_t n = par_.n;
        std::vector<std::int64_t> s(static_cast<std::size_t>(n), 0);
        for (std::int64_t i = 0; i < n; ++i) {
            std::int64_t acc = 0;
            for (std::int64_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const std::size_t w = static_cast<std::size_t>(j);
                const int weight =
                    ((masks_.once_row(i)[w / 64] >> (w % 64)) & 1ULL) ? 1
                    : ((masks_.twice_row(i)[w / 64] >> (w % 64)) & 1ULL) ? 2
                                                                         : 0;
                acc += weight * sigma.spins[w];
            }
            acc += 2 * static_cast<std::int64_t>(masks_.loop[static_cast<std::size_t>(i)]) *
                   sigma.spins[static_cast<std::size_t>(i)];
            s[static_cast<std::size_t>(i)] = acc;
        }
        return s;
    }

    void sweep() {
        const std::int64_t n = par_.n;
        const double inv2np = 1.0 / (2.0 * static_cast<double>(n) * par_.p);
        for (std::int64_t u = 0; u < n; ++u) {
            const std::int64_t t = stream_.next_index(static_cast<std::uint32_t>(n));
            const std::size_t ts = static_cast<std::size_t>(t);
            const double st = static_cast<double>(
                local_sums_[ts] - 2 * static_cast<std::int64_t>(masks_.loop[ts]) *
                                      state_.spins[ts]);
            const double dh =
                2.0 * static_cast<double>(state_.spins[ts]) * (st * inv2np + par_.h);
            const double flip_prob = 1.0 / (1.0 + std::exp(par_.beta * dh));
            const double udraw = stream_.next_unit();
            if (udraw < flip_prob) apply_flip(t);
        }
        ++sweeps_done_;
    }

private:
    void apply_flip(std::int64_t t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        const std::int64_t old_spin = state_.spins[ts];
        state_.flip(t);
        // s_j += (eps_{j,t} + eps_{t,j}) * (new - old) for j != t
        const std::int64_t delta = -2 * old_spin;
        for_each_bit(masks_.once_row(t), [&](std::int64_t j) {
            local_sums_[static_cast<std::size_t>(j)] += delta;
        });
        for_each_bit(masks_.twice_row(t), [&](std::int64_t j) {
            local_sums_[static_cast<std::size_t>(j)] += 2 * delta;
        });
        // own diagonal: s_t includes 2 eps_{t,t} sigma_t
        local_sums_[ts] += 2 * static_cast<std::int64_t>(masks_.loop[ts]) * delta;
    }

    template <class Fn>
    void for_each_bit(const std::uint64_t* row, Fn&& fn) const {
        for (std::size_t w = 0; w < masks_.words; ++w) {
            std::uint64_t bits = row[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                bits &= bits - 1;
                fn(static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(b)));
            }
        }
    }

    gibbs::ModelParams par_;
    graph::PairMasks masks_;
    gibbs::SpinConfig state_;
    std::vector<std::int64_t> local_sums_;
    rng::Stream stream_;
    std::int64_t sweeps_done_ = 0;
};

// Run burnin sweeps, then `sweeps` more, recording totalSpin after every
// thin-th sweep: floor(sweeps/thin) samples.
inline std::vector<std::int64_t> sample_chain(const graph::GraphSample& g,
                                              const gibbs::ModelParams& par,
                                              std::int64_t sweeps, std::int64_t burnin,
                                              std::int64_t thin, std::uint64_t seed,
                                              gibbs::SpinConfig init) {
    if (sweeps < 0 || burnin < 0) throw std::invalid_argument("sample_chain: negative counts");
    if (thin < 1) throw std::invalid_argument("sample_chain: thin must be >= 1");
    Chain chain(g, par, std::move(init), seed);
    for (std::int64_t s = 0; s < burnin; ++s) chain.sweep();
    std::vector<std::int64_t> totals;
    totals.reserve(static_cast<std::size_t>(sweeps / thin));
    for (std::int64_t s = 1; s <= sweeps; ++s) {
        chain.sweep();
        if (s % thin == 0) totals.push_back(chain.total_spin());
    }
    return totals;
}

inline std::vector<std::int64_t> sample_chain(const graph::GraphSample& g,
                                              const gibbs::ModelParams& par,
                                              std::int64_t sweeps, std::int64_t burnin,
                                              std::int64_t thin, std::uint64_t seed) {
    return sample_chain(g, par, sweeps, burnin, thin, seed,
                        gibbs::SpinConfig::all_plus(par.n));
}

// CSV schema: sweep,totalSpin (sweep = global sweep index of the record).
inline std::string chain_csv(const std::vector<std::int64_t>& totals, std::int64_t burnin,
                             std::int64_t thin) {
    std::string out = "sweep,totalSpin\n";
    for (std::size_t i = 0; i < totals.size(); ++i) {
        out += fmt::number(burnin + static_cast<std::int64_t>(i + 1) * thin);
        out.push_back(',');
        out += fmt::number(totals[i]);
        out.push_back('\n');
    }
    return out;
}

}  // namespace dising::mcmc
