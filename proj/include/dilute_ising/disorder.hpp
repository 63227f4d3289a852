#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "expansion.hpp"
#include "format.hpp"
#include "gibbs.hpp"
#include "logsum.hpp"
#include "meanfield.hpp"

// Averages over the edge disorder of the tilted weights
//   T(sigma) = exp(gamma sum_{i,j} eps_{i,j} (sigma_i sigma_j - m^2) + beta h |sigma|).
// Because the N^2 edges are independent Bernoulli(p) variables, these
// averages are exact finite-N expressions in the big_F coefficients:
//   log E T(sigma)        = N^2 a0 + a1 k^2 + beta h k,
//   log E T(sigma)T(tau)  = N^2 b0 + b1 (k^2 + l^2) + b12 n^2 + h beta (k + l),
// with k = |sigma|, l = |tau|, n = sum_i sigma_i tau_i. The pair counts
// nu_N(k,l,n) turn those into moments of the tilted partition function.

namespace dising::disorder {

struct TiltParams {
    gibbs::ModelParams params;
    double m = 0.0;  // centering magnetization (the experiments feed a
                     // mean-field fixed point here; the identities hold
                     // for any real m)

    double gamma() const { return params.gamma(); }

    void validate() const {
        params.validate();
        if (!(m >= -1.0 && m <= 1.0))
            throw std::domain_error("TiltParams: m outside [-1,1]");
    }
};

inline void check_spin_total(std::int64_t n, std::int64_t k, const char* who) {
    if (k < -n || k > n || (n + k) % 2 != 0)
        throw std::invalid_argument(std::string(who) + ": invalid spin total");
}

// log E T(sigma) for any configuration with |sigma| = k.
inline double expected_tilt(const TiltParams& tp, std::int64_t k) {
    tp.validate();
    check_spin_total(tp.params.n, k, "expected_tilt");
    const auto c = expansion::pair_coefficients(tp.params.p, tp.gamma(), tp.m);
    const double dn = static_cast<double>(tp.params.n);
    const double dk = static_cast<double>(k);
    return dn * dn * c.a0 + c.a1 * dk * dk + tp.params.beta * tp.params.h * dk;
}

// log E T(sigma)T(tau) for |sigma| = k, |tau| = l, overlap n = sum sigma_i tau_i.
inline double expected_tilt_pair(const TiltParams& tp, std::int64_t k, std::int64_t l,
                                 std::int64_t n) {
    tp.validate();
    const std::int64_t N = tp.params.n;
    check_spin_total(N, k, "expected_tilt_pair");
    check_spin_total(N, l, "expected_tilt_pair");
    if (n < -N || n > N || (N + n) % 2 != 0)
        throw std::invalid_argument("expected_tilt_pair: invalid overlap");
    if (l + n < -(N + k) || l + n > N + k || l - n < -(N - k) || l - n > N - k)
        throw std::invalid_argument("expected_tilt_pair: (k,l,n) violates overlap constraints");
    const auto q = expansion::quad_coefficients(tp.params.p, tp.gamma(), tp.m);
    const double dn = static_cast<double>(N);
    const double dk = static_cast<double>(k), dl = static_cast<double>(l),
                 dov = static_cast<double>(n);
    return dn * dn * q.b0 + q.b1 * (dk * dk + dl * dl) + q.b12 * dov * dov +
           tp.params.h * tp.params.beta * (dk + dl);
}

// log of nu_N(k,l,n) = #{(sigma,tau) : |sigma|=k, |tau|=l, ov(sigma,tau)=n}.
// Impossible triples give -inf (a count of zero), never an exception.
inline double overlap_log_count(std::int64_t N, std::int64_t k, std::int64_t l, std::int64_t n) {
    if (N < 1) throw std::invalid_argument("overlap_log_count: N must be >= 1");
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (k < -N || k > N || l < -N || l > N || n < -N || n > N) return neg_inf;
    if ((N + k) % 2 != 0 || (N + l) % 2 != 0) return neg_inf;
    const std::int64_t four_a = N + k + l + n;  // 4 * #{i: sigma_i = tau_i = +1}
    if (four_a % 4 != 0) return neg_inf;
    const std::int64_t a = four_a / 4;          // plus-plus sites
    const std::int64_t c = (N + l - k - n) / 4; // minus-plus sites
    const std::int64_t up = (N + k) / 2, down = (N - k) / 2;
    if (a < 0 || a > up || c < 0 || c > down) return neg_inf;
    const auto log_choose = [](std::int64_t top, std::int64_t r) {
        return meanfield::log_factorial(top) - meanfield::log_factorial(r) -
               meanfield::log_factorial(top - r);
    };
    return log_choose(N, up) + log_choose(up, a) + log_choose(down, c);
}

// log E Ztilde_N = log sum_k C(N,(N+k)/2) E T(sigma_k): the exact annealed
// normalization used to center the partition-fluctuation statistic.
inline double expected_tilted_partition(const TiltParams& tp) {
    tp.validate();
    const std::int64_t N = tp.params.n;
    LogSum acc;
    for (std::int64_t k = -N; k <= N; k += 2) {
        const double log_binom = meanfield::binomial_log_weight(N, k).exact_log;
        acc.add(log_binom + expected_tilt(tp, k));
    }
    return acc.value();
}

// CSV table of all realizable (k,l,n) triples, schema: k,l,n,log_count
inline std::string nu_table_csv(std::int64_t N) {
    if (N < 1) throw std::invalid_argument("nu_table_csv: N must be >= 1");
    std::string out = "k,l,n,log_count\n";
    for (std::int64_t k = -N; k <= N; k += 2) {
        for (std::int64_t l = -N; l <= N; l += 2) {
            for (std::int64_t n = -N; n <= N; ++n) {
                const double v = overlap_log_count(N, k, l, n);
                if (std::isinf(v)) continue;
                out += fmt::number(k);
                out.push_back(',');
                out += fmt::number(l);
                out.push_back(',');
                out += fmt::number(n);
                out.push_back(',');
                out += fmt::number(v);
                out.push_back('\n');
            }
        }
    }
    return out;
}

}  // namespace dising::disorder
