#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <vector>

// Mean-field layer: the fixed-point magnetization m = tanh(beta*(m+h)),
// the CLT variance (1-m^2)/(1-beta*(1-m^2)), the binary-entropy rate
// function, and exact log-binomial weights split into rate + correction
// parts. Everything here is scalar analysis; no randomness.

namespace dising::meanfield {

// log(n!) from a shared table extended on demand. Accumulation is done in
// long double so the absolute error stays negligible for n up to 1e6.
// Exact integer binomials are never formed; callers work in log space.
inline double log_factorial(std::int64_t n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    static std::shared_mutex mu;
    static std::vector<double> table{0.0, 0.0};
    static long double acc = 0.0L;
    {
        std::shared_lock lock(mu);
        if (static_cast<std::size_t>(n) < table.size())
            return table[static_cast<std::size_t>(n)];
    }
    std::unique_lock lock(mu);
    while (table.size() <= static_cast<std::size_t>(n)) {
        acc += std::log(static_cast<long double>(table.size()));
        table.push_back(static_cast<double>(acc));
    }
    return table[static_cast<std::size_t>(n)];
}

// I(x) = (1-x)/2 log(1-x) + (1+x)/2 log(1+x), with 0*log(0) := 0.
// order 0 -> I, 1 -> I' = artanh, 2 -> I'' = 1/(1-x^2).
inline double rate_function(double x, int order = 0) {
    if (order < 0 || order > 2)
        throw std::invalid_argument("rate_function: order must be 0, 1 or 2");
    if (!(x >= -1.0 && x <= 1.0))
        throw std::domain_error("rate_function: x outside [-1,1]");
    const bool boundary = (x == 1.0 || x == -1.0);
    switch (order) {
        case 0:
            if (boundary) return std::log(2.0);
            return 0.5 * (1.0 - x) * std::log1p(-x) +
                   0.5 * (1.0 + x) * std::log1p(x);
        case 1:
            if (boundary) throw std::domain_error("rate_function: I' diverges at x = +-1");
            return std::atanh(x);
        default:
            if (boundary) throw std::domain_error("rate_function: I'' diverges at x = +-1");
            return 1.0 / ((1.0 - x) * (1.0 + x));
    }
}

// sigma^2(beta,h) = (1-m^2)/(1-beta*(1-m^2)). Degenerate when the
// denominator is not positive (the critical point beta=1, h=0).
inline double clt_variance(double beta, [[maybe_unused]] double h, double m) {
    if (!(m > -1.0 && m < 1.0))
        throw std::domain_error("clt_variance: m outside (-1,1)");
    const double s = 1.0 - m * m;
    const double denom = 1.0 - beta * s;
    if (denom <= 0.0)
        throw std::domain_error("clt_variance: degenerate (1 - beta*(1-m^2) <= 0)");
    return s / denom;
}

struct Solution {
    double beta = 0.0;
    double h = 0.0;
    double m = 0.0;          // largest fixed point of z = tanh(beta*(z+h))
    double residual = 0.0;   // |m - tanh(beta*(m+h))|
    std::optional<double> sigma2;  // unset at the degenerate point
};

// Largest solution of z = tanh(beta*(z+h)). Bracket by scanning z from 1
// downward in 1e-3 steps, bisect to 1e-15 width, then polish with a few
// Newton steps. For h=0, beta<=1 the answer is exactly 0.
inline Solution solve_magnetization(double beta, double h) {
    if (!(beta > 0.0)) throw std::invalid_argument("solve_magnetization: beta must be > 0");
    if (!(h >= 0.0)) throw std::invalid_argument("solve_magnetization: h must be >= 0");

    Solution sol;
    sol.beta = beta;
    sol.h = h;

    const auto g = [&](double z) { return z - std::tanh(beta * (z + h)); };

    double m = 0.0;
    if (!(h == 0.0 && beta <= 1.0)) {
        double hi = 1.0, lo = 1.0;
        bool bracketed = false;
        for (int i = 1; i <= 1000; ++i) {
            lo = 1.0 - 1e-3 * i;
            if (g(lo) <= 0.0) { bracketed = true; break; }
            hi = lo;
        }
        if (bracketed) {
            while (hi - lo > 1e-15) {
                const double mid = 0.5 * (lo + hi);
                if (g(mid) <= 0.0) lo = mid; else hi = mid;
            }
            m = 0.5 * (lo + hi);
            for (int it = 0; it < 5; ++it) {
                const double t = std::tanh(beta * (m + h));
                const double deriv = 1.0 - beta * (1.0 - t * t);
                if (deriv <= 0.0) break;
                const double step = (m - t) / deriv;
                const double next = m - step;
                if (!(next > 0.0 && next < 1.0)) break;
                m = next;
                if (std::abs(step) < 1e-16) break;
            }
        }
        // No sign change found: the largest root is 0 (only reachable in a
        // vanishing neighbourhood of the critical point).
    }

    sol.m = m;
    sol.residual = std::abs(g(m));
    const double denom = 1.0 - beta * (1.0 - m * m);
    if (denom > 0.0) sol.sigma2 = (1.0 - m * m) / denom;
    return sol;
}

struct TypicalWindow {
    double kappa = 0.0;
    std::int64_t low_k = 0;
    std::int64_t high_k = 0;
};

// kappa_N = p*sqrt(N) / (p^3*N)^(2/5); the window is the integer range
// [ceil(N*m - sqrt(N)*kappa), floor(N*m + sqrt(N)*kappa)].
inline TypicalWindow typical_window(std::int64_t N, double p, double m) {
    if (N < 1) throw std::invalid_argument("typical_window: N must be >= 1");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("typical_window: p must be in (0,1]");
    if (!(m >= -1.0 && m <= 1.0)) throw std::domain_error("typical_window: m outside [-1,1]");
    const double dN = static_cast<double>(N);
    TypicalWindow w;
    w.kappa = p * std::sqrt(dN) / std::pow(p * p * p * dN, 0.4);
    const double half = std::sqrt(dN) * w.kappa;
    w.low_k = static_cast<std::int64_t>(std::ceil(dN * m - half));
    w.high_k = static_cast<std::int64_t>(std::floor(dN * m + half));
    return w;
}

struct BinomialLogWeight {
    double exact_log = 0.0;   // log C(N, (N+k)/2)
    double rate_part = 0.0;   // N log 2 - N I(k/N); exact_log <= rate_part
    double lambda_part = 0.0; // 0.5 log(((N+1)^2 - k^2)/N^2)
};

inline BinomialLogWeight binomial_log_weight(std::int64_t N, std::int64_t k) {
    if (N < 1) throw std::invalid_argument("binomial_log_weight: N must be >= 1");
    if (k < -N || k > N)
        throw std::invalid_argument("binomial_log_weight: |k| exceeds N");
    if ((N + k) % 2 != 0)
        throw std::invalid_argument("binomial_log_weight: N+k must be even");
    const std::int64_t up = (N + k) / 2, down = (N - k) / 2;
    const double dN = static_cast<double>(N), dk = static_cast<double>(k);
    BinomialLogWeight w;
    w.exact_log = log_factorial(N) - log_factorial(up) - log_factorial(down);
    w.rate_part = dN * std::log(2.0) - dN * rate_function(dk / dN, 0);
    w.lambda_part = 0.5 * std::log(((dN + 1.0) * (dN + 1.0) - dk * dk) / (dN * dN));
    return w;
}

}  // namespace dising::meanfield
