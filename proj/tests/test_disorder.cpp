#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "dilute_ising/disorder.hpp"
#include "dilute_ising/gibbs.hpp"
#include "dilute_ising/graph.hpp"
#include "dilute_ising/logsum.hpp"
#include "dilute_ising/meanfield.hpp"

using namespace dising;
using namespace dising::disorder;
using gibbs::ModelParams;
using graph::GraphSample;

namespace {

// Edge-by-edge oracle: the N^2 edges are independent, so the disorder
// average factorizes into one plain log(1-p+p e^z) per ordered pair.
// Deliberately avoids big_F's rearranged branches.
double oracle_tilt(const TiltParams& tp, const std::vector<int>& s) {
    const auto& par = tp.params;
    const double g = tp.gamma(), m2 = tp.m * tp.m;
    double acc = 0.0;
    std::int64_t k = 0;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        k += s[i];
        for (std::size_t j = 0; j < n; ++j)
            acc += std::log(1.0 - par.p +
                            par.p * std::exp(g * (s[i] * s[j] - m2)));
    }
    return acc + par.beta * par.h * static_cast<double>(k);
}

double oracle_tilt_pair(const TiltParams& tp, const std::vector<int>& s,
                        const std::vector<int>& t) {
    const auto& par = tp.params;
    const double g = tp.gamma(), m2 = tp.m * tp.m;
    double acc = 0.0;
    std::int64_t k = 0, l = 0;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        k += s[i];
        l += t[i];
        for (std::size_t j = 0; j < n; ++j)
            acc += std::log(
                1.0 - par.p +
                par.p * std::exp(g * (s[i] * s[j] + t[i] * t[j] - 2.0 * m2)));
    }
    return acc + par.beta * par.h * static_cast<double>(k + l);
}

std::vector<int> config_with_total(std::int64_t n, std::int64_t k) {
    std::vector<int> s(static_cast<std::size_t>(n), -1);
    for (std::int64_t i = 0; i < (n + k) / 2; ++i) s[static_cast<std::size_t>(i)] = 1;
    return s;
}

std::uint64_t choose(std::int64_t n, std::int64_t r) {
    if (r < 0 || r > n) return 0;
    std::uint64_t acc = 1;
    for (std::int64_t i = 1; i <= r; ++i)
        acc = acc * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
    return acc;
}

TiltParams make_tilt(std::int64_t n, double p, double beta, double h, double m) {
    return TiltParams{ModelParams{n, p, beta, h}, m};
}

}  // namespace

TEST(TiltParams, Validation) {
    EXPECT_NO_THROW(make_tilt(4, 0.5, 1.0, 0.0, -0.5).validate());
    EXPECT_THROW(make_tilt(4, 0.5, 1.0, 0.0, 1.5).validate(), std::domain_error);
    EXPECT_THROW(make_tilt(0, 0.5, 1.0, 0.0, 0.0).validate(), std::invalid_argument);
}

TEST(ExpectedTilt, MatchesEdgeByEdgeOracle) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> up(0.1, 1.0), ub(0.1, 2.5),
        uh(0.0, 0.8), um(-0.9, 0.9);
    int checked = 0;
    for (std::int64_t n : {2, 4, 6, 8}) {
        for (int rep = 0; rep < 13; ++rep) {
            const double p = (rep == 0) ? 1.0 : up(rng);
            const double h = (rep % 3 == 0) ? 0.0 : uh(rng);
            const TiltParams tp = make_tilt(n, p, ub(rng), h, um(rng));
            for (std::int64_t k = -n; k <= n; k += 2) {
                const auto s = config_with_total(n, k);
                const double want = oracle_tilt(tp, s);
                const double got = expected_tilt(tp, k);
                EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, std::abs(want)))
                    << "n=" << n << " k=" << k << " p=" << p;
                ++checked;
            }
        }
    }
    EXPECT_GE(checked, 50);
}

TEST(ExpectedTilt, DependsOnlyOnSpinTotal) {
    // Two different arrangements with the same total must give the same
    // disorder average (the oracle recomputes each arrangement).
    const TiltParams tp = make_tilt(6, 0.45, 1.3, 0.2, 0.6);
    const std::vector<int> a = {1, 1, 1, 1, -1, -1};
    const std::vector<int> b = {-1, 1, 1, -1, 1, 1};
    EXPECT_NEAR(oracle_tilt(tp, a), oracle_tilt(tp, b), 1e-12);
    EXPECT_NEAR(expected_tilt(tp, 2), oracle_tilt(tp, b), 1e-12);
}

TEST(ExpectedTilt, FullGraphClosedForm) {
    const TiltParams tp = make_tilt(10, 1.0, 1.5, 0.25, 0.7);
    const double g = tp.gamma();
    for (std::int64_t k = -10; k <= 10; k += 2) {
        const double dk = static_cast<double>(k);
        const double want = 100.0 * (-g * 0.49) + g * dk * dk + 1.5 * 0.25 * dk;
        EXPECT_NEAR(expected_tilt(tp, k), want, 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST(ExpectedTilt, ZeroCouplingIsZero) {
    const TiltParams tp = make_tilt(8, 0.5, 0.0, 0.4, 0.5);  // beta = 0 -> gamma = 0
    for (std::int64_t k = -8; k <= 8; k += 2)
        EXPECT_EQ(expected_tilt(tp, k), 0.0) << k;
}

TEST(ExpectedTilt, InvalidSpinTotals) {
    const TiltParams tp = make_tilt(4, 0.5, 1.0, 0.0, 0.0);
    EXPECT_THROW(expected_tilt(tp, 3), std::invalid_argument);   // parity
    EXPECT_THROW(expected_tilt(tp, 6), std::invalid_argument);   // range
    EXPECT_THROW(expected_tilt(tp, -5), std::invalid_argument);
}

TEST(ExpectedTiltPair, TwoSiteBruteForceOverAllGraphs) {
    // N = 2: average T(sigma)T(tau) explicitly over all 16 adjacency
    // matrices with p = 1/2.
    const TiltParams tp = make_tilt(2, 0.5, 0.2, 0.0, 0.5);  // gamma = 0.1
    ASSERT_DOUBLE_EQ(tp.gamma(), 0.1);
    const double m2 = 0.25;
    const auto brute = [&](const std::vector<int>& s, const std::vector<int>& t) {
        long double total = 0.0L;
        for (int mask = 0; mask < 16; ++mask) {
            double expo = 0.0;
            int bit = 0;
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j, ++bit) {
                    if (!((mask >> bit) & 1)) continue;
                    expo += 0.1 * (s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)] - m2);
                    expo += 0.1 * (t[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(j)] - m2);
                }
            }
            total += std::exp(static_cast<long double>(expo));
        }
        return static_cast<double>(std::log(total / 16.0L));
    };
    const std::vector<int> pp = {1, 1}, pm = {1, -1};
    EXPECT_NEAR(expected_tilt_pair(tp, 2, 2, 2), brute(pp, pp), 1e-12);
    EXPECT_NEAR(expected_tilt_pair(tp, 2, 0, 0), brute(pp, pm), 1e-12);
    EXPECT_NEAR(expected_tilt_pair(tp, 0, 0, -2), brute(pm, {-1, 1}), 1e-12);
}

TEST(ExpectedTiltPair, MatchesEdgeByEdgeOracle) {
    std::mt19937_64 rng(12321);
    std::uniform_real_distribution<double> up(0.1, 1.0), ub(0.1, 2.0),
        uh(0.0, 0.6), um(-0.9, 0.9);
    for (std::int64_t n : {2, 4, 6, 8}) {
        for (int rep = 0; rep < 13; ++rep) {
            const TiltParams tp = make_tilt(n, (rep == 0) ? 1.0 : up(rng), ub(rng),
                                            (rep % 3 == 0) ? 0.0 : uh(rng), um(rng));
            std::vector<int> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
            for (auto& x : s) x = (rng() & 1) ? 1 : -1;
            for (auto& x : t) x = (rng() & 1) ? 1 : -1;
            std::int64_t k = 0, l = 0, ov = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                k += s[i];
                l += t[i];
                ov += s[i] * t[i];
            }
            const double want = oracle_tilt_pair(tp, s, t);
            const double got = expected_tilt_pair(tp, k, l, ov);
            EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, std::abs(want)))
                << "n=" << n << " k=" << k << " l=" << l << " ov=" << ov;
        }
    }
}

TEST(ExpectedTiltPair, ConstraintViolationsThrow) {
    const TiltParams tp = make_tilt(4, 0.5, 1.0, 0.0, 0.0);
    EXPECT_THROW(expected_tilt_pair(tp, 3, 0, 0), std::invalid_argument);  // k parity
    EXPECT_THROW(expected_tilt_pair(tp, 2, 0, 1), std::invalid_argument);  // n parity
    EXPECT_THROW(expected_tilt_pair(tp, 2, 0, 6), std::invalid_argument);  // n range
    // |sigma| = 4 forces overlap = l; (4,0,2) is geometrically impossible.
    EXPECT_THROW(expected_tilt_pair(tp, 4, 0, 2), std::invalid_argument);
    EXPECT_NO_THROW(expected_tilt_pair(tp, 4, 0, 0));
}

TEST(OverlapLogCount, BruteForceSixSites) {
    // Count all 4^6 configuration pairs and compare every realizable
    // triple exactly.
    const std::int64_t N = 6;
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::uint64_t> counts;
    for (std::uint32_t a = 0; a < 64; ++a) {
        for (std::uint32_t b = 0; b < 64; ++b) {
            const std::int64_t k = 2 * std::popcount(a) - N;
            const std::int64_t l = 2 * std::popcount(b) - N;
            const std::int64_t agree = std::popcount(~(a ^ b) & 0x3fu);
            const std::int64_t ov = 2 * agree - N;
            ++counts[{k, l, ov}];
        }
    }
    for (std::int64_t k = -N; k <= N; k += 2) {
        for (std::int64_t l = -N; l <= N; l += 2) {
            for (std::int64_t ov = -N; ov <= N; ++ov) {
                const double v = overlap_log_count(N, k, l, ov);
                const auto it = counts.find({k, l, ov});
                if (it == counts.end()) {
                    EXPECT_TRUE(std::isinf(v) && v < 0)
                        << "k=" << k << " l=" << l << " ov=" << ov;
                } else {
                    ASSERT_TRUE(std::isfinite(v));
                    EXPECT_EQ(static_cast<std::uint64_t>(std::llround(std::exp(v))),
                              it->second)
                        << "k=" << k << " l=" << l << " ov=" << ov;
                }
            }
        }
    }
}

TEST(OverlapLogCount, RowSumsMatchBinomialProducts) {
    for (std::int64_t N = 1; N <= 10; ++N) {
        for (std::int64_t k = -N; k <= N; k += 2) {
            for (std::int64_t l = -N; l <= N; l += 2) {
                long double total = 0.0L;
                for (std::int64_t ov = -N; ov <= N; ++ov) {
                    const double v = overlap_log_count(N, k, l, ov);
                    if (std::isfinite(v)) total += std::exp(static_cast<long double>(v));
                }
                const std::uint64_t want =
                    choose(N, (N + k) / 2) * choose(N, (N + l) / 2);
                EXPECT_EQ(static_cast<std::uint64_t>(std::llroundl(total)), want)
                    << "N=" << N << " k=" << k << " l=" << l;
            }
        }
    }
}

TEST(OverlapLogCount, SaturatedSpinTotalForcesOverlap) {
    // sigma all plus: the overlap with any tau is exactly |tau|.
    for (std::int64_t N = 1; N <= 10; ++N) {
        for (std::int64_t l = -N; l <= N; l += 2) {
            for (std::int64_t ov = -N; ov <= N; ++ov) {
                const double v = overlap_log_count(N, N, l, ov);
                if (ov == l) {
                    EXPECT_NEAR(std::exp(v),
                                static_cast<double>(choose(N, (N + l) / 2)), 1e-6);
                } else {
                    EXPECT_TRUE(std::isinf(v) && v < 0);
                }
            }
        }
    }
}

TEST(OverlapLogCount, SentinelsAndValidation) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(overlap_log_count(4, 3, 0, 0), -kInf);   // k parity
    EXPECT_EQ(overlap_log_count(4, 0, 3, 0), -kInf);   // l parity
    EXPECT_EQ(overlap_log_count(4, 2, 0, 1), -kInf);   // fourfold constraint
    EXPECT_EQ(overlap_log_count(4, 4, 4, 0), -kInf);   // c out of range
    EXPECT_EQ(overlap_log_count(4, 2, 2, 5), -kInf);   // |ov| > N
    EXPECT_EQ(overlap_log_count(4, 6, 0, 0), -kInf);   // |k| > N
    EXPECT_THROW(overlap_log_count(0, 0, 0, 0), std::invalid_argument);
}

TEST(ExpectedTiltedPartition, FreeCaseCountsStates) {
    const TiltParams tp = make_tilt(12, 0.5, 0.0, 0.0, 0.3);
    EXPECT_NEAR(expected_tilted_partition(tp), 12.0 * std::log(2.0), 1e-12);
}

TEST(ExpectedTiltedPartition, FullGraphReducesToCurieWeiss) {
    // p = 1: E Ztilde = e^{-gamma m^2 N^2} Z, no randomness left.
    for (double beta : {0.8, 1.5}) {
        for (double h : {0.0, 0.2}) {
            const std::int64_t n = 14;
            const TiltParams tp = make_tilt(n, 1.0, beta, h, 0.6);
            const double gamma = tp.gamma();
            const double want =
                gibbs::curie_weiss_partition(tp.params).log_z -
                gamma * 0.36 * static_cast<double>(n) * static_cast<double>(n);
            EXPECT_NEAR(expected_tilted_partition(tp), want,
                        1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(ExpectedTiltedPartition, MonteCarloCrossCheck) {
    // Average Ztilde = Z(g) e^{-gamma m^2 |edges|} over 10^4 sampled
    // graphs and compare with the closed form within 4 standard errors.
    const std::int64_t n = 10;
    const double p = 0.5, beta = 1.5;
    const double m = meanfield::solve_magnetization(beta, 0.0).m;
    const TiltParams tp = make_tilt(n, p, beta, 0.0, m);
    const double analytic = expected_tilted_partition(tp);
    const double gamma = tp.gamma();

    const int reps = 10000;
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 1; r <= reps; ++r) {
        const auto g = GraphSample::sample(n, p, static_cast<std::uint64_t>(r));
        const auto part = gibbs::enumerate_partition(g, tp.params);
        const double log_zt =
            part.log_z - gamma * m * m * static_cast<double>(g.edge_count());
        const double ratio = std::exp(log_zt - analytic);
        sum += ratio;
        sum_sq += ratio * ratio;
    }
    const double mean = sum / reps;
    const double var = (sum_sq - sum * sum / reps) / (reps - 1);
    const double se = std::sqrt(var / reps);
    EXPECT_NEAR(mean, 1.0, 4.0 * se);
    EXPECT_LT(se, 0.05);
}

TEST(ExpectedTiltPair, SecondMomentMatchesPairSum) {
    // E Ztilde^2 two ways: sum nu_N(k,l,n) e^{pair exponent} versus the
    // brute-force sum over all 4^N configuration pairs with the
    // edge-by-edge oracle.
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> ub(0.5, 1.5), um(0.0, 0.9);
    for (std::int64_t n : {4, 6, 8}) {
        const TiltParams tp = make_tilt(n, 0.5, ub(rng), 0.0, um(rng));
        LogSum via_nu;
        for (std::int64_t k = -n; k <= n; k += 2)
            for (std::int64_t l = -n; l <= n; l += 2)
                for (std::int64_t ov = -n; ov <= n; ++ov) {
                    const double c = overlap_log_count(n, k, l, ov);
                    if (!std::isfinite(c)) continue;
                    via_nu.add(c + expected_tilt_pair(tp, k, l, ov));
                }

        LogSum direct;
        const std::uint64_t lim = 1ULL << n;
        std::vector<int> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
        for (std::uint64_t a = 0; a < lim; ++a) {
            for (std::uint64_t b = 0; b < lim; ++b) {
                for (std::int64_t i = 0; i < n; ++i) {
                    s[static_cast<std::size_t>(i)] = (a >> i) & 1 ? 1 : -1;
                    t[static_cast<std::size_t>(i)] = (b >> i) & 1 ? 1 : -1;
                }
                direct.add(oracle_tilt_pair(tp, s, t));
            }
        }
        EXPECT_NEAR(via_nu.value(), direct.value(),
                    1e-8 * std::max(1.0, std::abs(direct.value())))
            << "n = " << n;
    }
}

TEST(NuTableCsv, FourSiteTable) {
    const std::string csv = nu_table_csv(4);
    EXPECT_EQ(csv.rfind("k,l,n,log_count\n", 0), 0u);
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    EXPECT_EQ(lines, 36);  // header + 35 realizable triples
    EXPECT_NE(csv.find("4,4,4,0\n"), std::string::npos);  // nu(4,4,4) = 1
    EXPECT_THROW(nu_table_csv(0), std::invalid_argument);
}
